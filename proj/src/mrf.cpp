#include "statrob/mrf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "statrob/errors.hpp"
#include "statrob/rng.hpp"

namespace statrob {

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974;  // state initialization
constexpr std::uint64_t kDrawStream = 0x64726177;  // exact-sampler uniforms
constexpr std::uint64_t kLfsrStream = 0x6c667372;  // hardware-sampler state

double truncated_match_cost(const StereoMrf& model, int row, int col, int d) {
  const int source = col - d;
  if (source < 0) return model.data_truncation;
  const int diff =
      std::abs(static_cast<int>(model.left.at(row, col)) -
               static_cast<int>(model.right.at(row, source)));
  return std::min(static_cast<double>(diff), model.data_truncation);
}

double truncated_label_distance(const StereoMrf& model, int a, int b) {
  return std::min(static_cast<double>(std::abs(a - b)),
                  model.smoothness_truncation);
}

// Smoothness from in-bounds neighbors in a fixed order (up, down, left,
// right) so energies are bit-identical however they are assembled.
void conditional_into(const StereoMrf& model, const std::uint8_t* state,
                      int row, int col, const double* data_costs,
                      double* out) {
  const int width = model.left.width;
  const int height = model.left.height;
  const std::size_t p = static_cast<std::size_t>(row) * width + col;
  const bool has_up = row > 0;
  const bool has_down = row + 1 < height;
  const bool has_left = col > 0;
  const bool has_right = col + 1 < width;
  const int up = has_up ? state[p - width] : 0;
  const int down = has_down ? state[p + width] : 0;
  const int left = has_left ? state[p - 1] : 0;
  const int right = has_right ? state[p + 1] : 0;
  for (int d = 0; d < model.disparity_levels; ++d) {
    double smoothness = 0.0;
    if (has_up) smoothness += truncated_label_distance(model, d, up);
    if (has_down) smoothness += truncated_label_distance(model, d, down);
    if (has_left) smoothness += truncated_label_distance(model, d, left);
    if (has_right) smoothness += truncated_label_distance(model, d, right);
    out[d] = data_costs[d] + model.smoothness_weight * smoothness;
  }
}

std::size_t argmin_index(const double* values, int count) {
  std::size_t best = 0;
  for (int i = 1; i < count; ++i)
    if (values[i] < values[best]) best = i;
  return best;
}

}  // namespace

void StereoMrf::validate() const {
  if (left.width <= 0 || left.height <= 0)
    throw InvalidInput("mrf: images must be non-empty");
  if (left.width != right.width || left.height != right.height)
    throw ShapeMismatch("mrf: left is " + std::to_string(left.width) + "x" +
                        std::to_string(left.height) + ", right is " +
                        std::to_string(right.width) + "x" +
                        std::to_string(right.height));
  if (disparity_levels < 2 || disparity_levels > 256)
    throw InvalidInput("mrf: disparity_levels must lie in [2, 256], got " +
                       std::to_string(disparity_levels));
  if (disparity_levels > left.width)
    throw InvalidInput("mrf: disparity_levels exceeds image width");
  if (!std::isfinite(data_truncation) || data_truncation < 0.0)
    throw InvalidInput("mrf: data_truncation must be finite and >= 0");
  if (!std::isfinite(smoothness_weight) || smoothness_weight < 0.0)
    throw InvalidInput("mrf: smoothness_weight must be finite and >= 0");
  if (!std::isfinite(smoothness_truncation) || smoothness_truncation < 1.0)
    throw InvalidInput("mrf: smoothness_truncation must be finite and >= 1");
}

void ChainConfig::validate() const {
  if (iterations < 1)
    throw ConfigError("chain: iterations must be >= 1");
  if (record_window < 1 || record_window > iterations)
    throw ConfigError("chain: record_window must lie in [1, iterations]");
  if (!std::isfinite(initial_temperature) || initial_temperature <= 0.0)
    throw ConfigError("chain: initial_temperature must be > 0");
  if (!std::isfinite(cooling_rate) || cooling_rate <= 0.0 || cooling_rate > 1.0)
    throw ConfigError("chain: cooling_rate must lie in (0, 1]");
}

std::vector<double> conditional_energies(const StereoMrf& model,
                                         std::span<const std::uint8_t> state,
                                         int row, int col) {
  model.validate();
  const int width = model.left.width;
  const int height = model.left.height;
  if (state.size() != static_cast<std::size_t>(width) * height)
    throw ShapeMismatch("conditional_energies: state size does not match image");
  if (row < 0 || row >= height || col < 0 || col >= width)
    throw InvalidInput("conditional_energies: pixel out of bounds");
  for (std::uint8_t s : state)
    if (s >= model.disparity_levels)
      throw InvalidInput("conditional_energies: state label out of range");

  std::vector<double> data_costs(model.disparity_levels);
  for (int d = 0; d < model.disparity_levels; ++d)
    data_costs[d] = truncated_match_cost(model, row, col, d);
  std::vector<double> energies(model.disparity_levels);
  conditional_into(model, state.data(), row, col, data_costs.data(),
                   energies.data());
  return energies;
}

double total_energy(const StereoMrf& model,
                    std::span<const std::uint8_t> state) {
  model.validate();
  const int width = model.left.width;
  const int height = model.left.height;
  if (state.size() != static_cast<std::size_t>(width) * height)
    throw ShapeMismatch("total_energy: state size does not match image");
  double energy = 0.0;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const std::size_t p = static_cast<std::size_t>(r) * width + c;
      const int d = state[p];
      if (d >= model.disparity_levels)
        throw InvalidInput("total_energy: state label out of range");
      energy += truncated_match_cost(model, r, c, d);
      if (c + 1 < width)
        energy += model.smoothness_weight *
                  truncated_label_distance(model, d, state[p + 1]);
      if (r + 1 < height)
        energy += model.smoothness_weight *
                  truncated_label_distance(model, d, state[p + width]);
    }
  }
  return energy;
}

std::vector<ChainTrace> run_chain_snapshots(
    const StereoMrf& model, const ChainConfig& config,
    const SamplerSpec& sampler, std::span<const ChainSnapshotSpec> snapshots) {
  model.validate();
  config.validate();
  if (snapshots.empty())
    throw InvalidInput("run_chain: at least one snapshot required");
  int total_sweeps = 0;
  for (const ChainSnapshotSpec& s : snapshots) {
    if (s.iterations < 1)
      throw InvalidInput("run_chain: snapshot iterations must be >= 1");
    if (s.record_window < 1 || s.record_window > s.iterations)
      throw InvalidInput("run_chain: snapshot window must lie in [1, iterations]");
    total_sweeps = std::max(total_sweeps, s.iterations);
  }

  const int height = model.left.height;
  const int width = model.left.width;
  const int levels = model.disparity_levels;
  const std::size_t npix = static_cast<std::size_t>(height) * width;

  const ApproxConfig* approx = std::get_if<ApproxConfig>(&sampler);
  if (approx) approx->validate();

  // Data costs do not depend on the state; precompute the whole volume.
  std::vector<double> data_costs(npix * levels);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      double* row = &data_costs[(static_cast<std::size_t>(r) * width + c) * levels];
      for (int d = 0; d < levels; ++d)
        row[d] = truncated_match_cost(model, r, c, d);
    }

  std::mt19937_64 init_rng(derive_seed(config.seed, kInitStream));
  std::vector<std::uint8_t> state(npix);
  for (std::uint8_t& s : state)
    s = static_cast<std::uint8_t>(uniform_below(init_rng, levels));

  std::mt19937_64 draw_rng(derive_seed(config.seed, kDrawStream));
  Lfsr lfsr;
  if (approx)
    lfsr = make_lfsr(approx->lfsr_width, approx->lfsr_taps,
                     derive_seed(derive_seed(config.seed, kLfsrStream),
                                 approx->lfsr_seed));

  std::vector<ChainTrace> traces(snapshots.size());
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    ChainTrace& t = traces[i];
    t.height = height;
    t.width = width;
    t.labels = levels;
    t.window = snapshots[i].record_window;
    t.samples.resize(static_cast<std::size_t>(t.window) * npix);
    t.meta.sampler = approx ? SamplerKind::Approx : SamplerKind::Exact;
    t.meta.seed = config.seed;
    t.meta.iterations = static_cast<std::uint32_t>(snapshots[i].iterations);
    t.meta.checkpoint_milli = snapshots[i].tag;
  }

  std::vector<double> energies(levels);
  std::vector<double> probs(levels);
  ApproxScratch scratch;
  std::uint64_t degenerate = 0;

  for (int t = 0; t < total_sweeps; ++t) {
    const double temperature =
        config.mode == ChainMode::PureSampling
            ? 1.0
            : config.initial_temperature * std::pow(config.cooling_rate, t);
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        const std::size_t p = static_cast<std::size_t>(r) * width + c;
        conditional_into(model, state.data(), r, c, &data_costs[p * levels],
                         energies.data());
        std::size_t pick;
        if (approx) {
          if (!try_sample_approx(energies, temperature, *approx, lfsr, scratch,
                                 pick)) {
            ++degenerate;
            pick = argmin_index(energies.data(), levels);
          }
        } else {
          // Same arithmetic as pmf_from_energies + sample_exact, on
          // preallocated buffers.
          double min_e = energies[0];
          for (int d = 1; d < levels; ++d) min_e = std::min(min_e, energies[d]);
          double sum = 0.0;
          for (int d = 0; d < levels; ++d) {
            probs[d] = std::exp(-(energies[d] - min_e) / temperature);
            sum += probs[d];
          }
          for (int d = 0; d < levels; ++d) probs[d] /= sum;
          const double u = uniform01(draw_rng);
          double cum = 0.0;
          pick = levels - 1;
          for (int d = 0; d + 1 < levels; ++d) {
            cum += probs[d];
            if (u < cum) {
              pick = d;
              break;
            }
          }
        }
        state[p] = static_cast<std::uint8_t>(pick);
      }
    }
    for (std::size_t i = 0; i < snapshots.size(); ++i) {
      const int start = snapshots[i].iterations - snapshots[i].record_window;
      if (t >= start && t < snapshots[i].iterations)
        std::copy(state.begin(), state.end(),
                  traces[i].samples.begin() +
                      static_cast<std::size_t>(t - start) * npix);
      if (t + 1 == snapshots[i].iterations)
        traces[i].meta.degenerate_fallbacks = degenerate;
    }
  }

  for (ChainTrace& t : traces) t.end = end_point(t);
  return traces;
}

ChainTrace run_chain(const StereoMrf& model, const ChainConfig& config,
                     const SamplerSpec& sampler) {
  const ChainSnapshotSpec snapshot{config.iterations, config.record_window, 0};
  auto traces = run_chain_snapshots(model, config, sampler, {&snapshot, 1});
  return std::move(traces.front());
}

LabelMap end_point(const ChainTrace& trace) {
  if (trace.window < 1 || trace.labels < 1 || trace.samples.empty())
    throw InvalidInput("end_point: empty trace");
  const std::size_t npix = trace.pixel_count();
  if (trace.samples.size() != static_cast<std::size_t>(trace.window) * npix)
    throw ShapeMismatch("end_point: sample buffer does not match dimensions");
  std::vector<std::uint32_t> counts(npix * trace.labels, 0);
  for (int k = 0; k < trace.window; ++k) {
    const std::uint8_t* plane = &trace.samples[static_cast<std::size_t>(k) * npix];
    for (std::size_t p = 0; p < npix; ++p) {
      if (plane[p] >= trace.labels)
        throw InvalidInput("end_point: label out of range");
      ++counts[p * trace.labels + plane[p]];
    }
  }
  LabelMap map;
  map.width = trace.width;
  map.height = trace.height;
  map.labels.resize(npix);
  for (std::size_t p = 0; p < npix; ++p) {
    const std::uint32_t* c = &counts[p * trace.labels];
    int best = 0;
    for (int d = 1; d < trace.labels; ++d)
      if (c[d] > c[best]) best = d;  // ties keep the smaller label
    map.labels[p] = static_cast<std::uint8_t>(best);
  }
  return map;
}

double bad_pixel_percentage(const LabelMap& map, const GroundTruth& truth,
                            double threshold) {
  if (map.width != truth.width || map.height != truth.height)
    throw ShapeMismatch("bad_pixel_percentage: map is " +
                        std::to_string(map.width) + "x" +
                        std::to_string(map.height) + ", ground truth is " +
                        std::to_string(truth.width) + "x" +
                        std::to_string(truth.height));
  if (!std::isfinite(threshold) || threshold < 0.0)
    throw InvalidInput("bad_pixel_percentage: threshold must be finite and >= 0");
  const std::size_t npix = static_cast<std::size_t>(map.width) * map.height;
  std::size_t valid = 0;
  std::size_t bad = 0;
  for (std::size_t p = 0; p < npix; ++p) {
    if (!truth.valid[p]) continue;
    ++valid;
    const double error =
        std::abs(static_cast<double>(map.labels[p]) - truth.disparities[p]);
    if (error > threshold) ++bad;
  }
  if (valid == 0)
    throw InvalidInput("bad_pixel_percentage: no valid ground-truth pixels");
  return 100.0 * static_cast<double>(bad) / static_cast<double>(valid);
}

}  // namespace statrob
