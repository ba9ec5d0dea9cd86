#ifndef STATROB_MRF_HPP
#define STATROB_MRF_HPP

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "statrob/approx_hw.hpp"
#include "statrob/image_io.hpp"

namespace statrob {

// Stereo MRF: truncated absolute data term, truncated-linear smoothness on
// the 4-neighborhood.
struct StereoMrf {
  GrayImage left;
  GrayImage right;
  int disparity_levels = 16;
  double data_truncation = 20.0;     // max per-pixel data cost
  double smoothness_weight = 2.0;    // pairwise weight, >= 0
  double smoothness_truncation = 2.0;  // label-distance cap, >= 1

  void validate() const;
};

enum class ChainMode : std::uint8_t { PureSampling, Annealing };

struct ChainConfig {
  int iterations = 100;  // full Gibbs sweeps
  ChainMode mode = ChainMode::PureSampling;
  double initial_temperature = 1.0;
  double cooling_rate = 1.0;  // in (0, 1]
  int record_window = 50;     // trailing sweeps kept in the trace
  std::uint64_t seed = 1;

  void validate() const;
};

enum class SamplerKind : std::uint8_t { Exact = 0, Approx = 1 };

struct ExactSamplerSpec {};
using SamplerSpec = std::variant<ExactSamplerSpec, ApproxConfig>;

struct TraceMeta {
  SamplerKind sampler = SamplerKind::Exact;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::uint32_t iterations = 0;
  std::uint64_t degenerate_fallbacks = 0;
  // Experiment-layer tags carried through trace files.
  std::uint8_t arm = 0;
  std::uint32_t checkpoint_milli = 0;  // 0 = main run
};

struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> labels;

  int at(int row, int col) const {
    return labels[static_cast<std::size_t>(row) * width + col];
  }
};

// Per-pixel disparity series over the final record_window sweeps.
struct ChainTrace {
  int height = 0;
  int width = 0;
  int labels = 0;  // D
  int window = 0;  // K
  std::vector<std::uint8_t> samples;  // window planes, row-major
  LabelMap end;                       // windowed per-pixel mode
  TraceMeta meta;

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(height) * width;
  }
  std::uint8_t sample(int sweep, std::size_t pixel) const {
    return samples[static_cast<std::size_t>(sweep) * pixel_count() + pixel];
  }
};

// Gibbs conditional for one pixel: energy[d] = data(d) + smoothness(d) where
// data(d) = min(|left(r,c) - right(r,c-d)|, kappa), out-of-image columns cost
// kappa, and smoothness sums lambda * min(|d - neighbor|, tau) over in-bounds
// 4-neighbors.
std::vector<double> conditional_energies(const StereoMrf& model,
                                         std::span<const std::uint8_t> state,
                                         int row, int col);

// Full-field energy under the same model terms, each pairwise edge once.
double total_energy(const StereoMrf& model, std::span<const std::uint8_t> state);

// Raster-order Gibbs sweeps from a uniform-random start; deterministic given
// (seed, sampler kind, config). A degenerate approximate conditional falls
// back to the argmin-energy label and is counted in meta.
ChainTrace run_chain(const StereoMrf& model, const ChainConfig& config,
                     const SamplerSpec& sampler);

struct ChainSnapshotSpec {
  int iterations = 0;     // sweep budget for this capture
  int record_window = 0;  // trailing sweeps to keep, in [1, iterations]
  std::uint32_t tag = 0;  // stored as meta.checkpoint_milli
};

// One chain, several capture points: snapshot i holds the trailing
// record_window sweeps of the first `iterations` sweeps. Budgets share the
// chain prefix, so a shorter budget is the same run stopped earlier.
// meta.degenerate_fallbacks counts fallbacks within each snapshot's budget.
std::vector<ChainTrace> run_chain_snapshots(
    const StereoMrf& model, const ChainConfig& config,
    const SamplerSpec& sampler, std::span<const ChainSnapshotSpec> snapshots);

// Per-pixel mode of the recorded window; ties break toward the smaller label.
LabelMap end_point(const ChainTrace& trace);

// 100 * |{valid p : |map(p) - gt(p)| > threshold}| / |{valid p}|.
double bad_pixel_percentage(const LabelMap& map, const GroundTruth& truth,
                            double threshold);

}  // namespace statrob

#endif
