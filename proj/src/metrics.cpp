#include "statrob/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "statrob/errors.hpp"
#include "statrob/rng.hpp"

namespace statrob {

namespace {

constexpr std::uint64_t kKsStream = 0x6b73;  // permutation shuffles

double series_mean(std::span<const double> series) {
  double sum = 0.0;
  for (double x : series) sum += x;
  return sum / static_cast<double>(series.size());
}

// Lag-k autocovariance with the biased 1/N normalization.
double autocovariance(std::span<const double> series, double mean, int lag) {
  const std::size_t n = series.size();
  double sum = 0.0;
  for (std::size_t i = 0; i + lag < n; ++i)
    sum += (series[i] - mean) * (series[i + lag] - mean);
  return sum / static_cast<double>(n);
}

void check_trace_shapes(std::span<const ChainTrace* const> traces,
                        const char* where) {
  const ChainTrace* first = traces.front();
  for (const ChainTrace* t : traces) {
    if (t->height != first->height || t->width != first->width ||
        t->window != first->window)
      throw ShapeMismatch(std::string(where) +
                          ": traces disagree on dimensions or window");
  }
}

bool pixel_constant(const ChainTrace& trace, std::size_t pixel) {
  const std::uint8_t first = trace.sample(0, pixel);
  for (int k = 1; k < trace.window; ++k)
    if (trace.sample(k, pixel) != first) return false;
  return true;
}

}  // namespace

std::optional<double> ess(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 10)
    throw InsufficientData("ess: need at least 10 points, got " +
                           std::to_string(n));
  for (double x : series)
    if (!std::isfinite(x)) throw InvalidInput("ess: non-finite value");

  const double mean = series_mean(series);
  const double c0 = autocovariance(series, mean, 0);
  if (c0 == 0.0) return std::nullopt;

  // Sum lag pairs while each pair's correlation sum stays positive.
  double rho_sum = 0.0;
  for (int t = 1; 2 * t <= static_cast<int>(n) - 1; ++t) {
    const double pair =
        (autocovariance(series, mean, 2 * t - 1) +
         autocovariance(series, mean, 2 * t)) / c0;
    if (pair <= 0.0) break;
    rho_sum += pair;
  }
  const double raw = static_cast<double>(n) / (1.0 + 2.0 * rho_sum);
  return std::clamp(raw, 1.0, static_cast<double>(n));
}

std::vector<std::uint8_t> active_region(
    std::span<const ChainTrace* const> software_traces,
    std::span<const ChainTrace* const> hardware_traces) {
  if (hardware_traces.empty())
    throw InsufficientData("active_region: no hardware traces");
  check_trace_shapes(hardware_traces, "active_region");
  if (!software_traces.empty()) {
    check_trace_shapes(software_traces, "active_region");
    const ChainTrace* sw = software_traces.front();
    const ChainTrace* hw = hardware_traces.front();
    if (sw->height != hw->height || sw->width != hw->width ||
        sw->window != hw->window)
      throw ShapeMismatch("active_region: software and hardware traces disagree");
  }
  const std::size_t npix = hardware_traces.front()->pixel_count();
  std::vector<std::uint8_t> mask(npix, 1);
  for (const ChainTrace* t : hardware_traces)
    for (std::size_t p = 0; p < npix; ++p)
      if (mask[p] && pixel_constant(*t, p)) mask[p] = 0;
  return mask;
}

RhatRecord gelman_rubin(std::span<const std::span<const double>> chains) {
  const std::size_t m = chains.size();
  if (m < 2)
    throw InsufficientChains("gelman_rubin: need at least 2 chains, got " +
                             std::to_string(m));
  const std::size_t n = chains.front().size();
  for (const auto& chain : chains)
    if (chain.size() != n)
      throw ShapeMismatch("gelman_rubin: chains have unequal lengths");
  if (n < 10)
    throw InsufficientData("gelman_rubin: need at least 10 points per chain");

  std::vector<double> means(m);
  double grand = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    means[j] = series_mean(chains[j]);
    grand += means[j];
  }
  grand /= static_cast<double>(m);

  double between = 0.0;
  for (std::size_t j = 0; j < m; ++j)
    between += (means[j] - grand) * (means[j] - grand);
  between *= static_cast<double>(n) / static_cast<double>(m - 1);

  double within = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double ss = 0.0;
    for (double x : chains[j]) ss += (x - means[j]) * (x - means[j]);
    within += ss / static_cast<double>(n - 1);
  }
  within /= static_cast<double>(m);

  RhatRecord record;
  record.between = between;
  record.within = within;
  if (within == 0.0) {
    // All chains frozen: same value everywhere converged, else disagreeing.
    record.verdict =
        between == 0.0 ? GrVerdict::Converged : GrVerdict::NotConverged;
    return record;
  }
  const double nd = static_cast<double>(n);
  const double pooled = (nd - 1.0) / nd * within + between / nd;
  record.rhat = std::sqrt(pooled / within);
  record.verdict = *record.rhat < kRhatThreshold ? GrVerdict::Converged
                                                 : GrVerdict::NotConverged;
  return record;
}

RhatRecord gelman_rubin(const std::vector<std::vector<double>>& chains) {
  std::vector<std::span<const double>> views(chains.begin(), chains.end());
  return gelman_rubin(std::span<const std::span<const double>>(views));
}

std::vector<RhatRecord> rhat_field(std::span<const ChainTrace* const> traces) {
  if (traces.size() < 2)
    throw InsufficientChains("rhat_field: need at least 2 traces");
  check_trace_shapes(traces, "rhat_field");
  const std::size_t m = traces.size();
  const int n = traces.front()->window;
  const std::size_t npix = traces.front()->pixel_count();

  std::vector<double> flat(m * static_cast<std::size_t>(n));
  std::vector<std::span<const double>> views(m);
  for (std::size_t j = 0; j < m; ++j)
    views[j] = std::span<const double>(&flat[j * n], static_cast<std::size_t>(n));

  std::vector<RhatRecord> records(npix);
  for (std::size_t p = 0; p < npix; ++p) {
    for (std::size_t j = 0; j < m; ++j)
      for (int k = 0; k < n; ++k)
        flat[j * n + k] = static_cast<double>(traces[j]->sample(k, p));
    records[p] = gelman_rubin(std::span<const std::span<const double>>(views));
  }
  return records;
}

double convergence_percentage(std::span<const RhatRecord> records) {
  if (records.empty())
    throw InvalidInput("convergence_percentage: no records");
  std::size_t converged = 0;
  for (const RhatRecord& r : records)
    if (r.verdict == GrVerdict::Converged) ++converged;
  return 100.0 * static_cast<double>(converged) /
         static_cast<double>(records.size());
}

LabelMap reference_mode(std::span<const LabelMap> maps) {
  if (maps.empty()) throw InsufficientData("reference_mode: no maps");
  const LabelMap& first = maps.front();
  for (const LabelMap& m : maps)
    if (m.width != first.width || m.height != first.height)
      throw ShapeMismatch("reference_mode: maps disagree on dimensions");

  const std::size_t npix = static_cast<std::size_t>(first.width) * first.height;
  LabelMap out;
  out.width = first.width;
  out.height = first.height;
  out.labels.resize(npix);
  std::uint32_t counts[256];
  for (std::size_t p = 0; p < npix; ++p) {
    std::fill(std::begin(counts), std::end(counts), 0u);
    for (const LabelMap& m : maps) ++counts[m.labels[p]];
    int best = 0;
    for (int d = 1; d < 256; ++d)
      if (counts[d] > counts[best]) best = d;  // ties keep the smaller label
    out.labels[p] = static_cast<std::uint8_t>(best);
  }
  return out;
}

std::optional<double> r_squared(const LabelMap& result,
                                const LabelMap& reference) {
  if (result.width != reference.width || result.height != reference.height)
    throw ShapeMismatch("r_squared: maps disagree on dimensions");
  const std::size_t npix =
      static_cast<std::size_t>(result.width) * result.height;
  if (npix == 0) throw InvalidInput("r_squared: empty maps");

  double mean = 0.0;
  for (std::size_t p = 0; p < npix; ++p)
    mean += static_cast<double>(reference.labels[p]);
  mean /= static_cast<double>(npix);

  double ss_tot = 0.0;
  double ss_res = 0.0;
  for (std::size_t p = 0; p < npix; ++p) {
    const double ref = static_cast<double>(reference.labels[p]);
    const double res = static_cast<double>(result.labels[p]);
    ss_tot += (ref - mean) * (ref - mean);
    ss_res += (res - ref) * (res - ref);
  }
  if (ss_tot == 0.0) return std::nullopt;
  return 1.0 - ss_res / ss_tot;
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty())
    throw InsufficientData("ks_statistic: empty sample");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());

  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == x) ++i;
    while (j < sb.size() && sb[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return d;
}

KsResult ks_permutation_test(std::span<const double> a,
                             std::span<const double> b, int permutations,
                             std::uint64_t seed) {
  if (a.size() < 2 || b.size() < 2)
    throw InsufficientData("ks_permutation_test: need at least 2 points per sample");
  if (permutations < 100)
    throw InvalidInput("ks_permutation_test: need at least 100 permutations");
  for (double x : a)
    if (!std::isfinite(x)) throw InvalidInput("ks_permutation_test: non-finite value");
  for (double x : b)
    if (!std::isfinite(x)) throw InvalidInput("ks_permutation_test: non-finite value");

  KsResult result;
  result.permutations = permutations;
  result.statistic = ks_statistic(a, b);

  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::mt19937_64 rng(derive_seed(seed, kKsStream));

  int at_least = 0;
  for (int p = 0; p < permutations; ++p) {
    for (std::size_t i = pooled.size() - 1; i > 0; --i) {
      const std::size_t j = uniform_below(rng, i + 1);
      std::swap(pooled[i], pooled[j]);
    }
    const std::span<const double> pa(pooled.data(), a.size());
    const std::span<const double> pb(pooled.data() + a.size(), b.size());
    if (ks_statistic(pa, pb) >= result.statistic) ++at_least;
  }
  result.p_value = (1.0 + static_cast<double>(at_least)) /
                   (static_cast<double>(permutations) + 1.0);
  return result;
}

EssSummary ess_summary(const ChainTrace& trace,
                       std::span<const std::uint8_t> active_mask) {
  const std::size_t npix = trace.pixel_count();
  if (active_mask.size() != npix)
    throw ShapeMismatch("ess_summary: mask size does not match trace");

  EssSummary summary;
  summary.per_rv.resize(npix);
  std::vector<double> series(trace.window);
  double sum_overall = 0.0;
  double sum_active = 0.0;
  std::size_t n_overall = 0;
  std::size_t n_active = 0;
  for (std::size_t p = 0; p < npix; ++p) {
    for (int k = 0; k < trace.window; ++k)
      series[k] = static_cast<double>(trace.sample(k, p));
    summary.per_rv[p] = ess(series);
    if (!summary.per_rv[p]) {
      ++summary.excluded;
      continue;
    }
    sum_overall += *summary.per_rv[p];
    ++n_overall;
    if (active_mask[p]) {
      sum_active += *summary.per_rv[p];
      ++n_active;
    }
  }
  if (n_overall > 0)
    summary.mean_overall = sum_overall / static_cast<double>(n_overall);
  if (n_active > 0)
    summary.mean_active = sum_active / static_cast<double>(n_active);
  return summary;
}

}  // namespace statrob
