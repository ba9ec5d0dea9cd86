#ifndef STATROB_METRICS_HPP
#define STATROB_METRICS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "statrob/mrf.hpp"

namespace statrob {

// Convergence threshold on the shrink factor.
inline constexpr double kRhatThreshold = 1.1;

// Effective sample size of one scalar series: N / (1 + 2 * sum of lag
// autocorrelations), biased-normalized autocovariances, truncated at the
// last consecutive lag pair (1,2), (3,4), ... with a positive sum. Clamped
// to [1, N]. A zero-variance series is not scoreable and yields nullopt.
// Fewer than 10 points throws InsufficientData.
std::optional<double> ess(std::span<const double> series);

// Per-pixel activity mask: a pixel is inactive when any hardware trace holds
// it constant over the whole window. Software traces only participate in the
// shape check. Returns 1 = active, 0 = inactive, row-major.
std::vector<std::uint8_t> active_region(
    std::span<const ChainTrace* const> software_traces,
    std::span<const ChainTrace* const> hardware_traces);

enum class GrVerdict : std::uint8_t { Converged, NotConverged };

struct RhatRecord {
  double between = 0.0;
  double within = 0.0;
  std::optional<double> rhat;  // empty when within-chain variance is zero
  GrVerdict verdict = GrVerdict::NotConverged;
};

// Between/within shrink factor over m >= 2 equal-length chains of n >= 10
// points. When every chain is frozen (within == 0): all frozen at the same
// value counts as converged, at different values as not converged.
RhatRecord gelman_rubin(std::span<const std::span<const double>> chains);
RhatRecord gelman_rubin(const std::vector<std::vector<double>>& chains);

// gelman_rubin at every pixel, chains = one series per trace.
std::vector<RhatRecord> rhat_field(std::span<const ChainTrace* const> traces);

// Percent of records with a Converged verdict.
double convergence_percentage(std::span<const RhatRecord> records);

// Per-pixel mode across maps; ties break toward the smaller label.
LabelMap reference_mode(std::span<const LabelMap> maps);

// Coefficient of determination of `result` against `reference`:
// 1 - SS_res / SS_tot. Undefined (nullopt) when the reference is constant.
std::optional<double> r_squared(const LabelMap& result,
                                const LabelMap& reference);

// Two-sample Kolmogorov-Smirnov statistic, sup |F_a - F_b|.
double ks_statistic(std::span<const double> a, std::span<const double> b);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int permutations = 0;
};

// Permutation test on the KS statistic under seeded label shuffles, with the
// add-one estimate p = (1 + #{D* >= D}) / (permutations + 1).
KsResult ks_permutation_test(std::span<const double> a,
                             std::span<const double> b, int permutations,
                             std::uint64_t seed);

struct EssSummary {
  std::optional<double> mean_overall;  // mean over scoreable pixels
  std::optional<double> mean_active;   // mean over scoreable active pixels
  std::size_t excluded = 0;            // zero-variance pixels
  std::vector<std::optional<double>> per_rv;
};

// ess at every pixel of one trace, averaged overall and over the active
// mask (1 byte per pixel, same layout as the trace).
EssSummary ess_summary(const ChainTrace& trace,
                       std::span<const std::uint8_t> active_mask);

}  // namespace statrob

#endif
