#ifndef STATROB_APPROX_HW_HPP
#define STATROB_APPROX_HW_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "statrob/pmf.hpp"

namespace statrob {

// Unsigned fixed point: representable values are k / 2^fraction_bits for
// integer k in [0, 2^total_bits - 1].
struct FixedPointFormat {
  int total_bits = 8;
  int fraction_bits = 8;

  void validate() const;
  std::uint64_t max_units() const {
    return (total_bits == 64) ? ~std::uint64_t{0}
                              : ((std::uint64_t{1} << total_bits) - 1);
  }
  double unit() const;  // 2^-fraction_bits
};

// Fibonacci LFSR. Bit positions are 1-based; position 1 is the LSB. A step
// shifts left and feeds the XOR of the tapped bits into bit 1.
struct Lfsr {
  int width = 19;
  std::uint32_t tap_mask = 0;  // bit (i-1) set when position i is tapped
  std::uint32_t state = 1;

  std::uint32_t state_mask() const {
    return (width == 32) ? ~std::uint32_t{0}
                         : ((std::uint32_t{1} << width) - 1);
  }
};

struct LfsrStep {
  Lfsr next;
  double uniform;  // next.state / 2^width, in (0, 1)
};

std::uint32_t tap_mask_from_positions(int width, std::span<const int> taps);

// Reduces an arbitrary 64-bit seed to a valid nonzero state.
Lfsr make_lfsr(int width, std::span<const int> taps, std::uint64_t seed);

LfsrStep lfsr_next(const Lfsr& lfsr);

struct ApproxConfig {
  FixedPointFormat format;
  double truncation_threshold = 0.00390625;  // 2^-8
  int lfsr_width = 19;
  std::vector<int> lfsr_taps = {19, 18, 17, 14};
  std::uint64_t lfsr_seed = 1;

  void validate() const;
  std::uint64_t threshold_units() const;
};

// Round-to-nearest (ties to even) onto the format grid, then zero anything
// below the truncation threshold. Inputs must be pre-scaled by the caller;
// the sampling pipeline normalizes so the max weight is 1.0.
// Returns grid units; value = units * format.unit().
std::vector<std::uint64_t> quantize_weight_units(std::span<const double> weights,
                                                 const ApproxConfig& config);
std::vector<double> quantize_weights(std::span<const double> weights,
                                     const ApproxConfig& config);

struct ApproxDraw {
  std::size_t index;
  Lfsr lfsr;
};

// One hardware draw: Boltzmann weights from the energies, quantized, then an
// integer inverse-CDF lookup against the LFSR uniform. Bit-exact: all
// comparisons happen in integer arithmetic.
ApproxDraw sample_approx(std::span<const double> energies, double temperature,
                         const ApproxConfig& config, const Lfsr& lfsr);

// Reusable buffers for the allocation-free sampling core below.
struct ApproxScratch {
  std::vector<double> weights;
  std::vector<std::uint64_t> units;
};

// Core of sample_approx without per-call allocation. Returns false and
// leaves the LFSR untouched when every quantized weight truncates to zero
// (the degenerate case sample_approx reports by throwing).
bool try_sample_approx(std::span<const double> energies, double temperature,
                       const ApproxConfig& config, Lfsr& lfsr,
                       ApproxScratch& scratch, std::size_t& index);

// Exact per-index counts of LFSR states selecting each index, assuming the
// state is equidistributed over [1, 2^width - 1]. Matching sample_approx
// enumerated over a full period of a maximal LFSR, integer for integer.
std::vector<std::uint64_t> effective_hw_counts(std::span<const double> energies,
                                               double temperature,
                                               const ApproxConfig& config);

// effective_hw_counts normalized by 2^width - 1.
Pmf effective_hw_pmf(std::span<const double> energies, double temperature,
                     const ApproxConfig& config);

}  // namespace statrob

#endif
