#include "statrob/approx_hw.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "statrob/errors.hpp"
#include "statrob/rng.hpp"

namespace statrob {

void FixedPointFormat::validate() const {
  if (total_bits < 2 || total_bits > 32)
    throw ConfigError("fixed-point total_bits must lie in [2, 32], got " +
                      std::to_string(total_bits));
  if (fraction_bits < 0 || fraction_bits > total_bits)
    throw ConfigError("fixed-point fraction_bits must lie in [0, total_bits], got " +
                      std::to_string(fraction_bits));
}

double FixedPointFormat::unit() const { return std::ldexp(1.0, -fraction_bits); }

std::uint32_t tap_mask_from_positions(int width, std::span<const int> taps) {
  if (taps.empty()) throw ConfigError("lfsr taps must be non-empty");
  std::uint32_t mask = 0;
  for (int t : taps) {
    if (t < 1 || t > width)
      throw ConfigError("lfsr tap " + std::to_string(t) +
                        " outside [1, width=" + std::to_string(width) + "]");
    mask |= std::uint32_t{1} << (t - 1);
  }
  return mask;
}

Lfsr make_lfsr(int width, std::span<const int> taps, std::uint64_t seed) {
  if (width < 2 || width > 32)
    throw ConfigError("lfsr width must lie in [2, 32], got " +
                      std::to_string(width));
  Lfsr lfsr;
  lfsr.width = width;
  lfsr.tap_mask = tap_mask_from_positions(width, taps);
  const std::uint64_t nonzero_states = (std::uint64_t{1} << width) - 1;
  lfsr.state =
      static_cast<std::uint32_t>(splitmix64(seed) % nonzero_states) + 1;
  return lfsr;
}

LfsrStep lfsr_next(const Lfsr& lfsr) {
  const std::uint32_t mask = lfsr.state_mask();
  if (lfsr.state == 0 || (lfsr.state & ~mask) != 0)
    throw InvalidState("lfsr state must be nonzero and below 2^width");
  const std::uint32_t feedback =
      static_cast<std::uint32_t>(std::popcount(lfsr.state & lfsr.tap_mask) & 1);
  LfsrStep step;
  step.next = lfsr;
  step.next.state = ((lfsr.state << 1) & mask) | feedback;
  step.uniform =
      static_cast<double>(step.next.state) * std::ldexp(1.0, -lfsr.width);
  return step;
}

void ApproxConfig::validate() const {
  format.validate();
  if (!(truncation_threshold >= 0.0) || !std::isfinite(truncation_threshold))
    throw ConfigError("truncation_threshold must be finite and >= 0");
  const double units = std::ldexp(truncation_threshold, format.fraction_bits);
  if (units != std::floor(units) || units > static_cast<double>(format.max_units()))
    throw ConfigError("truncation_threshold must be representable in the format or 0");
  if (lfsr_width < 2 || lfsr_width > 32)
    throw ConfigError("lfsr_width must lie in [2, 32]");
  tap_mask_from_positions(lfsr_width, lfsr_taps);
  if (lfsr_seed == 0) throw ConfigError("lfsr_seed must be nonzero");
}

std::uint64_t ApproxConfig::threshold_units() const {
  return static_cast<std::uint64_t>(
      std::ldexp(truncation_threshold, format.fraction_bits));
}

namespace {

// Shared quantization core; returns whether any unit survived truncation.
bool quantize_units_into(std::span<const double> weights,
                         const ApproxConfig& config,
                         std::vector<std::uint64_t>& units) {
  if (weights.empty()) throw InvalidInput("quantize_weights: empty input");
  const std::uint64_t max_units = config.format.max_units();
  const std::uint64_t threshold = config.threshold_units();
  units.resize(weights.size());
  bool any_positive = false;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double w = weights[i];
    if (!std::isfinite(w) || w < 0.0)
      throw InvalidInput("quantize_weights: weights must be finite and >= 0");
    // Scaling by 2^f is exact in binary floating point, so nearbyint sees
    // exact ties and resolves them to even.
    const double scaled = std::nearbyint(std::ldexp(w, config.format.fraction_bits));
    std::uint64_t k = scaled >= static_cast<double>(max_units)
                          ? max_units
                          : static_cast<std::uint64_t>(scaled);
    if (k < threshold) k = 0;
    units[i] = k;
    any_positive = any_positive || k > 0;
  }
  return any_positive;
}

// Boltzmann weights normalized so the max is exactly 1.0, the top of the
// fixed-point dynamic range.
void boltzmann_weights_into(std::span<const double> energies, double temperature,
                            std::vector<double>& weights) {
  if (energies.empty()) throw InvalidInput("sample_approx: empty energies");
  if (!(temperature > 0.0))
    throw InvalidInput("sample_approx: temperature must be > 0");
  double min_e = energies[0];
  for (double e : energies) {
    if (!std::isfinite(e)) throw InvalidInput("sample_approx: non-finite energy");
    min_e = std::min(min_e, e);
  }
  weights.resize(energies.size());
  for (std::size_t i = 0; i < energies.size(); ++i)
    weights[i] = std::exp(-(energies[i] - min_e) / temperature);
}

}  // namespace

std::vector<std::uint64_t> quantize_weight_units(std::span<const double> weights,
                                                 const ApproxConfig& config) {
  std::vector<std::uint64_t> units;
  if (!quantize_units_into(weights, config, units))
    throw DegenerateDistribution("quantize_weights: all weights quantized to zero");
  return units;
}

std::vector<double> quantize_weights(std::span<const double> weights,
                                     const ApproxConfig& config) {
  const auto units = quantize_weight_units(weights, config);
  std::vector<double> values(units.size());
  for (std::size_t i = 0; i < units.size(); ++i)
    values[i] = std::ldexp(static_cast<double>(units[i]),
                           -config.format.fraction_bits);
  return values;
}

bool try_sample_approx(std::span<const double> energies, double temperature,
                       const ApproxConfig& config, Lfsr& lfsr,
                       ApproxScratch& scratch, std::size_t& index) {
  if (lfsr.width != config.lfsr_width)
    throw InvalidState("sample_approx: lfsr width does not match config");
  boltzmann_weights_into(energies, temperature, scratch.weights);
  if (!quantize_units_into(scratch.weights, config, scratch.units)) return false;
  std::uint64_t total = 0;
  for (std::uint64_t u : scratch.units) total += u;

  const LfsrStep step = lfsr_next(lfsr);
  lfsr = step.next;
  const unsigned __int128 lhs =
      static_cast<unsigned __int128>(step.next.state) * total;
  std::uint64_t cumulative = 0;
  for (std::size_t i = 0; i < scratch.units.size(); ++i) {
    cumulative += scratch.units[i];
    const unsigned __int128 rhs = static_cast<unsigned __int128>(cumulative)
                                  << config.lfsr_width;
    if (lhs <= rhs) {
      index = i;
      return true;
    }
  }
  index = scratch.units.size() - 1;  // unreachable: lhs <= total << width
  return true;
}

ApproxDraw sample_approx(std::span<const double> energies, double temperature,
                         const ApproxConfig& config, const Lfsr& lfsr) {
  ApproxScratch scratch;
  Lfsr advanced = lfsr;
  std::size_t index = 0;
  if (!try_sample_approx(energies, temperature, config, advanced, scratch, index))
    throw DegenerateDistribution("sample_approx: all weights quantized to zero");
  return {index, advanced};
}

std::vector<std::uint64_t> effective_hw_counts(std::span<const double> energies,
                                               double temperature,
                                               const ApproxConfig& config) {
  ApproxScratch scratch;
  boltzmann_weights_into(energies, temperature, scratch.weights);
  if (!quantize_units_into(scratch.weights, config, scratch.units))
    throw DegenerateDistribution(
        "effective_hw_counts: all weights quantized to zero");
  const auto& units = scratch.units;
  std::uint64_t total = 0;
  for (std::uint64_t u : units) total += u;

  const int width = config.lfsr_width;
  const std::uint64_t max_state = (std::uint64_t{1} << width) - 1;
  std::vector<std::uint64_t> counts(units.size());
  std::uint64_t cumulative = 0;
  std::uint64_t prev_boundary = 0;
  for (std::size_t i = 0; i < units.size(); ++i) {
    cumulative += units[i];
    // Largest state s with s*total <= cumulative*2^width, capped at the
    // number of nonzero states.
    const unsigned __int128 scaled = static_cast<unsigned __int128>(cumulative)
                                     << width;
    std::uint64_t boundary = static_cast<std::uint64_t>(scaled / total);
    boundary = std::min(boundary, max_state);
    counts[i] = boundary - prev_boundary;
    prev_boundary = boundary;
  }
  return counts;
}

Pmf effective_hw_pmf(std::span<const double> energies, double temperature,
                     const ApproxConfig& config) {
  const auto counts = effective_hw_counts(energies, temperature, config);
  const double denom =
      static_cast<double>((std::uint64_t{1} << config.lfsr_width) - 1);
  std::vector<double> probs(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    probs[i] = static_cast<double>(counts[i]) / denom;
  return Pmf::from_probs(std::move(probs));
}

}  // namespace statrob
