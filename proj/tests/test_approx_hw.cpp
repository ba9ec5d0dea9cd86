#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "statrob/approx_hw.hpp"
#include "statrob/errors.hpp"
#include "statrob/pmf.hpp"
#include "statrob/rng.hpp"

using namespace statrob;

namespace {

// Independent oracle: scan every representable grid value, pick the nearest,
// break ties toward the even unit count, then apply the truncation rule.
std::uint64_t quantize_oracle(double w, const ApproxConfig& config) {
  const std::uint64_t max_units = config.format.max_units();
  const double unit = config.format.unit();
  std::uint64_t best = 0;
  double best_dist = std::abs(w);
  for (std::uint64_t k = 1; k <= max_units; ++k) {
    const double dist = std::abs(w - static_cast<double>(k) * unit);
    if (dist < best_dist || (dist == best_dist && k % 2 == 0)) {
      best = k;
      best_dist = dist;
    }
  }
  if (static_cast<double>(best) * unit < config.truncation_threshold) best = 0;
  return best;
}

ApproxConfig small_config(int total, int fraction, double threshold,
                          int width, std::vector<int> taps) {
  ApproxConfig config;
  config.format.total_bits = total;
  config.format.fraction_bits = fraction;
  config.truncation_threshold = threshold;
  config.lfsr_width = width;
  config.lfsr_taps = std::move(taps);
  return config;
}

}  // namespace

TEST_CASE("fixed-point format validation and helpers") {
  FixedPointFormat format;
  format.total_bits = 8;
  format.fraction_bits = 8;
  CHECK_NOTHROW(format.validate());
  CHECK(format.max_units() == 255);
  CHECK(format.unit() == doctest::Approx(1.0 / 256.0).epsilon(1e-18));

  format.total_bits = 1;
  CHECK_THROWS_AS(format.validate(), ConfigError);
  format.total_bits = 33;
  CHECK_THROWS_AS(format.validate(), ConfigError);
  format.total_bits = 8;
  format.fraction_bits = 9;
  CHECK_THROWS_AS(format.validate(), ConfigError);
  format.fraction_bits = -1;
  CHECK_THROWS_AS(format.validate(), ConfigError);
}

TEST_CASE("lfsr taps, stepping, and the width-3 reference cycle") {
  const std::vector<int> taps32 = {3, 2};
  CHECK(tap_mask_from_positions(3, taps32) == 0b110);
  CHECK_THROWS_AS(tap_mask_from_positions(3, std::vector<int>{}), ConfigError);
  CHECK_THROWS_AS(tap_mask_from_positions(3, std::vector<int>{4}), ConfigError);
  CHECK_THROWS_AS(tap_mask_from_positions(3, std::vector<int>{0}), ConfigError);
  CHECK_THROWS_AS(make_lfsr(1, std::vector<int>{1}, 1), ConfigError);
  CHECK_THROWS_AS(make_lfsr(33, std::vector<int>{33}, 1), ConfigError);

  // x^3 + x^2 + 1 is maximal: from state 001 the cycle is
  // 2, 5, 3, 7, 6, 4, 1 and the uniform is state / 8.
  Lfsr lfsr;
  lfsr.width = 3;
  lfsr.tap_mask = tap_mask_from_positions(3, taps32);
  lfsr.state = 1;
  const std::uint32_t expected[] = {2, 5, 3, 7, 6, 4, 1};
  for (std::uint32_t want : expected) {
    const LfsrStep step = lfsr_next(lfsr);
    CHECK(step.next.state == want);
    CHECK(step.uniform == doctest::Approx(want / 8.0).epsilon(1e-18));
    CHECK(step.uniform > 0.0);
    CHECK(step.uniform < 1.0);
    lfsr = step.next;
  }

  lfsr.state = 0;
  CHECK_THROWS_AS(lfsr_next(lfsr), InvalidState);
  lfsr.state = 8;
  CHECK_THROWS_AS(lfsr_next(lfsr), InvalidState);
}

TEST_CASE("make_lfsr reduces any seed to a valid state deterministically") {
  const std::vector<int> taps = {5, 3};
  const Lfsr a = make_lfsr(5, taps, 0);
  const Lfsr b = make_lfsr(5, taps, 0);
  CHECK(a.state == b.state);
  CHECK(a.state >= 1);
  CHECK(a.state <= 31);
  std::set<std::uint32_t> states;
  for (std::uint64_t seed = 0; seed < 200; ++seed)
    states.insert(make_lfsr(5, taps, seed).state);
  CHECK(states.size() > 20);  // seeds spread over the 31 possible states
}

TEST_CASE("quantization matches a brute-force nearest-grid oracle") {
  // Hand cases at 8 fraction bits, threshold 0: exact ties go to even.
  ApproxConfig cfg = small_config(8, 8, 0.0, 19, {19, 18, 17, 14});
  const std::vector<double> ties = {3.0 / 512.0, 5.0 / 512.0, 1.0 / 512.0, 1.0};
  const auto units = quantize_weight_units(ties, cfg);
  CHECK(units[0] == 2);   // 1.5 units, tie -> 2
  CHECK(units[1] == 2);   // 2.5 units, tie -> 2
  CHECK(units[2] == 0);   // 0.5 units, tie -> 0
  CHECK(units[3] == 255); // 256 units clamps to the 8-bit ceiling

  // A zero weight stays exactly zero in any format.
  const std::vector<double> with_zero = {1.0, 0.0};
  CHECK(quantize_weight_units(with_zero, cfg)[1] == 0);

  // Randomized sweep over several formats and thresholds.
  std::mt19937_64 rng(42);
  const int specs[][2] = {{8, 8}, {8, 7}, {10, 8}, {5, 3}, {12, 12}, {4, 4}};
  for (const auto& spec : specs) {
    for (double threshold : {0.0, 1.0 / 256.0, 0.25}) {
      ApproxConfig config = small_config(spec[0], spec[1], 0.0, 19, {19, 18, 17, 14});
      const double unit = config.format.unit();
      if (threshold != 0.0 && std::nearbyint(threshold / unit) * unit != threshold)
        continue;  // threshold must sit on the grid
      config.truncation_threshold = threshold;
      std::vector<double> weights(6);
      for (int trial = 0; trial < 40; ++trial) {
        for (double& w : weights) w = uniform01(rng) * 1.2;
        weights[0] = 1.0;  // keep at least one weight above any threshold here
        const auto got = quantize_weight_units(weights, config);
        for (std::size_t i = 0; i < weights.size(); ++i)
          CHECK(got[i] == quantize_oracle(weights[i], config));
      }
    }
  }
}

TEST_CASE("quantization preserves weight ordering") {
  ApproxConfig cfg = small_config(8, 6, 0.0, 19, {19, 18, 17, 14});
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> weights(8);
    for (double& w : weights) w = uniform01(rng);
    std::sort(weights.begin(), weights.end());
    const auto units = quantize_weight_units(weights, cfg);
    for (std::size_t i = 1; i < units.size(); ++i) CHECK(units[i - 1] <= units[i]);
  }
}

TEST_CASE("all-zero quantization is degenerate") {
  // Threshold above the normalized maximum wipes out every weight.
  ApproxConfig cfg = small_config(8, 4, 2.0, 19, {19, 18, 17, 14});
  CHECK_NOTHROW(cfg.validate());
  const std::vector<double> weights = {1.0, 0.5};
  CHECK_THROWS_AS(quantize_weight_units(weights, cfg), DegenerateDistribution);

  const std::vector<double> energies = {0.0, 0.7};
  Lfsr lfsr = make_lfsr(cfg.lfsr_width, cfg.lfsr_taps, 1);
  CHECK_THROWS_AS(sample_approx(energies, 1.0, cfg, lfsr), DegenerateDistribution);

  // The non-throwing core reports the collapse without consuming randomness.
  const std::uint32_t before = lfsr.state;
  ApproxScratch scratch;
  std::size_t index = 99;
  CHECK_FALSE(try_sample_approx(energies, 1.0, cfg, lfsr, scratch, index));
  CHECK(lfsr.state == before);
}

TEST_CASE("approx config validation") {
  ApproxConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.truncation_threshold = 0.3;  // not on the 2^-8 grid
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.truncation_threshold = -0.1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ApproxConfig{};
  cfg.lfsr_seed = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ApproxConfig{};
  cfg.lfsr_width = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ApproxConfig{};
  cfg.lfsr_taps = {19, 20};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("hardware draw matches the exact integer interval logic") {
  // Units (3, 1) via a 2-bit clamp: max weight 1.0 maps to 4 units and is
  // clamped to 3, the second weight 1/3 rounds to 1. Interval boundary at
  // width 9: floor(3 * 512 / 4) = 384.
  ApproxConfig cfg = small_config(2, 2, 0.0, 9, {9, 5});
  const std::vector<double> energies = {0.0, std::log(3.0)};
  const auto counts = effective_hw_counts(energies, 1.0, cfg);
  REQUIRE(counts.size() == 2);
  CHECK(counts[0] == 384);
  CHECK(counts[1] == 511 - 384);

  // Enumerating one full period reproduces those counts integer for integer.
  Lfsr lfsr;
  lfsr.width = 9;
  lfsr.tap_mask = tap_mask_from_positions(9, cfg.lfsr_taps);
  lfsr.state = 1;
  std::vector<std::uint64_t> seen(2, 0);
  std::set<std::uint32_t> visited;
  for (int step = 0; step < 511; ++step) {
    const ApproxDraw draw = sample_approx(energies, 1.0, cfg, lfsr);
    ++seen[draw.index];
    lfsr = draw.lfsr;
    visited.insert(lfsr.state);
  }
  REQUIRE(visited.size() == 511);  // maximal taps, every nonzero state once
  CHECK(seen[0] == counts[0]);
  CHECK(seen[1] == counts[1]);

  const Pmf pmf = effective_hw_pmf(energies, 1.0, cfg);
  CHECK(pmf[0] == doctest::Approx(384.0 / 511.0).epsilon(1e-15));
}

TEST_CASE("singleton support always draws index 0 and still advances") {
  ApproxConfig cfg = small_config(8, 8, 1.0 / 256.0, 9, {9, 5});
  Lfsr lfsr = make_lfsr(9, cfg.lfsr_taps, 7);
  const std::uint32_t before = lfsr.state;
  const std::vector<double> one = {2.5};
  const ApproxDraw draw = sample_approx(one, 1.0, cfg, lfsr);
  CHECK(draw.index == 0);
  CHECK(draw.lfsr.state != before);
}

TEST_CASE("truncated labels have effective probability exactly zero") {
  // exp(-10) is far below 2^-9, so the second label vanishes.
  ApproxConfig cfg = small_config(9, 8, 1.0 / 256.0, 9, {9, 5});
  const std::vector<double> energies = {0.0, 10.0};
  const Pmf pmf = effective_hw_pmf(energies, 1.0, cfg);
  CHECK(pmf[0] == 1.0);
  CHECK(pmf[1] == 0.0);

  Lfsr lfsr = make_lfsr(9, cfg.lfsr_taps, 3);
  for (int i = 0; i < 50; ++i) {
    const ApproxDraw draw = sample_approx(energies, 1.0, cfg, lfsr);
    CHECK(draw.index == 0);
    lfsr = draw.lfsr;
  }
}

TEST_CASE("mismatched lfsr width is rejected") {
  ApproxConfig cfg = small_config(8, 8, 0.0, 19, {19, 18, 17, 14});
  Lfsr narrow = make_lfsr(5, std::vector<int>{5, 3}, 1);
  const std::vector<double> energies = {0.0, 1.0};
  CHECK_THROWS_AS(sample_approx(energies, 1.0, cfg, narrow), InvalidState);
}

TEST_CASE("fine formats converge to the ideal boltzmann distribution") {
  ApproxConfig cfg = small_config(25, 24, 0.0, 19, {19, 18, 17, 14});
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> energies(4);
    for (double& e : energies) e = uniform01(rng) * 5.0;
    const Pmf ideal = pmf_from_energies(energies, 1.0);
    const Pmf effective = effective_hw_pmf(energies, 1.0, cfg);
    for (std::size_t i = 0; i < 4; ++i)
      CHECK(std::abs(effective[i] - ideal[i]) < 0x1.0p-18);
  }
}

TEST_CASE("divergence from the ideal shrinks as precision grows") {
  std::mt19937_64 rng(63);
  const int fraction_bits[] = {4, 6, 8, 12, 16};
  for (int support : {2, 4, 8}) {
    for (int trial = 0; trial < 12; ++trial) {
      std::vector<double> energies(support);
      for (double& e : energies) e = uniform01(rng) * 5.0;
      const Pmf ideal = pmf_from_energies(energies, 1.0);
      double previous = std::numeric_limits<double>::infinity();
      for (int f : fraction_bits) {
        ApproxConfig cfg = small_config(f + 1, f, 0.0, 19, {19, 18, 17, 14});
        const double jsd = js_divergence(ideal, effective_hw_pmf(energies, 1.0, cfg));
        CHECK(jsd <= previous + 1e-15);
        previous = jsd;
      }
    }
  }
}
