#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "statrob/errors.hpp"
#include "statrob/metrics.hpp"
#include "statrob/rng.hpp"

using namespace statrob;

namespace {

std::vector<double> ar1_series(double rho, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> series(n);
  double x = 0.0;
  for (int i = 0; i < 200; ++i) x = rho * x + standard_normal(rng);  // warm up
  for (int i = 0; i < n; ++i) {
    x = rho * x + standard_normal(rng);
    series[i] = x;
  }
  return series;
}

// Builds a trace whose pixel series are the given columns.
ChainTrace trace_from_series(const std::vector<std::vector<double>>& pixels) {
  ChainTrace trace;
  trace.height = 1;
  trace.width = static_cast<int>(pixels.size());
  trace.labels = 256;
  trace.window = static_cast<int>(pixels[0].size());
  trace.samples.resize(pixels.size() * pixels[0].size());
  for (int t = 0; t < trace.window; ++t)
    for (std::size_t p = 0; p < pixels.size(); ++p)
      trace.samples[static_cast<std::size_t>(t) * pixels.size() + p] =
          static_cast<std::uint8_t>(pixels[p][t]);
  return trace;
}

LabelMap map_from(int width, int height, std::vector<std::uint8_t> labels) {
  LabelMap map;
  map.width = width;
  map.height = height;
  map.labels = std::move(labels);
  return map;
}

}  // namespace

TEST_CASE("ess recovers the sample count on independent draws") {
  double total = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> series(10000);
    for (double& x : series) x = uniform01(rng);
    const auto value = ess(series);
    REQUIRE(value.has_value());
    total += *value;
  }
  const double mean = total / 20.0;
  CHECK(mean > 9000.0);
  CHECK(mean < 11000.0);
}

TEST_CASE("ess tracks the analytic autocorrelated-chain value") {
  // AR(1) with coefficient rho has ESS/N -> (1 - rho) / (1 + rho).
  const auto series = ar1_series(0.5, 100000, 77);
  const auto value = ess(series);
  REQUIRE(value.has_value());
  const double ratio = *value / series.size();
  CHECK(ratio > (1.0 / 3.0) * 0.88);
  CHECK(ratio < (1.0 / 3.0) * 1.12);
}

TEST_CASE("ess edge cases") {
  const std::vector<double> constant(50, 3.0);
  CHECK_FALSE(ess(constant).has_value());

  // A perfectly alternating series fails the first positive-pair test, so
  // the sum truncates immediately and the clamp leaves ESS at N.
  std::vector<double> alternating(100);
  for (int i = 0; i < 100; ++i) alternating[i] = i % 2;
  const auto alt = ess(alternating);
  REQUIRE(alt.has_value());
  CHECK(*alt == doctest::Approx(100.0));

  CHECK_THROWS_AS(ess(std::vector<double>(9, 1.0)), InsufficientData);

  // Positive affine maps leave autocorrelations, and so ESS, unchanged.
  const auto base = ar1_series(0.8, 5000, 3);
  std::vector<double> scaled(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) scaled[i] = 2.5 * base[i] + 17.0;
  CHECK(*ess(scaled) == doctest::Approx(*ess(base)).epsilon(1e-9));
}

TEST_CASE("active region keys on hardware variance only") {
  // pixel 0: frozen in one hardware run; pixel 1: always moving;
  // pixel 2: frozen in software only.
  const auto sw = trace_from_series({{0, 1, 2}, {1, 0, 1}, {5, 5, 5}});
  const auto hw1 = trace_from_series({{3, 3, 3}, {0, 1, 0}, {1, 2, 1}});
  const auto hw2 = trace_from_series({{0, 2, 0}, {2, 2, 1}, {0, 3, 0}});

  const ChainTrace* sw_list[] = {&sw};
  const ChainTrace* hw_list[] = {&hw1, &hw2};
  const auto mask = active_region(sw_list, hw_list);
  REQUIRE(mask.size() == 3);
  CHECK(mask[0] == 0);
  CHECK(mask[1] == 1);
  CHECK(mask[2] == 1);

  const auto small = trace_from_series({{0, 1, 2}});
  const ChainTrace* bad_list[] = {&small};
  CHECK_THROWS_AS(active_region(sw_list, bad_list), ShapeMismatch);
  CHECK_THROWS_AS(active_region(sw_list, std::span<const ChainTrace* const>{}),
                  InsufficientData);
}

TEST_CASE("gelman-rubin matches the hand-computed fixture") {
  // Two chains alternating {0,1} and {1,2}: chain means 0.5 and 1.5,
  // within-chain variance 5/18 each, B = 10 * 0.5 = 5,
  // rhat = sqrt((0.9 * 5/18 + 0.5) / (5/18)) = sqrt(2.7).
  std::vector<std::vector<double>> chains(2);
  for (int i = 0; i < 10; ++i) {
    chains[0].push_back(i % 2);
    chains[1].push_back(1 + i % 2);
  }
  const RhatRecord record = gelman_rubin(chains);
  CHECK(record.between == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(record.within == doctest::Approx(5.0 / 18.0).epsilon(1e-14));
  REQUIRE(record.rhat.has_value());
  CHECK(*record.rhat == doctest::Approx(std::sqrt(2.7)).epsilon(1e-14));
  CHECK(record.verdict == GrVerdict::NotConverged);

  // Swapping chain order changes nothing.
  std::swap(chains[0], chains[1]);
  const RhatRecord swapped = gelman_rubin(chains);
  CHECK(swapped.between == doctest::Approx(record.between).epsilon(1e-14));
  CHECK(*swapped.rhat == doctest::Approx(*record.rhat).epsilon(1e-14));
}

TEST_CASE("gelman-rubin frozen-chain conventions") {
  const std::vector<std::vector<double>> same(3, std::vector<double>(12, 4.0));
  const RhatRecord converged = gelman_rubin(same);
  CHECK(converged.between == 0.0);
  CHECK(converged.within == 0.0);
  CHECK_FALSE(converged.rhat.has_value());
  CHECK(converged.verdict == GrVerdict::Converged);

  std::vector<std::vector<double>> split = same;
  split[2].assign(12, 9.0);
  const RhatRecord stuck = gelman_rubin(split);
  CHECK(stuck.between > 0.0);
  CHECK(stuck.within == 0.0);
  CHECK_FALSE(stuck.rhat.has_value());
  CHECK(stuck.verdict == GrVerdict::NotConverged);

  CHECK_THROWS_AS(gelman_rubin({std::vector<double>(12, 1.0)}), InsufficientChains);
  CHECK_THROWS_AS(gelman_rubin(std::vector<std::vector<double>>(2, std::vector<double>(9, 1.0))),
                  InsufficientData);
  std::vector<std::vector<double>> ragged = {std::vector<double>(12, 1.0),
                                             std::vector<double>(11, 1.0)};
  CHECK_THROWS_AS(gelman_rubin(ragged), ShapeMismatch);
}

TEST_CASE("gelman-rubin approaches one on well-mixed chains") {
  std::vector<std::vector<double>> chains(4, std::vector<double>(10000));
  for (std::uint64_t j = 0; j < 4; ++j) {
    std::mt19937_64 rng(derive_seed(2718, j));
    for (double& x : chains[j]) x = standard_normal(rng);
  }
  const RhatRecord record = gelman_rubin(chains);
  REQUIRE(record.rhat.has_value());
  CHECK(*record.rhat < 1.01);
  CHECK(record.verdict == GrVerdict::Converged);
}

TEST_CASE("rhat field reduces to per-pixel gelman-rubin") {
  const auto t1 = trace_from_series({{0, 1, 0, 1, 0, 1, 0, 1, 0, 1},
                                     {2, 2, 2, 2, 2, 2, 2, 2, 2, 2}});
  const auto t2 = trace_from_series({{1, 2, 1, 2, 1, 2, 1, 2, 1, 2},
                                     {2, 2, 2, 2, 2, 2, 2, 2, 2, 2}});
  const ChainTrace* traces[] = {&t1, &t2};
  const auto field = rhat_field(traces);
  REQUIRE(field.size() == 2);
  CHECK(field[0].between == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(*field[0].rhat == doctest::Approx(std::sqrt(2.7)).epsilon(1e-14));
  CHECK(field[1].verdict == GrVerdict::Converged);  // frozen at one value

  CHECK_THROWS_AS(rhat_field(std::span<const ChainTrace* const>(traces, 1)),
                  InsufficientChains);

  const auto converged = convergence_percentage(field);
  CHECK(converged == doctest::Approx(50.0));
  CHECK_THROWS_AS(convergence_percentage({}), InvalidInput);
}

TEST_CASE("reference mode is the per-pixel majority with low-label ties") {
  const LabelMap a = map_from(2, 1, {2, 1});
  const LabelMap b = map_from(2, 1, {2, 4});
  const LabelMap c = map_from(2, 1, {5, 4});
  const std::vector<LabelMap> maps = {a, b, c};
  const LabelMap mode = reference_mode(maps);
  CHECK(mode.at(0, 0) == 2);  // {2,2,5}
  CHECK(mode.at(0, 1) == 4);  // {1,4,4}

  const std::vector<LabelMap> pair = {a, c};
  const LabelMap tie = reference_mode(pair);
  CHECK(tie.at(0, 0) == 2);  // {2,5} splits toward the smaller label
  CHECK(tie.at(0, 1) == 1);  // {1,4}

  const std::vector<LabelMap> lone = {c};
  CHECK(reference_mode(lone).labels == c.labels);

  const std::vector<LabelMap> mixed = {a, map_from(1, 2, {0, 0})};
  CHECK_THROWS_AS(reference_mode(mixed), ShapeMismatch);
  CHECK_THROWS_AS(reference_mode(std::vector<LabelMap>{}), InsufficientData);
}

TEST_CASE("r squared follows the textbook definition") {
  const LabelMap reference = map_from(2, 2, {0, 2, 2, 4});
  const LabelMap result = map_from(2, 2, {0, 2, 4, 4});
  const auto half = r_squared(result, reference);
  REQUIRE(half.has_value());
  CHECK(*half == doctest::Approx(0.5).epsilon(1e-15));

  CHECK(*r_squared(reference, reference) == doctest::Approx(1.0));

  const LabelMap at_mean = map_from(2, 2, {2, 2, 2, 2});
  CHECK(*r_squared(at_mean, reference) == doctest::Approx(0.0));

  // Far-off results drive R^2 negative; it is not clamped.
  const LabelMap far = map_from(2, 2, {9, 9, 0, 9});
  CHECK(*r_squared(far, reference) < 0.0);

  CHECK_FALSE(r_squared(result, at_mean).has_value());  // constant reference
  CHECK_THROWS_AS(r_squared(result, map_from(1, 2, {0, 1})), ShapeMismatch);
}

TEST_CASE("ks statistic handles ties and singleton samples") {
  const std::vector<double> a = {1.0, 2.0, 3.0};
  const std::vector<double> b = {1.5};
  CHECK(ks_statistic(a, b) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(ks_statistic(b, a) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  const std::vector<double> ta = {1.0, 1.0, 2.0};
  const std::vector<double> tb = {1.0, 2.0, 2.0};
  CHECK(ks_statistic(ta, tb) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  CHECK(ks_statistic(a, a) == doctest::Approx(0.0));
  CHECK_THROWS_AS(ks_statistic(a, {}), InsufficientData);
}

TEST_CASE("ks permutation test is seeded, symmetric, and calibrated at the edges") {
  const std::vector<double> same = {0.1, 0.4, 0.4, 0.7, 0.9};
  const KsResult null_result = ks_permutation_test(same, same, 300, 5);
  CHECK(null_result.statistic == doctest::Approx(0.0));
  CHECK(null_result.p_value == doctest::Approx(1.0));
  CHECK(null_result.permutations == 300);

  std::vector<double> low(10), high(10);
  for (int i = 0; i < 10; ++i) {
    low[i] = 0.01 * i;
    high[i] = 0.9 + 0.01 * i;
  }
  const KsResult split = ks_permutation_test(low, high, 500, 11);
  CHECK(split.statistic == doctest::Approx(1.0));
  CHECK(split.p_value <= 3.0 / 501.0);  // near the add-one floor
  CHECK(split.p_value > 0.0);

  const KsResult again = ks_permutation_test(low, high, 500, 11);
  CHECK(again.p_value == split.p_value);
  const KsResult flipped = ks_permutation_test(high, low, 500, 11);
  CHECK(flipped.statistic == doctest::Approx(split.statistic));

  CHECK_THROWS_AS(ks_permutation_test(low, high, 99, 1), InvalidInput);
  CHECK_THROWS_AS(ks_permutation_test(std::vector<double>{1.0}, high, 200, 1),
                  InsufficientData);
}

TEST_CASE("ess summary separates excluded and inactive pixels") {
  std::vector<double> frozen(40, 2.0);
  std::vector<double> cycling(40), swinging(40);
  for (int i = 0; i < 40; ++i) {
    cycling[i] = i % 4;
    swinging[i] = 2 * (i % 2);
  }
  const ChainTrace trace = trace_from_series({frozen, cycling, swinging});

  const std::vector<std::uint8_t> mask = {1, 0, 1};
  const EssSummary summary = ess_summary(trace, mask);
  CHECK(summary.excluded == 1);
  REQUIRE(summary.per_rv.size() == 3);
  CHECK_FALSE(summary.per_rv[0].has_value());
  REQUIRE(summary.per_rv[1].has_value());
  REQUIRE(summary.per_rv[2].has_value());

  const double e1 = *ess(cycling);
  const double e2 = *ess(swinging);
  REQUIRE(summary.mean_overall.has_value());
  CHECK(*summary.mean_overall == doctest::Approx((e1 + e2) / 2.0).epsilon(1e-12));
  REQUIRE(summary.mean_active.has_value());
  CHECK(*summary.mean_active == doctest::Approx(e2).epsilon(1e-12));

  // Every pixel frozen: nothing is scoreable.
  const ChainTrace dead = trace_from_series({frozen, frozen});
  const std::vector<std::uint8_t> mask2 = {1, 1};
  const EssSummary empty = ess_summary(dead, mask2);
  CHECK(empty.excluded == 2);
  CHECK_FALSE(empty.mean_overall.has_value());
  CHECK_FALSE(empty.mean_active.has_value());

  CHECK_THROWS_AS(ess_summary(trace, std::vector<std::uint8_t>(2, 1)), ShapeMismatch);
}
