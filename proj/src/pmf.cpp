#include "statrob/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "statrob/errors.hpp"

namespace statrob {

namespace {
constexpr double kSumTolerance = 1e-12;
}

Pmf Pmf::from_probs(std::vector<double> probs) {
  if (probs.empty()) throw InvalidInput("pmf: empty support");
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0)
      throw InvalidInput("pmf: entries must be finite and >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance)
    throw InvalidInput("pmf: entries sum to " + std::to_string(sum) +
                       ", expected 1");
  return Pmf(std::move(probs));
}

Pmf pmf_from_energies(std::span<const double> energies, double temperature) {
  if (energies.empty()) throw InvalidInput("pmf_from_energies: empty input");
  if (!(temperature > 0.0))
    throw InvalidInput("pmf_from_energies: temperature must be > 0");
  double min_e = energies[0];
  for (double e : energies) {
    if (!std::isfinite(e))
      throw InvalidInput("pmf_from_energies: non-finite energy");
    min_e = std::min(min_e, e);
  }
  std::vector<double> probs(energies.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    probs[i] = std::exp(-(energies[i] - min_e) / temperature);
    sum += probs[i];
  }
  for (double& p : probs) p /= sum;
  return Pmf::from_probs(std::move(probs));
}

KlResult kl_divergence(const Pmf& p, const Pmf& q) {
  if (p.support_size() != q.support_size())
    throw ShapeMismatch("kl_divergence: support sizes differ");
  KlResult result;
  for (std::size_t i = 0; i < p.support_size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) {
      result.infinite = true;
      result.nats = 0.0;
      return result;
    }
    result.nats += p[i] * std::log(p[i] / q[i]);
  }
  return result;
}

double js_divergence(const Pmf& p, const Pmf& q) {
  if (p.support_size() != q.support_size())
    throw ShapeMismatch("js_divergence: support sizes differ");
  // Expanded 0.5*KL(p||m) + 0.5*KL(q||m); m has mass wherever p or q does,
  // so every term is finite.
  double acc = 0.0;
  for (std::size_t i = 0; i < p.support_size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) acc += 0.5 * p[i] * std::log(p[i] / m);
    if (q[i] > 0.0) acc += 0.5 * q[i] * std::log(q[i] / m);
  }
  return std::max(acc, 0.0);
}

std::size_t sample_exact(const Pmf& pmf, double uniform) {
  if (!(uniform >= 0.0 && uniform < 1.0))
    throw InvalidInput("sample_exact: uniform must lie in [0, 1)");
  double cum = 0.0;
  const std::size_t n = pmf.support_size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    cum += pmf[i];
    if (uniform < cum) return i;
  }
  return n - 1;
}

}  // namespace statrob
