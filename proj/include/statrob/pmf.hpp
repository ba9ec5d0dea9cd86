#ifndef STATROB_PMF_HPP
#define STATROB_PMF_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace statrob {

// A finite discrete probability distribution. Entries are nonnegative and
// sum to one within 1e-12.
class Pmf {
 public:
  static Pmf from_probs(std::vector<double> probs);

  std::size_t support_size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  const std::vector<double>& probs() const { return probs_; }

 private:
  explicit Pmf(std::vector<double> probs) : probs_(std::move(probs)) {}
  std::vector<double> probs_;
};

// Boltzmann conditional: probs[i] = exp(-e_i/T) / sum_j exp(-e_j/T),
// stabilized by max-subtraction so low temperatures cannot overflow.
Pmf pmf_from_energies(std::span<const double> energies, double temperature);

struct KlResult {
  double nats = 0.0;
  // Set when some index has p > 0 and q = 0. Expected data, not an error.
  bool infinite = false;
};

KlResult kl_divergence(const Pmf& p, const Pmf& q);

// Jensen-Shannon divergence in nats; finite for all pairs, in [0, ln 2].
double js_divergence(const Pmf& p, const Pmf& q);

// Inverse-CDF draw: smallest index i with uniform < cumsum(probs, i).
std::size_t sample_exact(const Pmf& pmf, double uniform);

}  // namespace statrob

#endif
