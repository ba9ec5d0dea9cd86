#ifndef STATROB_RNG_HPP
#define STATROB_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace statrob {

// splitmix64: cheap stateless mixer used to derive independent sub-seeds
// from one experiment seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream));
}

// Uniform double in [0, 1) with 53 random bits. std::mt19937_64 output is
// fully specified by the standard; the distribution adapters are not, so we
// map bits to doubles ourselves to keep runs reproducible across toolchains.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, n) by rejection.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % n;
}

// Standard normal via Box-Muller on explicitly constructed uniforms.
inline double standard_normal(std::mt19937_64& rng) {
  // u1 in (0, 1], u2 in [0, 1)
  const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace statrob

#endif
