#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "cqtsim/common.hpp"

namespace cqt {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seeded random stream. All stochastic paths in the library draw from one of
/// these, so a run is reproducible from a single integer seed. Independent
/// streams for trial batches come from derive(seed, trial_index).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

  static Rng derive(std::uint64_t seed, std::uint64_t stream) {
    return Rng(splitmix64(splitmix64(seed) ^ (stream + 0x632BE59BD9B4E019ULL)));
  }

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform double in [0, 1). Built from the top 53 bits so the mapping is
  /// identical on every platform.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; consumes exactly two draws.
  double normal() {
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  cplx normal_cplx() {
    double re = normal();
    double im = normal();
    return {re, im};
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace cqt
