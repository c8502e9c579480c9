#pragma once

#include <cstdint>
#include <random>

namespace dqsim {

// Deterministic uniform stream. mt19937_64 output is fully specified by the
// standard, and the mappings below avoid std::*_distribution, whose results
// vary across standard library implementations. Every run is reproducible
// from its seed alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(eng_() >> 11) * kInv53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in {0, ..., n-1}.
  int below(int n) {
    int r = static_cast<int>(uniform01() * n);
    return r < n ? r : n - 1;
  }

  // Fair coin from the top bit of one engine draw.
  bool coin() { return (eng_() >> 63) != 0; }

 private:
  static constexpr double kInv53 = 1.0 / 9007199254740992.0;  // 2^-53
  std::mt19937_64 eng_;
};

}  // namespace dqsim
