#pragma once

#include <cstdint>

namespace hybridfl {

// splitmix64 (Steele, Lea, Flood). The algorithm is fixed here so that a
// seed produces the same corpus bytes on every platform and in any future
// reimplementation: 64-bit state, golden-gamma increment, two xor-shift
// multiply finalization rounds.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 bits of randomness.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform-ish in [0, n); the modulo bias is immaterial for the corpus
  // sizes generated here (n far below 2^32).
  std::uint64_t next_below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

  bool chance(double p) { return next_double() < p; }

 private:
  std::uint64_t state_;
};

}  // namespace hybridfl
