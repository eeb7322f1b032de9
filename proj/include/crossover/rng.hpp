#pragma once

#include <cstdint>

namespace crossover {

// SplitMix64 (Steele, Lea and Flood, 2014). Counter based: the n-th output
// is mix(seed + n * gamma), so a seed fully determines the stream on every
// worker and platform.
class SplitMix64 {
 public:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  constexpr std::uint64_t next() {
    state_ += kGamma;
    return mix(state_);
  }

  // Uniform in [0, 1) with 53 bits of resolution.
  constexpr double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace crossover
