#pragma once

#include <cstdint>

namespace bitprob {

// SplitMix64 (Steele, Lea, Vigna). The library's one and only generator:
// 64-bit output per step, reproducible across platforms from the seed alone.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t mix(std::uint64_t x) { return SplitMix64(x).next(); }

 private:
  std::uint64_t state_;
};

// Per-trial seed derivation: trial i of a run with base seed b draws from
// SplitMix64(mix(b + i * golden)). Distinct i give distinct seeds.
inline std::uint64_t trial_seed(std::uint64_t base, std::uint64_t index) {
  return SplitMix64::mix(base + 0x9E3779B97F4A7C15ULL * index);
}

}  // namespace bitprob
