#pragma once

#include <cstdint>

namespace bridgelab {

// SplitMix64 (Steele, Lea, Flood 2014). Every random choice in the engine and
// the agents draws from this generator so that the host and any guest runtime
// produce identical streams from the same seed.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform-ish index in [0, n); n must be non-zero. Plain modulo, so guests
  // can reproduce it without a rejection loop.
  constexpr std::uint64_t below(std::uint64_t n) noexcept { return next() % n; }

  constexpr std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace bridgelab
