#pragma once

#include <cstdint>

#include "evtlab/circle.hpp"

namespace evtlab {

/// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kStreamGamma = 0xD1B54A32D192ED03ULL;

/// Key of the generator for (master seed, stream, index). For a fixed master
/// and stream the map index -> key is injective, so members never share a
/// sequence.
constexpr std::uint64_t derive_key(std::uint64_t master, std::uint64_t stream,
                                   std::uint64_t index) noexcept {
  const std::uint64_t s = mix64(mix64(master + kGoldenGamma) + stream * kStreamGamma);
  return mix64(s + index * kGoldenGamma);
}

/// Counter-based generator: draw i is mix64(key + (i + 1) * gamma). Cheap to
/// construct, so every ensemble member gets its own.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}
  constexpr CounterRng(std::uint64_t master, std::uint64_t stream, std::uint64_t index) noexcept
      : key_(derive_key(master, stream, index)) {}

  constexpr std::uint64_t next() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGoldenGamma);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1p-53; }

  /// Uniform tick in [0, P), by rejection (accepts with probability 1 - 3e-18).
  constexpr std::uint64_t uniform_ticks() noexcept {
    for (;;) {
      const std::uint64_t u = next();
      if (u < kCircleModulus) return u;
    }
  }

  [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }
  [[nodiscard]] constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_{0};
};

}  // namespace evtlab
