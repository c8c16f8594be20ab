#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>

namespace evtlab {

/// Modulus of the fixed-point circle, 2^64 - 59 (the largest 64-bit prime).
///
/// A circle coordinate is an integer k in [0, P) standing for the real k/P.
/// Linear expanding maps x -> d*x mod 1 become k -> d*k mod P, which is exact,
/// so orbits never collapse onto 0 the way they do in binary floating point.
inline constexpr std::uint64_t kCircleModulus = 0xFFFFFFFFFFFFFFC5ULL;

// Tick-to-real scale. 1/P and 2^-64 differ by a relative 3.2e-18, far below
// double resolution.
inline constexpr double kTickToReal = 0x1p-64;

namespace detail {

__extension__ typedef unsigned __int128 u128;

// 2^64 = P + 59, so hi * 2^64 + lo == hi * 59 + lo (mod P).
inline constexpr std::uint64_t kFold = 59;

constexpr std::uint64_t reduce128(u128 t) noexcept {
  while (t >> 64) {
    t = static_cast<u128>(static_cast<std::uint64_t>(t >> 64)) * kFold +
        static_cast<std::uint64_t>(t);
  }
  auto r = static_cast<std::uint64_t>(t);
  return r >= kCircleModulus ? r - kCircleModulus : r;
}

}  // namespace detail

constexpr std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b) noexcept {
  return detail::reduce128(static_cast<detail::u128>(a) * b);
}

/// a + b mod P for reduced operands.
constexpr std::uint64_t add_mod(std::uint64_t a, std::uint64_t b) noexcept {
  const std::uint64_t s = a + b;
  // On wraparound the true sum is s + 2^64, and s + 2^64 - P == s + 59.
  if (s < a || s >= kCircleModulus) return s - kCircleModulus;
  return s;
}

constexpr std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp) noexcept {
  std::uint64_t result = 1;
  base = detail::reduce128(base);
  while (exp != 0) {
    if (exp & 1U) result = mul_mod(result, base);
    base = mul_mod(base, base);
    exp >>= 1U;
  }
  return result;
}

class CircleCoord {
 public:
  constexpr CircleCoord() = default;

  static constexpr CircleCoord from_ticks(std::uint64_t ticks) noexcept {
    return CircleCoord(detail::reduce128(ticks));
  }

  /// Tick for x mod 1. Uses the same 2^64 scale as value(), so
  /// from_real(x).value() == x for every double x in [0, 1).
  static CircleCoord from_real(double x) noexcept {
    const double y = x - std::floor(x);
    if (!(y >= 0.0) || y >= 1.0) return CircleCoord{};
    return CircleCoord(static_cast<std::uint64_t>(y * 0x1p64));
  }

  /// Nearest tick to num/den mod 1 (den > 0).
  static constexpr CircleCoord from_rational(std::int64_t num, std::uint64_t den) noexcept {
    const auto sden = static_cast<detail::u128>(den);
    std::int64_t rem = num % static_cast<std::int64_t>(den);
    if (rem < 0) rem += static_cast<std::int64_t>(den);
    const detail::u128 t = (static_cast<detail::u128>(rem) * kCircleModulus + sden / 2) / sden;
    return CircleCoord(t >= kCircleModulus ? 0 : static_cast<std::uint64_t>(t));
  }

  [[nodiscard]] constexpr std::uint64_t ticks() const noexcept { return ticks_; }

  /// Real value in [0, 1), accurate to one double ulp. Values that round to
  /// 1.0 are clamped to the largest double below 1.
  [[nodiscard]] double value() const noexcept {
    return std::min(static_cast<double>(ticks_) * kTickToReal, 0x1.fffffffffffffp-1);
  }

  friend constexpr auto operator<=>(CircleCoord, CircleCoord) = default;

 private:
  explicit constexpr CircleCoord(std::uint64_t ticks) : ticks_(ticks) {}

  std::uint64_t ticks_{0};
};

/// Arc length between two circle points, min(|a - b|, 1 - |a - b|), exact in
/// ticks and converted to double once. Zero iff the points coincide.
inline double arc_distance(CircleCoord a, CircleCoord b) noexcept {
  const std::uint64_t diff = a.ticks() >= b.ticks() ? a.ticks() - b.ticks() : b.ticks() - a.ticks();
  const std::uint64_t arc = std::min(diff, kCircleModulus - diff);
  return static_cast<double>(arc) * kTickToReal;
}

constexpr CircleCoord rotate(CircleCoord x, CircleCoord by) noexcept {
  return CircleCoord::from_ticks(add_mod(x.ticks(), by.ticks()));
}

}  // namespace evtlab
