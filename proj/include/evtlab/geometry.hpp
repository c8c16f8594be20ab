#pragma once

#include <boost/container/static_vector.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>

#include "evtlab/circle.hpp"

namespace evtlab {

/// A point of a compact interval [lo, hi] with the Euclidean metric. The
/// bounds live in the Geometry, not in the coordinate.
struct IntervalCoord {
  double value{0.0};

  friend constexpr auto operator<=>(IntervalCoord, IntervalCoord) = default;
};

using Coordinate = std::variant<CircleCoord, IntervalCoord>;

/// Built-in systems use one base and at most one fiber coordinate; two per
/// side leaves room for product bases without heap allocation.
inline constexpr std::size_t kMaxAxes = 2;

using CoordVector = boost::container::static_vector<Coordinate, kMaxAxes>;

struct ProductPoint {
  CoordVector base;
  CoordVector fiber;

  [[nodiscard]] std::size_t dimension() const noexcept { return base.size() + fiber.size(); }

  friend bool operator==(const ProductPoint&, const ProductPoint&) = default;
};

enum class AxisKind : std::uint8_t { Circle, Interval };

struct Axis {
  AxisKind kind{AxisKind::Circle};
  double lo{0.0};
  double hi{1.0};

  static constexpr Axis circle() noexcept { return {AxisKind::Circle, 0.0, 1.0}; }
  static constexpr Axis interval(double lo, double hi) noexcept {
    return {AxisKind::Interval, lo, hi};
  }

  friend constexpr bool operator==(const Axis&, const Axis&) = default;
};

using AxisVector = boost::container::static_vector<Axis, kMaxAxes>;

/// Shape of a phase space X x Y: the axes of the base and of the fiber.
struct Geometry {
  AxisVector base;
  AxisVector fiber;

  [[nodiscard]] int base_dimension() const noexcept { return static_cast<int>(base.size()); }
  [[nodiscard]] int fiber_dimension() const noexcept { return static_cast<int>(fiber.size()); }
  [[nodiscard]] int dimension() const noexcept { return base_dimension() + fiber_dimension(); }

  /// True when p has the right axis count and kinds and every interval
  /// coordinate lies inside its bounds.
  [[nodiscard]] bool contains(const ProductPoint& p) const noexcept;

  friend bool operator==(const Geometry&, const Geometry&) = default;
};

[[nodiscard]] inline double coordinate_distance(const Coordinate& a, const Coordinate& b) noexcept {
  if (const auto* ca = std::get_if<CircleCoord>(&a)) {
    return arc_distance(*ca, std::get<CircleCoord>(b));
  }
  return std::abs(std::get<IntervalCoord>(a).value - std::get<IntervalCoord>(b).value);
}

[[nodiscard]] inline double coordinate_value(const Coordinate& c) noexcept {
  if (const auto* cc = std::get_if<CircleCoord>(&c)) return cc->value();
  return std::get<IntervalCoord>(c).value;
}

/// True when p and q have the same number of axes with the same kinds.
[[nodiscard]] bool same_shape(const ProductPoint& p, const ProductPoint& q) noexcept;

/// Squared product distance without shape checks. Hot loops call this after
/// validating shapes once.
[[nodiscard]] inline double squared_distance_unchecked(const ProductPoint& p,
                                                       const ProductPoint& q) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.base.size(); ++i) {
    const double d = coordinate_distance(p.base[i], q.base[i]);
    sum += d * d;
  }
  for (std::size_t i = 0; i < p.fiber.size(); ++i) {
    const double d = coordinate_distance(p.fiber[i], q.fiber[i]);
    sum += d * d;
  }
  return sum;
}

/// d((x1,t1),(x2,t2)) = sqrt(d_X^2 + d_Y^2). Circle axes use arc length,
/// interval axes |dx|, and multi-axis sides combine in the Euclidean way.
/// Throws std::invalid_argument when the shapes differ.
[[nodiscard]] double product_metric(const ProductPoint& p, const ProductPoint& q);

/// As above, additionally requiring both points to belong to `geometry`.
[[nodiscard]] double product_metric(const ProductPoint& p, const ProductPoint& q,
                                    const Geometry& geometry);

/// Distance between the base projections only (d_X).
[[nodiscard]] double base_distance(const ProductPoint& p, const ProductPoint& q);

[[nodiscard]] inline double base_squared_distance_unchecked(const ProductPoint& p,
                                                            const ProductPoint& q) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.base.size(); ++i) {
    const double d = coordinate_distance(p.base[i], q.base[i]);
    sum += d * d;
  }
  return sum;
}

/// Builds a point from real coordinates laid out by `geometry`.
[[nodiscard]] ProductPoint make_point(const Geometry& geometry, std::span<const double> base,
                                      std::span<const double> fiber);

[[nodiscard]] std::string describe(const ProductPoint& p);

}  // namespace evtlab
