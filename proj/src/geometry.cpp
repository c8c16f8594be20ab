#include "evtlab/geometry.hpp"

#include <fmt/format.h>

#include <stdexcept>

namespace evtlab {
namespace {

bool axis_holds(const Axis& axis, const Coordinate& c) noexcept {
  if (axis.kind == AxisKind::Circle) return std::holds_alternative<CircleCoord>(c);
  const auto* x = std::get_if<IntervalCoord>(&c);
  return x != nullptr && x->value >= axis.lo && x->value <= axis.hi;
}

bool side_shape_matches(const CoordVector& a, const CoordVector& b) noexcept {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].index() != b[i].index()) return false;
  }
  return true;
}

Coordinate coordinate_for(const Axis& axis, double value) {
  if (axis.kind == AxisKind::Circle) return CircleCoord::from_real(value);
  if (!(value >= axis.lo && value <= axis.hi)) {
    throw std::invalid_argument(
        fmt::format("coordinate {} outside interval [{}, {}]", value, axis.lo, axis.hi));
  }
  return IntervalCoord{value};
}

}  // namespace

bool Geometry::contains(const ProductPoint& p) const noexcept {
  if (p.base.size() != base.size() || p.fiber.size() != fiber.size()) return false;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (!axis_holds(base[i], p.base[i])) return false;
  }
  for (std::size_t i = 0; i < fiber.size(); ++i) {
    if (!axis_holds(fiber[i], p.fiber[i])) return false;
  }
  return true;
}

bool same_shape(const ProductPoint& p, const ProductPoint& q) noexcept {
  return side_shape_matches(p.base, q.base) && side_shape_matches(p.fiber, q.fiber);
}

double product_metric(const ProductPoint& p, const ProductPoint& q) {
  if (!same_shape(p, q)) throw std::invalid_argument("product_metric: mismatched geometry");
  return std::sqrt(squared_distance_unchecked(p, q));
}

double product_metric(const ProductPoint& p, const ProductPoint& q, const Geometry& geometry) {
  if (!geometry.contains(p) || !geometry.contains(q)) {
    throw std::invalid_argument("product_metric: point does not belong to the geometry");
  }
  return std::sqrt(squared_distance_unchecked(p, q));
}

double base_distance(const ProductPoint& p, const ProductPoint& q) {
  if (!side_shape_matches(p.base, q.base)) {
    throw std::invalid_argument("base_distance: mismatched geometry");
  }
  return std::sqrt(base_squared_distance_unchecked(p, q));
}

ProductPoint make_point(const Geometry& geometry, std::span<const double> base,
                        std::span<const double> fiber) {
  if (base.size() != geometry.base.size() || fiber.size() != geometry.fiber.size()) {
    throw std::invalid_argument(fmt::format(
        "point needs {} base and {} fiber coordinates, got {} and {}", geometry.base.size(),
        geometry.fiber.size(), base.size(), fiber.size()));
  }
  ProductPoint p;
  for (std::size_t i = 0; i < base.size(); ++i) p.base.push_back(coordinate_for(geometry.base[i], base[i]));
  for (std::size_t i = 0; i < fiber.size(); ++i) {
    p.fiber.push_back(coordinate_for(geometry.fiber[i], fiber[i]));
  }
  return p;
}

std::string describe(const ProductPoint& p) {
  std::string out = "(";
  auto append = [&out](const CoordVector& side) {
    for (std::size_t i = 0; i < side.size(); ++i) {
      if (i != 0) out += ", ";
      out += fmt::format("{:.17g}", coordinate_value(side[i]));
    }
  };
  append(p.base);
  if (!p.fiber.empty()) {
    out += "; ";
    append(p.fiber);
  }
  out += ")";
  return out;
}

}  // namespace evtlab
