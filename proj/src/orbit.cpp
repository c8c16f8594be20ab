#include "evtlab/orbit.hpp"

#include <fmt/format.h>

namespace evtlab {
namespace {

Coordinate uniform_coordinate(const Axis& axis, CounterRng& rng) {
  if (axis.kind == AxisKind::Circle) return CircleCoord::from_ticks(rng.uniform_ticks());
  return IntervalCoord{axis.lo + (axis.hi - axis.lo) * rng.uniform()};
}

}  // namespace

ProductPoint uniform_point(const Geometry& geometry, CounterRng& rng) {
  ProductPoint p;
  for (const auto& axis : geometry.base) p.base.push_back(uniform_coordinate(axis, rng));
  for (const auto& axis : geometry.fiber) p.fiber.push_back(uniform_coordinate(axis, rng));
  return p;
}

void advance(const SystemDescriptor& system, ProductPoint& p, std::uint64_t steps,
             std::uint64_t first_index) {
  visit_stepper(system, [&](const auto& stepper) { advance(stepper, p, steps, first_index); });
}

std::vector<ProductPoint> collect_orbit(const SystemDescriptor& system, const ProductPoint& p0,
                                        const OrbitConfig& cfg) {
  std::vector<ProductPoint> out;
  out.reserve(cfg.n + 1);
  iterate(system, p0, cfg, [&out](std::uint64_t, const ProductPoint& p) { out.push_back(p); });
  return out;
}

void check_ensemble(const Ensemble& ensemble, const Geometry& geometry) {
  if (ensemble.count < 1) throw std::invalid_argument("ensemble count must be >= 1");
  if (ensemble.mode != SamplingMode::Explicit) return;
  if (ensemble.points.size() != ensemble.count) {
    throw std::invalid_argument(fmt::format("explicit ensemble lists {} points but count is {}",
                                            ensemble.points.size(), ensemble.count));
  }
  for (const auto& p : ensemble.points) {
    if (!geometry.contains(p)) {
      throw std::invalid_argument("explicit ensemble point " + describe(p) +
                                  " outside the phase space");
    }
  }
}

ProductPoint sample_member(const SystemDescriptor& system, const Ensemble& ensemble,
                           std::uint64_t index, std::uint64_t burn_in) {
  return visit_stepper(system, [&](const auto& stepper) {
    return sample_member(stepper, system.geometry(), ensemble, index, burn_in);
  });
}

std::vector<ProductPoint> sample_invariant(const SystemDescriptor& system, const Ensemble& ensemble,
                                           std::uint64_t burn_in, const Exec& exec) {
  check_ensemble(ensemble, system.geometry());
  std::vector<ProductPoint> out(ensemble.count);
  visit_stepper(system, [&](const auto& stepper) {
    parallel_for_chunks(ensemble.count, exec,
                        [&](std::uint64_t, std::uint64_t begin, std::uint64_t end) {
                          for (std::uint64_t i = begin; i < end; ++i) {
                            out[i] = sample_member(stepper, system.geometry(), ensemble, i, burn_in);
                          }
                        });
  });
  return out;
}

}  // namespace evtlab
