#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "evtlab/geometry.hpp"
#include "evtlab/maps.hpp"
#include "evtlab/parallel.hpp"
#include "evtlab/rng.hpp"

namespace evtlab {

struct OrbitConfig {
  std::uint64_t n{0};
  std::uint64_t burn_in{0};
  std::uint64_t seed{0};
  std::uint64_t stream_id{0};
};

/// Lebesgue-uniform point of the phase space. Circle axes draw exact ticks.
[[nodiscard]] ProductPoint uniform_point(const Geometry& geometry, CounterRng& rng);

/// Applies `steps` steps in place. On escape throws OrbitDiverged whose index
/// is first_index plus the number of successful steps.
template <class Stepper>
void advance(const Stepper& stepper, ProductPoint& p, std::uint64_t steps,
             std::uint64_t first_index = 0) {
  for (std::uint64_t i = 0; i < steps; ++i) {
    if (!stepper(p)) throw OrbitDiverged(first_index + i, "orbit left the phase space");
  }
}

void advance(const SystemDescriptor& system, ProductPoint& p, std::uint64_t steps,
             std::uint64_t first_index = 0);

/// Calls visit(j, point) for j = 0..n, where point 0 is p0 after cfg.burn_in
/// steps. Step indices in OrbitDiverged count from p0, burn-in included.
template <class Visitor>
void iterate(const SystemDescriptor& system, ProductPoint p0, const OrbitConfig& cfg,
             Visitor&& visit) {
  if (!system.geometry().contains(p0)) {
    throw std::invalid_argument("iterate: start point " + describe(p0) +
                                " outside the phase space");
  }
  visit_stepper(system, [&](const auto& stepper) {
    advance(stepper, p0, cfg.burn_in);
    visit(std::uint64_t{0}, std::as_const(p0));
    for (std::uint64_t j = 1; j <= cfg.n; ++j) {
      if (!stepper(p0)) throw OrbitDiverged(cfg.burn_in + j - 1, "orbit left the phase space");
      visit(j, std::as_const(p0));
    }
  });
}

/// As above with p0 drawn uniformly from (cfg.seed, cfg.stream_id).
template <class Visitor>
void iterate(const SystemDescriptor& system, const OrbitConfig& cfg, Visitor&& visit) {
  CounterRng rng(cfg.seed, cfg.stream_id, 0);
  iterate(system, uniform_point(system.geometry(), rng), cfg, std::forward<Visitor>(visit));
}

[[nodiscard]] std::vector<ProductPoint> collect_orbit(const SystemDescriptor& system,
                                                      const ProductPoint& p0,
                                                      const OrbitConfig& cfg);

enum class SamplingMode { LebesgueBurnin, Explicit };

/// Initial points of an experiment. Member i of a Lebesgue ensemble draws from
/// the generator keyed by (seed, stream, i), so it is reproducible on its own.
struct Ensemble {
  std::uint64_t count{1};
  SamplingMode mode{SamplingMode::LebesgueBurnin};
  std::vector<ProductPoint> points;  // Explicit mode only; size == count.
  std::uint64_t seed{0};
  std::uint64_t stream{0};

  [[nodiscard]] CounterRng member_rng(std::uint64_t index) const noexcept {
    return CounterRng(seed, stream, index);
  }
};

/// Draws allowed per member before a Lebesgue start is declared unusable.
inline constexpr int kResampleCap = 16;

void check_ensemble(const Ensemble& ensemble, const Geometry& geometry);

/// Member `index` after burn_in steps. Explicit points are returned as given
/// (burn-in still applied). Lebesgue draws that diverge during burn-in are
/// redrawn from the same generator up to kResampleCap times.
template <class Stepper>
ProductPoint sample_member(const Stepper& stepper, const Geometry& geometry,
                           const Ensemble& ensemble, std::uint64_t index, std::uint64_t burn_in) {
  if (ensemble.mode == SamplingMode::Explicit) {
    ProductPoint p = ensemble.points.at(index);
    advance(stepper, p, burn_in);
    return p;
  }
  CounterRng rng = ensemble.member_rng(index);
  for (int attempt = 0;; ++attempt) {
    ProductPoint p = uniform_point(geometry, rng);
    try {
      advance(stepper, p, burn_in);
      return p;
    } catch (const OrbitDiverged& e) {
      if (attempt + 1 >= kResampleCap) {
        throw OrbitDiverged(e.step(), "ensemble member " + std::to_string(index) +
                                          " diverged during burn-in on every draw");
      }
    }
  }
}

[[nodiscard]] ProductPoint sample_member(const SystemDescriptor& system, const Ensemble& ensemble,
                                         std::uint64_t index, std::uint64_t burn_in);

/// All members of the ensemble after burn-in, in index order.
[[nodiscard]] std::vector<ProductPoint> sample_invariant(const SystemDescriptor& system,
                                                         const Ensemble& ensemble,
                                                         std::uint64_t burn_in,
                                                         const Exec& exec = {});

}  // namespace evtlab
