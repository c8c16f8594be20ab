#include "evtlab/evt.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "evtlab/rng.hpp"

namespace evtlab {
namespace {

// Generator streams reserved for draws that are not ensemble members.
constexpr std::uint64_t kTargetStream = 0x7461726765740001ULL;
constexpr std::uint64_t kReturnStream = 0x72657475726E0001ULL;

// ∫_a^b sqrt(r^2 - t^2) dt for -r <= a, b <= r; zero when b <= a.
double half_chord_integral(double a, double b, double r) {
  if (b <= a) return 0.0;
  auto g = [r](double t) {
    const double s = std::sqrt(std::max(0.0, r * r - t * t));
    return 0.5 * (t * s + r * r * std::asin(std::clamp(t / r, -1.0, 1.0)));
  };
  return g(b) - g(a);
}

// Area of the disc of radius r about 0 intersected with (-inf, x] x (-inf, y].
double disc_corner_area(double x, double y, double r) {
  const double xr = std::clamp(x, -r, r);
  if (y <= -r || xr <= -r) return 0.0;
  if (y >= r) return 2.0 * half_chord_integral(-r, xr, r);
  const double w = std::sqrt(r * r - y * y);
  // Part of [-r, xr] where the vertical chord crosses the line at height y.
  const double in_lo = -w;
  const double in_hi = std::min(xr, w);
  const double inner_len = std::max(0.0, in_hi - in_lo);
  const double inner = half_chord_integral(in_lo, in_hi, r) + y * inner_len;
  if (y < 0.0) return inner;
  // Outside |t| < w the whole chord lies below y.
  const double outer =
      2.0 * (half_chord_integral(-r, std::min(xr, -w), r) + half_chord_integral(w, xr, r));
  return inner + outer;
}

struct Extent {
  double lo;
  double hi;
};

Extent axis_extent(const Axis& axis, const Coordinate& c) {
  if (axis.kind == AxisKind::Circle) return {-0.5, 0.5};
  const double x = std::get<IntervalCoord>(c).value;
  return {axis.lo - x, axis.hi - x};
}

ProductPoint offset_point(const Geometry& geometry, const ProductPoint& center,
                          std::span<const double> delta, bool& inside) {
  ProductPoint p = center;
  inside = true;
  std::size_t k = 0;
  auto shift = [&](const AxisVector& axes, CoordVector& coords) {
    for (std::size_t i = 0; i < axes.size(); ++i, ++k) {
      if (axes[i].kind == AxisKind::Circle) {
        coords[i] = CircleCoord::from_real(std::get<CircleCoord>(coords[i]).value() + delta[k]);
      } else {
        const double x = std::get<IntervalCoord>(coords[i]).value + delta[k];
        if (x < axes[i].lo || x > axes[i].hi) inside = false;
        coords[i] = IntervalCoord{x};
      }
    }
  };
  shift(geometry.base, p.base);
  shift(geometry.fiber, p.fiber);
  return p;
}

// Uniform point of B_r(center) inside the phase space, by rejection from the cube.
ProductPoint uniform_in_ball(const Geometry& geometry, const ProductPoint& center, double r,
                             CounterRng& rng) {
  const auto dim = static_cast<std::size_t>(geometry.dimension());
  std::vector<double> delta(dim);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    double sq = 0.0;
    for (auto& d : delta) {
      d = r * (2.0 * rng.uniform() - 1.0);
      sq += d * d;
    }
    if (sq >= r * r) continue;
    bool inside = false;
    ProductPoint p = offset_point(geometry, center, delta, inside);
    if (inside) return p;
  }
  throw std::runtime_error("could not sample a point in the target ball");
}

template <class Stepper>
std::uint64_t count_returns(const Stepper& stepper, ProductPoint p, const ProductPoint& target,
                            double r2, std::uint64_t horizon) {
  std::uint64_t hits = 0;
  for (std::uint64_t j = 1; j <= horizon; ++j) {
    if (!stepper(p)) break;
    if (squared_distance_unchecked(p, target) < r2) ++hits;
  }
  return hits;
}

struct ReturnStats {
  std::uint64_t starts{0};
  std::uint64_t returns{0};
};

ReturnStats mean_returns_in_ball(const SystemDescriptor& system, const ProductPoint& target,
                                 double r, std::uint64_t horizon, std::uint64_t starts,
                                 std::uint64_t seed, const Exec& exec) {
  std::vector<std::uint64_t> per_chunk(chunk_count(starts, std::max<std::uint64_t>(exec.chunk, 1)));
  visit_stepper(system, [&](const auto& stepper) {
    parallel_for_chunks(starts, exec, [&](std::uint64_t c, std::uint64_t begin, std::uint64_t end) {
      std::uint64_t local = 0;
      for (std::uint64_t i = begin; i < end; ++i) {
        CounterRng rng(seed, kReturnStream, i);
        const ProductPoint p = uniform_in_ball(system.geometry(), target, r, rng);
        local += count_returns(stepper, p, target, r * r, horizon);
      }
      per_chunk[c] = local;
    });
  });
  ReturnStats out{starts, 0};
  for (auto v : per_chunk) out.returns += v;
  return out;
}

void require_target(const Geometry& geometry, const ProductPoint& target) {
  if (!geometry.contains(target)) {
    throw std::invalid_argument("target " + describe(target) + " outside the phase space");
  }
}

// Visit tallies of ensemble orbits: `window` points per member after burn-in.
std::vector<DensityTally> tally_visits(const SystemDescriptor& system, const Ensemble& ensemble,
                                       std::span<const ProductPoint> targets,
                                       std::span<const double> radii,
                                       const DensityOptions& options, const Exec& exec) {
  check_ensemble(ensemble, system.geometry());
  for (const auto& t : targets) require_target(system.geometry(), t);
  if (options.window < 1) throw std::invalid_argument("density window must be >= 1");
  const std::vector<double> radius_list(radii.begin(), radii.end());
  const std::uint64_t chunks =
      chunk_count(ensemble.count, std::max<std::uint64_t>(exec.chunk, 1));
  std::vector<std::vector<DensityTally>> partial(
      chunks, std::vector<DensityTally>(targets.size(), DensityTally(radius_list)));

  visit_stepper(system, [&](const auto& stepper) {
    parallel_for_chunks(ensemble.count, exec,
                        [&](std::uint64_t c, std::uint64_t begin, std::uint64_t end) {
      auto& tallies = partial[c];
      std::vector<DensityTally::Member> members;
      for (const auto& t : tallies) members.push_back(t.member());
      for (std::uint64_t i = begin; i < end; ++i) {
        ProductPoint p = sample_member(stepper, system.geometry(), ensemble, i, options.burn_in);
        for (auto& m : members) std::fill(m.counts.begin(), m.counts.end(), 0);
        for (std::uint64_t j = 0; j < options.window; ++j) {
          if (j > 0 && !stepper(p)) {
            throw OrbitDiverged(options.burn_in + j - 1, "orbit left the phase space");
          }
          for (std::size_t t = 0; t < targets.size(); ++t) {
            tallies[t].record(members[t], squared_distance_unchecked(p, targets[t]));
          }
        }
        for (std::size_t t = 0; t < targets.size(); ++t) tallies[t].add(members[t]);
      }
    });
  });

  std::vector<DensityTally> total(targets.size(), DensityTally(radius_list));
  for (const auto& chunk : partial) {
    for (std::size_t t = 0; t < targets.size(); ++t) total[t].merge(chunk[t]);
  }
  return total;
}

}  // namespace

// --- scalar pieces ------------------------------------------------------------------

double observable_phi(const ProductPoint& p, const ProductPoint& target) {
  // Same rounding as the hot loops, which never take the square root.
  (void)product_metric(p, target);
  return phi_from_squared(squared_distance_unchecked(p, target));
}

double scaling_un(double v, double n, int dimension) {
  if (!(n >= 1.0)) throw std::invalid_argument(fmt::format("scaling_un: n must be >= 1 (got {})", n));
  if (dimension < 1) throw std::invalid_argument("scaling_un: dimension must be >= 1");
  return v + std::log(n) / dimension;
}

double block_maximum(std::span<const double> phi_values) {
  if (phi_values.empty()) throw std::invalid_argument("block_maximum: empty orbit");
  return *std::max_element(phi_values.begin(), phi_values.end());
}

double block_maximum(std::span<const ProductPoint> orbit, const ProductPoint& target) {
  if (orbit.empty()) throw std::invalid_argument("block_maximum: empty orbit");
  double best = -kInfinity;
  for (const auto& p : orbit) best = std::max(best, observable_phi(p, target));
  return best;
}

double gumbel_limit(double v, double H, int dimension) {
  if (!(H >= 0.0)) throw std::invalid_argument(fmt::format("gumbel_limit: H must be >= 0 (got {})", H));
  if (H == 0.0) return 1.0;
  return std::exp(-H * std::exp(-dimension * v));
}

double unit_ball_volume(int dimension) {
  if (dimension < 0) throw std::invalid_argument("unit_ball_volume: negative dimension");
  const double half = 0.5 * dimension;
  return std::pow(std::numbers::pi, half) / std::tgamma(half + 1.0);
}

double ball_volume(const Geometry& geometry, const ProductPoint& center, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("ball_volume: radius must be positive");
  require_target(geometry, center);
  std::vector<Extent> ext;
  for (std::size_t i = 0; i < geometry.base.size(); ++i) {
    ext.push_back(axis_extent(geometry.base[i], center.base[i]));
  }
  for (std::size_t i = 0; i < geometry.fiber.size(); ++i) {
    ext.push_back(axis_extent(geometry.fiber[i], center.fiber[i]));
  }
  if (ext.size() == 1) return std::max(0.0, std::min(r, ext[0].hi) - std::max(-r, ext[0].lo));
  if (ext.size() == 2) {
    const auto& a = ext[0];
    const auto& b = ext[1];
    return disc_corner_area(a.hi, b.hi, r) - disc_corner_area(a.lo, b.hi, r) -
           disc_corner_area(a.hi, b.lo, r) + disc_corner_area(a.lo, b.lo, r);
  }
  for (const auto& e : ext) {
    if (e.lo > -r || e.hi < r) {
      throw std::domain_error("ball_volume: truncated balls are only supported for D <= 2");
    }
  }
  const auto dim = static_cast<int>(ext.size());
  return unit_ball_volume(dim) * std::pow(r, dim);
}

double ks_distance(std::span<const double> empirical, std::span<const double> theoretical) {
  if (empirical.size() != theoretical.size()) {
    throw std::invalid_argument("ks_distance: curves have different lengths");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < empirical.size(); ++i) {
    worst = std::max(worst, std::abs(empirical[i] - theoretical[i]));
  }
  return worst;
}

ExceedanceCounts exceedance_counts(std::span<const double> phi_values, double u) {
  ExceedanceCounts out;
  for (double x : phi_values) {
    if (x >= u) ++out.hits;
  }
  out.max_indicator = (!phi_values.empty() && block_maximum(phi_values) >= u) ? 1 : 0;
  out.ordered_pairs = out.hits * (out.hits == 0 ? 0 : out.hits - 1);
  return out;
}

std::vector<double> running_maxima(std::span<const double> phi_values) {
  std::vector<double> out;
  out.reserve(phi_values.size());
  double best = -kInfinity;
  for (double x : phi_values) {
    best = std::max(best, x);
    out.push_back(best);
  }
  return out;
}

// --- density -------------------------------------------------------------------------

void check_radii(std::span<const double> radii) {
  if (radii.empty()) throw std::invalid_argument("at least one radius is required");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw std::invalid_argument("radii must be positive");
    if (i > 0 && !(radii[i] < radii[i - 1])) {
      throw std::invalid_argument("radii must be strictly decreasing");
    }
  }
}

DensityTally::DensityTally(std::vector<double> radii)
    : radii_(std::move(radii)), moments_(radii_.size()) {
  for (double r : radii_) {
    squared_.push_back(r * r);
    largest_sq_ = std::max(largest_sq_, r * r);
  }
}

void DensityTally::add(const Member& m) {
  for (std::size_t i = 0; i < moments_.size(); ++i) moments_[i].add(m.counts[i]);
  ++members_;
}

void DensityTally::merge(const DensityTally& other) {
  for (std::size_t i = 0; i < moments_.size(); ++i) moments_[i].merge(other.moments_[i]);
  members_ += other.members_;
}

DensityEstimate DensityTally::estimate(const Geometry& geometry, const ProductPoint& target,
                                       std::uint64_t points_per_member) const {
  DensityEstimate out;
  const auto scale = static_cast<double>(points_per_member);
  for (std::size_t i = 0; i < radii_.size(); ++i) {
    DensityRow row;
    row.radius = radii_[i];
    row.volume = ball_volume(geometry, target, radii_[i]);
    row.visits = moments_[i].sum;
    const MeanError me = count_mean(moments_[i], members_, scale);
    row.mass = me.mean;
    row.estimate = me.mean / row.volume;
    row.error = me.error / row.volume;
    out.rows.push_back(row);
  }
  // Radii are decreasing: scan from the smallest for the first one with visits.
  for (auto it = out.rows.rbegin(); it != out.rows.rend(); ++it) {
    if (it->visits > 0) {
      out.H_hat = it->estimate;
      out.H_hat_error = it->error;
      out.H_hat_radius = it->radius;
      break;
    }
  }
  if (!out.rows.empty() && out.rows.back().visits == 0) {
    if (out.H_hat_radius > 0.0) {
      out.warnings.push_back(fmt::format(
          "no visits within radius {}; widen the radii (H_hat taken at radius {})",
          out.rows.back().radius, out.H_hat_radius));
    } else {
      out.warnings.push_back("no visits within any radius; H_hat set to 0, widen the radii");
    }
  }
  return out;
}

DensityEstimate estimate_local_density(const SystemDescriptor& system, const Ensemble& ensemble,
                                       const ProductPoint& target, std::span<const double> radii,
                                       const DensityOptions& options, const Exec& exec) {
  auto all = density_profile(system, ensemble, std::span(&target, 1), radii, options, exec);
  return std::move(all.front());
}

std::vector<DensityEstimate> density_profile(const SystemDescriptor& system,
                                             const Ensemble& ensemble,
                                             std::span<const ProductPoint> targets,
                                             std::span<const double> radii,
                                             const DensityOptions& options, const Exec& exec) {
  check_radii(radii);
  const auto tallies = tally_visits(system, ensemble, targets, radii, options, exec);
  std::vector<DensityEstimate> out;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    out.push_back(tallies[t].estimate(system.geometry(), targets[t], options.window));
  }
  return out;
}

// --- short-range returns -----------------------------------------------------------------

ShortRangeResult short_range_pair_statistic(const SystemDescriptor& system,
                                            const ProductPoint& target, std::uint64_t n,
                                            double gamma_prime, const Ensemble& ensemble,
                                            const ShortRangeOptions& options, const Exec& exec) {
  if (!(gamma_prime > 0.0)) throw std::invalid_argument("gamma' must be positive");
  if (n < 1) throw std::invalid_argument("short_range_pair_statistic: n must be >= 1");
  require_target(system.geometry(), target);
  ShortRangeResult out;
  const auto nd = static_cast<double>(n);
  out.radius = std::exp(-scaling_un(options.v, nd, system.dimension()));
  out.horizon = snapped_floor(std::pow(nd, gamma_prime));

  const std::vector<double> radius{out.radius};
  const auto tally = tally_visits(system, ensemble, std::span(&target, 1), radius,
                                  {options.burn_in, options.window}, exec);
  out.ball_visits = tally[0].moments(0).sum;
  out.ball_mass = count_mean(tally[0].moments(0), tally[0].members(),
                             static_cast<double>(options.window)).mean;
  if (out.ball_visits == 0 || out.horizon == 0) return out;

  const std::uint64_t starts = options.return_starts > 0 ? options.return_starts : ensemble.count;
  const auto rs = mean_returns_in_ball(system, target, out.radius, out.horizon, starts,
                                       ensemble.seed, exec);
  out.starts = rs.starts;
  out.mean_returns = static_cast<double>(rs.returns) / static_cast<double>(rs.starts);
  out.statistic = nd * out.ball_mass * out.mean_returns;
  return out;
}

std::optional<std::uint64_t> target_short_return(const SystemDescriptor& system,
                                                 const ProductPoint& target, double radius,
                                                 std::uint64_t steps) {
  require_target(system.geometry(), target);
  const double r2 = radius * radius;
  return visit_stepper(system, [&](const auto& stepper) -> std::optional<std::uint64_t> {
    ProductPoint p = target;
    for (std::uint64_t j = 1; j <= steps; ++j) {
      if (!stepper(p)) return std::nullopt;
      if (squared_distance_unchecked(p, target) < r2) return j;
    }
    return std::nullopt;
  });
}

// --- experiment -----------------------------------------------------------------------------

TooManyDiverged::TooManyDiverged(std::uint64_t diverged, std::uint64_t count)
    : std::runtime_error(fmt::format("{} of {} ensemble members diverged (limit 1%)", diverged,
                                     count)),
      diverged_(diverged),
      count_(count) {}

void check_experiment(const EvtExperiment& experiment) {
  check_ensemble(experiment.ensemble, experiment.system.geometry());
  if (experiment.v_grid.empty()) throw std::invalid_argument("v_grid must not be empty");
  for (std::size_t i = 1; i < experiment.v_grid.size(); ++i) {
    if (!(experiment.v_grid[i] > experiment.v_grid[i - 1])) {
      throw std::invalid_argument("v_grid must be strictly increasing");
    }
  }
  for (double v : experiment.v_grid) {
    if (!std::isfinite(v)) throw std::invalid_argument("v_grid values must be finite");
  }
  check_radii(experiment.radii);
  if (experiment.target) require_target(experiment.system.geometry(), *experiment.target);
  if (experiment.short_range && !(experiment.short_range->gamma_prime > 0.0)) {
    throw std::invalid_argument("short_range.gamma_prime must be positive");
  }
}

ProductPoint sample_target(const SystemDescriptor& system, std::uint64_t seed,
                           std::uint64_t burn_in) {
  Ensemble single;
  single.seed = seed;
  single.stream = kTargetStream;
  return sample_member(system, single, 0, burn_in);
}

EvtResult empirical_evt_cdf(const EvtExperiment& experiment, const Exec& exec) {
  check_experiment(experiment);
  const auto& system = experiment.system;
  const auto& geometry = system.geometry();
  const auto& ensemble = experiment.ensemble;

  EvtResult out;
  out.dimension = system.dimension();
  out.burn_in = experiment.burn_in.value_or(system.default_burn_in());
  out.target = experiment.target ? *experiment.target
                                 : sample_target(system, ensemble.seed, out.burn_in);
  const ProductPoint& target = out.target;
  const std::uint64_t n = experiment.n;
  const double n_eff = static_cast<double>(std::max<std::uint64_t>(n, 1));

  std::optional<double> sr_radius;
  if (experiment.short_range) {
    sr_radius = std::exp(-scaling_un(experiment.short_range->v, n_eff, out.dimension));
  }

  const std::uint64_t count = ensemble.count;
  const std::uint64_t chunks = chunk_count(count, std::max<std::uint64_t>(exec.chunk, 1));
  const DensityTally proto(experiment.radii);
  const DensityTally ball_proto(sr_radius ? std::vector<double>{*sr_radius} : std::vector<double>{});
  std::vector<DensityTally> tallies(chunks, proto);
  std::vector<DensityTally> ball_tallies(chunks, ball_proto);
  std::vector<double> min_d2(count, kInfinity);
  std::vector<unsigned char> diverged(count, 0);

  visit_stepper(system, [&](const auto& stepper) {
    parallel_for_chunks(count, exec, [&](std::uint64_t c, std::uint64_t begin, std::uint64_t end) {
      auto& tally = tallies[c];
      auto& ball = ball_tallies[c];
      auto m = tally.member();
      auto mb = ball.member();
      for (std::uint64_t i = begin; i < end; ++i) {
        std::fill(m.counts.begin(), m.counts.end(), 0);
        std::fill(mb.counts.begin(), mb.counts.end(), 0);
        try {
          ProductPoint p = sample_member(stepper, geometry, ensemble, i, out.burn_in);
          double best = kInfinity;
          for (std::uint64_t j = 0;; ++j) {
            const double d2 = squared_distance_unchecked(p, target);
            best = std::min(best, d2);
            tally.record(m, d2);
            ball.record(mb, d2);
            if (j == n) break;
            if (!stepper(p)) throw OrbitDiverged(out.burn_in + j, "orbit left the phase space");
          }
          min_d2[i] = best;
          tally.add(m);
          ball.add(mb);
        } catch (const OrbitDiverged&) {
          diverged[i] = 1;
        }
      }
    });
  });

  for (auto d : diverged) out.diverged += d;
  if (out.diverged * 100 > count) throw TooManyDiverged(out.diverged, count);
  out.members_used = count - out.diverged;

  DensityTally tally(experiment.radii);
  DensityTally ball(ball_proto);
  for (std::uint64_t c = 0; c < chunks; ++c) {
    tally.merge(tallies[c]);
    ball.merge(ball_tallies[c]);
  }
  out.density = tally.estimate(geometry, target, n + 1);
  out.warnings = out.density.warnings;

  out.block_maxima.reserve(out.members_used);
  for (std::uint64_t i = 0; i < count; ++i) {
    if (!diverged[i]) out.block_maxima.push_back(phi_from_squared(min_d2[i]));
  }

  const double effective_H = unit_ball_volume(out.dimension) * out.density.H_hat;
  std::vector<double> emp;
  std::vector<double> theo;
  std::vector<double> unit;
  for (double v : experiment.v_grid) {
    EvtRow row;
    row.v = v;
    row.u_n = scaling_un(v, n_eff, out.dimension);
    std::uint64_t below = 0;
    for (double z : out.block_maxima) {
      if (z < row.u_n) ++below;
    }
    row.empirical = out.members_used == 0
                        ? 0.0
                        : static_cast<double>(below) / static_cast<double>(out.members_used);
    row.theoretical = gumbel_limit(v, effective_H, out.dimension);
    emp.push_back(row.empirical);
    theo.push_back(row.theoretical);
    unit.push_back(gumbel_limit(v, out.density.H_hat, out.dimension));
    out.rows.push_back(row);
  }
  out.ks_distance = ks_distance(emp, theo);
  out.ks_distance_unit_constant = ks_distance(emp, unit);

  if (out.diverged > 0) {
    out.warnings.push_back(
        fmt::format("{} of {} members diverged and were excluded", out.diverged, count));
  }
  const double smallest = experiment.radii.back();
  if (const auto j = target_short_return(system, target, smallest, experiment.short_return_steps)) {
    out.warnings.push_back(fmt::format(
        "target returns within radius {} of itself after {} steps; the limit law may not hold",
        smallest, *j));
  }

  if (experiment.short_range && n >= 1) {
    const auto& req = *experiment.short_range;
    ShortRangeResult sr;
    sr.radius = *sr_radius;
    sr.horizon = snapped_floor(std::pow(n_eff, req.gamma_prime));
    sr.ball_visits = ball.moments(0).sum;
    sr.ball_mass =
        count_mean(ball.moments(0), ball.members(), static_cast<double>(n + 1)).mean;
    if (sr.ball_visits > 0 && sr.horizon > 0) {
      const std::uint64_t starts = req.return_starts > 0 ? req.return_starts : count;
      const auto rs =
          mean_returns_in_ball(system, target, sr.radius, sr.horizon, starts, ensemble.seed, exec);
      sr.starts = rs.starts;
      sr.mean_returns = static_cast<double>(rs.returns) / static_cast<double>(rs.starts);
      sr.statistic = n_eff * sr.ball_mass * sr.mean_returns;
    }
    out.short_range = sr;
  }
  return out;
}

}  // namespace evtlab
