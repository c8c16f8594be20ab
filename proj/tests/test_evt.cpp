#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "evtlab/evt.hpp"

using namespace evtlab;

namespace {

ProductPoint circle2(double x, double t) {
  ProductPoint p;
  p.base.push_back(CircleCoord::from_real(x));
  p.fiber.push_back(CircleCoord::from_real(t));
  return p;
}

SystemDescriptor flagship() {
  return SystemDescriptor(CircleExtensionParams{LinearExpandingParams{3}, CocycleSpec::linear()});
}

SystemDescriptor trig_extension(std::uint64_t d = 2) {
  return SystemDescriptor(
      CircleExtensionParams{LinearExpandingParams{d}, CocycleSpec::trigonometric(0.3)});
}

// Fraction of a grid over the chart around `center` that lies in the ball.
double grid_volume(const Geometry& g, const ProductPoint& center, double r, int cells) {
  std::vector<double> lo, hi;
  auto chart = [&](const AxisVector& axes, const CoordVector& c) {
    for (std::size_t i = 0; i < axes.size(); ++i) {
      if (axes[i].kind == AxisKind::Circle) {
        const double x = coordinate_value(c[i]);
        lo.push_back(x - 0.5);
        hi.push_back(x + 0.5);
      } else {
        lo.push_back(axes[i].lo);
        hi.push_back(axes[i].hi);
      }
    }
  };
  chart(g.base, center.base);
  chart(g.fiber, center.fiber);
  std::vector<double> c;
  for (const auto& x : center.base) c.push_back(coordinate_value(x));
  for (const auto& x : center.fiber) c.push_back(coordinate_value(x));
  const std::size_t D = lo.size();
  double cell = 1.0;
  for (std::size_t k = 0; k < D; ++k) cell *= (hi[k] - lo[k]) / cells;
  std::uint64_t inside = 0;
  std::vector<int> idx(D, 0);
  for (;;) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < D; ++k) {
      const double x = lo[k] + (hi[k] - lo[k]) * (idx[k] + 0.5) / cells;
      d2 += (x - c[k]) * (x - c[k]);
    }
    inside += d2 < r * r;
    std::size_t k = 0;
    while (k < D && ++idx[k] == cells) idx[k++] = 0;
    if (k == D) break;
  }
  return static_cast<double>(inside) * cell;
}

}  // namespace

TEST_CASE("observable examples") {
  const auto a = circle2(0.0, 0.0);
  CHECK(observable_phi(a, a) == kInfinity);
  ProductPoint p, q;
  p.base.push_back(IntervalCoord{0.0});
  q.base.push_back(IntervalCoord{1.0});
  CHECK(observable_phi(p, q) == 0.0);
  q.base[0] = IntervalCoord{std::exp(-3.0)};
  CHECK(observable_phi(p, q) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK_THROWS_AS((void)observable_phi(p, a), std::invalid_argument);
}

TEST_CASE("scaling examples") {
  CHECK(scaling_un(0.0, 1, 2) == 0.0);
  CHECK(scaling_un(0.0, 100, 2) == doctest::Approx(2.302585093).epsilon(1e-10));
  CHECK(scaling_un(1.0, std::exp(2.0), 1) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK_THROWS_AS((void)scaling_un(0.0, 0.5, 2), std::invalid_argument);
  CHECK_THROWS_AS((void)scaling_un(0.0, 10, 0), std::invalid_argument);
}

TEST_CASE("block maximum examples") {
  const std::vector<double> one{2.5};
  CHECK(block_maximum(one) == 2.5);
  const std::vector<double> vals{1.0, 5.0, 3.0};
  CHECK(block_maximum(vals) == 5.0);
  CHECK_THROWS_AS((void)block_maximum(std::span<const double>{}), std::invalid_argument);

  // Base-only doubling orbit whose second point is the target itself.
  const SystemDescriptor doubling(LinearExpandingParams{2});
  ProductPoint x0;
  x0.base.push_back(CircleCoord::from_rational(1, 3));
  const auto orbit = collect_orbit(doubling, x0, {2, 0, 0, 0});
  const ProductPoint target = orbit[1];
  CHECK(product_metric(orbit[0], target) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(product_metric(orbit[2], target) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(block_maximum(orbit, target) == kInfinity);
}

TEST_CASE("block maximum is a permutation-invariant max") {
  std::mt19937_64 gen(17);
  std::exponential_distribution<double> expo(1.0);
  for (int t = 0; t < 2000; ++t) {
    std::vector<double> v(1 + gen() % 50);
    for (auto& x : v) x = expo(gen);
    if (t % 10 == 0) v[gen() % v.size()] = kInfinity;
    double brute = v[0];
    for (double x : v) brute = x > brute ? x : brute;
    CHECK(block_maximum(v) == brute);
    std::shuffle(v.begin(), v.end(), gen);
    CHECK(block_maximum(v) == brute);
  }
}

TEST_CASE("limit law examples and shape") {
  CHECK(gumbel_limit(0.0, 1.0, 2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(gumbel_limit(1e6, 1.0, 2) == 1.0);
  CHECK(gumbel_limit(-3.0, 0.0, 2) == 1.0);
  CHECK(gumbel_limit(-50.0, 1.0, 1) == 0.0);
  CHECK_THROWS_AS((void)gumbel_limit(0.0, -1.0, 2), std::invalid_argument);
  for (double H : {0.1, 1.0, 3.14}) {
    for (int D : {1, 2, 3}) {
      double prev = 0.0;
      for (double v = -10.0; v <= 10.0; v += 0.01) {
        const double g = gumbel_limit(v, H, D);
        CHECK(g >= prev);
        CHECK(g <= 1.0);
        prev = g;
      }
    }
  }
}

TEST_CASE("ks distance examples") {
  const std::vector<double> a{0.2, 0.6}, b{0.3, 0.5}, zeros{0.0, 0.0}, ones{1.0, 1.0};
  CHECK(ks_distance(a, a) == 0.0);
  CHECK(ks_distance(zeros, ones) == 1.0);
  CHECK(ks_distance(a, b) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK_THROWS_AS((void)ks_distance(a, std::vector<double>{0.1}), std::invalid_argument);
}

TEST_CASE("unit ball volumes") {
  CHECK(unit_ball_volume(1) == doctest::Approx(2.0));
  CHECK(unit_ball_volume(2) == doctest::Approx(std::numbers::pi));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * std::numbers::pi / 3.0));
  CHECK(unit_ball_volume(4) == doctest::Approx(std::numbers::pi * std::numbers::pi / 2.0));
}

TEST_CASE("ball volume against a grid count") {
  const Geometry circle{{Axis::circle()}, {}};
  ProductPoint c1;
  c1.base.push_back(CircleCoord::from_real(0.95));
  CHECK(ball_volume(circle, c1, 0.1) == doctest::Approx(0.2));
  CHECK(ball_volume(circle, c1, 0.7) == doctest::Approx(1.0));

  const Geometry unit{{Axis::interval(0.0, 1.0)}, {}};
  ProductPoint i1;
  i1.base.push_back(IntervalCoord{0.1});
  CHECK(ball_volume(unit, i1, 0.3) == doctest::Approx(0.4));

  const Geometry torus{{Axis::circle()}, {Axis::circle()}};
  const auto t = circle2(0.9, 0.05);
  CHECK(ball_volume(torus, t, 0.01) == doctest::Approx(std::numbers::pi * 1e-4).epsilon(1e-12));
  CHECK(ball_volume(torus, t, 0.8) == doctest::Approx(1.0));

  const Geometry mixed{{Axis::circle()}, {Axis::interval(0.0, 1.0)}};
  const Geometry box{{Axis::interval(-1.0, 1.0)}, {Axis::interval(0.0, 0.5)}};
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 30; ++k) {
    const double r = 0.02 + 0.6 * u(gen);
    for (const Geometry* g : {&torus, &mixed, &box}) {
      ProductPoint p;
      auto fill = [&](const AxisVector& axes, CoordVector& out) {
        for (const auto& ax : axes) {
          if (ax.kind == AxisKind::Circle) {
            out.push_back(CircleCoord::from_real(u(gen)));
          } else {
            out.push_back(IntervalCoord{ax.lo + (ax.hi - ax.lo) * u(gen)});
          }
        }
      };
      fill(g->base, p.base);
      fill(g->fiber, p.fiber);
      CAPTURE(describe(p));
      CAPTURE(r);
      const double oracle = grid_volume(*g, p, r, 2000);
      CHECK(ball_volume(*g, p, r) == doctest::Approx(oracle).epsilon(5e-3).scale(0.0));
    }
  }

  const Geometry cube{{Axis::interval(0.0, 1.0), Axis::interval(0.0, 1.0)},
                      {Axis::interval(0.0, 1.0)}};
  ProductPoint mid;
  mid.base = {IntervalCoord{0.5}, IntervalCoord{0.5}};
  mid.fiber = {IntervalCoord{0.5}};
  CHECK(ball_volume(cube, mid, 0.1) == doctest::Approx(4.0 / 3.0 * std::numbers::pi * 1e-3));
  CHECK_THROWS_AS((void)ball_volume(cube, mid, 0.6), std::domain_error);
}

TEST_CASE("exceedance indicators bracket the block maximum on real orbits") {
  const auto sys = trig_extension(3);
  CounterRng rng(4242);
  for (int t = 0; t < 300; ++t) {
    const auto p0 = uniform_point(sys.geometry(), rng);
    const auto target = uniform_point(sys.geometry(), rng);
    const auto orbit = collect_orbit(sys, p0, {rng.next() % 200, 0, 0, 0});
    std::vector<double> phi;
    for (const auto& p : orbit) phi.push_back(observable_phi(p, target));
    for (double u : {0.5, 1.0, 2.0, 3.0}) {
      const auto c = exceedance_counts(phi, u);
      // Brute force over all indices, in signed integers.
      std::int64_t hits = 0, pairs = 0;
      for (std::size_t j = 0; j < phi.size(); ++j) {
        hits += phi[j] >= u;
        for (std::size_t l = 0; l < phi.size(); ++l) pairs += l != j && phi[j] >= u && phi[l] >= u;
      }
      const std::int64_t zk = block_maximum(phi) >= u;
      CHECK(c.hits == static_cast<std::uint64_t>(hits));
      CHECK(c.ordered_pairs == static_cast<std::uint64_t>(pairs));
      CHECK(c.max_indicator == static_cast<std::uint64_t>(zk));
      CHECK(hits >= zk);
      CHECK(zk >= hits - pairs);
    }
  }
}

TEST_CASE("block maxima grow with the block length") {
  const auto sys = trig_extension(2);
  const auto target = circle2(0.37, 0.61);
  const std::uint64_t members = 500;
  const std::vector<std::uint64_t> lengths{0, 5, 20, 80, 199};
  std::vector<std::uint64_t> below(lengths.size(), 0);
  for (std::uint64_t i = 0; i < members; ++i) {
    CounterRng rng(5, 0, i);
    const auto orbit = collect_orbit(sys, uniform_point(sys.geometry(), rng), {199, 0, 0, 0});
    std::vector<double> phi;
    for (const auto& p : orbit) phi.push_back(observable_phi(p, target));
    const auto z = running_maxima(phi);
    REQUIRE(z.size() == phi.size());
    for (std::size_t r = 0; r < z.size(); ++r) {
      CHECK(z[r] == block_maximum(std::span<const double>(phi).first(r + 1)));
      if (r > 0) CHECK(z[r] >= z[r - 1]);
    }
    for (std::size_t k = 0; k < lengths.size(); ++k) below[k] += z[lengths[k]] < 2.0;
  }
  for (std::size_t k = 1; k < lengths.size(); ++k) CHECK(below[k] <= below[k - 1]);
}

TEST_CASE("local density of the tripling map is one") {
  const SystemDescriptor sys(LinearExpandingParams{3});
  Ensemble ens{100000, SamplingMode::LebesgueBurnin, {}, 61, 0};
  ProductPoint target;
  target.base.push_back(CircleCoord::from_real(0.3));
  const std::vector<double> radii{0.05, 0.02, 0.01};
  const auto est = estimate_local_density(sys, ens, target, radii, {100, 1});
  REQUIRE(est.rows.size() == 3);
  for (const auto& row : est.rows) {
    CAPTURE(row.radius);
    CHECK(row.volume == doctest::Approx(2.0 * row.radius));
    CHECK(std::abs(row.estimate - 1.0) <= 3.0 * row.error);
  }
  CHECK(est.H_hat_radius == 0.01);
  CHECK(est.warnings.empty());
}

TEST_CASE("local density of the skew product is one") {
  const auto sys = flagship();
  Ensemble ens{100000, SamplingMode::LebesgueBurnin, {}, 62, 0};
  const auto target = circle2(0.3, 0.6);
  const std::vector<double> radii{0.1, 0.05, 0.02};
  const auto est = estimate_local_density(sys, ens, target, radii, {100, 10});
  for (const auto& row : est.rows) {
    CAPTURE(row.radius);
    CHECK(std::abs(row.estimate - 1.0) <= 3.0 * row.error);
  }
  CHECK(std::abs(est.H_hat - 1.0) <= 3.0 * est.H_hat_error);
}

TEST_CASE("density near an interval end uses the truncated ball") {
  PiecewiseC2Params pw;
  pw.breakpoints = {0.0, 0.5, 1.0};
  pw.distortion = 0.2;
  pw.alternating = true;
  const SystemDescriptor sys(pw);
  ProductPoint end;
  end.base.push_back(IntervalCoord{0.0});
  const std::vector<double> radii{0.02};
  Ensemble ens{100000, SamplingMode::LebesgueBurnin, {}, 7, 0};
  const auto e = estimate_local_density(sys, ens, end, radii, {50, 4});
  CHECK(e.rows[0].volume == doctest::Approx(0.02));
  // The density is continuous, so a one-sided ball at 0 and a full ball just
  // inside agree once each is divided by its own volume.
  const auto near = estimate_local_density(sys, ens, [] {
    ProductPoint p;
    p.base.push_back(IntervalCoord{0.02});
    return p;
  }(), radii, {50, 4});
  CHECK(std::abs(e.H_hat - near.H_hat) <= 3.0 * std::hypot(e.H_hat_error, near.H_hat_error) + 0.05);
}

TEST_CASE("density warns when the smallest ball is never visited") {
  const SystemDescriptor sys(LinearExpandingParams{3});
  Ensemble ens{100, SamplingMode::LebesgueBurnin, {}, 1, 0};
  ProductPoint target;
  target.base.push_back(CircleCoord::from_real(0.5));
  const std::vector<double> radii{0.2, 1e-9};
  const auto est = estimate_local_density(sys, ens, target, radii, {10, 1});
  CHECK(est.rows[1].visits == 0);
  CHECK(est.H_hat_radius == 0.2);
  CHECK_FALSE(est.warnings.empty());
  const std::vector<double> bad{0.1, 0.2};
  CHECK_THROWS_AS((void)estimate_local_density(sys, ens, target, bad, {}), std::invalid_argument);
}

TEST_CASE("density results do not depend on thread count") {
  const auto sys = trig_extension();
  Ensemble ens{5000, SamplingMode::LebesgueBurnin, {}, 9, 0};
  const std::vector<ProductPoint> targets{circle2(0.1, 0.2), circle2(0.7, 0.9)};
  const std::vector<double> radii{0.1, 0.05};
  const auto a = density_profile(sys, ens, targets, radii, {50, 20}, Exec{1, 64});
  const auto b = density_profile(sys, ens, targets, radii, {50, 20}, Exec{4, 64});
  REQUIRE(a.size() == 2);
  for (std::size_t t = 0; t < 2; ++t) {
    for (std::size_t i = 0; i < radii.size(); ++i) {
      CHECK(a[t].rows[i].visits == b[t].rows[i].visits);
      CHECK(a[t].rows[i].error == b[t].rows[i].error);
    }
  }
}

TEST_CASE("short-range statistic with an empty ball is zero") {
  const auto sys = trig_extension();
  Ensemble ens{1000, SamplingMode::LebesgueBurnin, {}, 3, 0};
  ShortRangeOptions opt;
  opt.v = 20.0;
  opt.window = 10;
  const auto r = short_range_pair_statistic(sys, circle2(0.4, 0.4), 1, 0.4, ens, opt);
  CHECK(r.ball_visits == 0);
  CHECK(r.statistic == 0.0);
  CHECK(r.horizon == 1);
}

TEST_CASE("short-range statistic decays for a generic target, not for a fixed point") {
  const auto sys = trig_extension();
  const auto target = circle2(0.3141, 0.2718);
  Ensemble ens{10000, SamplingMode::LebesgueBurnin, {}, 11, 0};
  ShortRangeOptions opt;
  opt.window = 1000;
  std::vector<double> stats;
  for (std::uint64_t n : {1000ULL, 10000ULL, 100000ULL}) {
    const auto r = short_range_pair_statistic(sys, target, n, 0.4, ens, opt);
    CAPTURE(n);
    CHECK(r.ball_visits > 100);
    stats.push_back(r.statistic);
  }
  CHECK(stats[0] > stats[1]);
  CHECK(stats[1] > stats[2]);

  // (0, 0) is fixed by the flagship (h(0) = 0): returns are immediate.
  const auto fixed = short_range_pair_statistic(flagship(), circle2(0.0, 0.0), 10000, 0.4, ens, opt);
  CHECK(fixed.statistic > 0.3);
  CHECK(fixed.statistic > 10.0 * stats[1]);
  CHECK(target_short_return(flagship(), circle2(0.0, 0.0), 1e-6, 5) == 1);
  CHECK_FALSE(target_short_return(sys, target, 1e-6, 20));
}

TEST_CASE("empirical law: tails, monotonicity and a brute-force replay") {
  EvtExperiment exp;
  exp.system = trig_extension();
  exp.target = circle2(0.41, 0.13);
  exp.n = 200;
  exp.ensemble = {300, SamplingMode::LebesgueBurnin, {}, 5, 0};
  exp.burn_in = 50;
  exp.v_grid = {-20.0, -1.0, 0.0, 0.5, 1.0, 2.0, 40.0};
  exp.radii = {0.1, 0.05};
  const auto res = empirical_evt_cdf(exp);
  CHECK(res.rows.front().empirical == 0.0);
  CHECK(res.rows.back().empirical == 1.0);
  for (std::size_t i = 1; i < res.rows.size(); ++i) {
    CHECK(res.rows[i].empirical >= res.rows[i - 1].empirical);
    CHECK(res.rows[i].theoretical >= res.rows[i - 1].theoretical);
  }
  REQUIRE(res.block_maxima.size() == 300);
  for (std::uint64_t i = 0; i < 300; i += 37) {
    const auto p0 = sample_member(exp.system, exp.ensemble, i, 50);
    const auto orbit = collect_orbit(exp.system, p0, {200, 0, 0, 0});
    CHECK(res.block_maxima[i] == block_maximum(orbit, *exp.target));
  }
  for (const auto& row : res.rows) {
    const double expected =
        gumbel_limit(row.v, unit_ball_volume(2) * res.density.H_hat, 2);
    CHECK(row.theoretical == expected);
    CHECK(row.u_n == scaling_un(row.v, 200, 2));
  }
}

TEST_CASE("degenerate block of length zero") {
  EvtExperiment exp;
  exp.system = flagship();
  exp.target = circle2(0.5, 0.5);
  exp.n = 0;
  exp.ensemble = {1000, SamplingMode::LebesgueBurnin, {}, 8, 0};
  exp.v_grid = {0.0, 1.0, 2.0};
  exp.radii = {0.2};
  const auto res = empirical_evt_cdf(exp);
  const auto pts = sample_invariant(exp.system, exp.ensemble, res.burn_in);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(res.block_maxima[i] == observable_phi(pts[i], *exp.target));
  }
  CHECK(res.rows[0].u_n == 0.0);
}

TEST_CASE("evt results do not depend on thread count") {
  EvtExperiment exp;
  exp.system = trig_extension();
  exp.n = 500;
  exp.ensemble = {2000, SamplingMode::LebesgueBurnin, {}, 99, 0};
  exp.v_grid = {-1.0, 0.0, 1.0};
  exp.radii = {0.05, 0.02};
  exp.short_range = ShortRangeRequest{0.4, 0.0, 500};
  const auto a = empirical_evt_cdf(exp, Exec{1, 256});
  const auto b = empirical_evt_cdf(exp, Exec{4, 256});
  CHECK(a.block_maxima == b.block_maxima);
  CHECK(a.target == b.target);
  CHECK(a.ks_distance == b.ks_distance);
  CHECK(a.density.H_hat == b.density.H_hat);
  REQUIRE(a.short_range);
  CHECK(a.short_range->statistic == b.short_range->statistic);
}

TEST_CASE("experiment validation and divergence accounting") {
  EvtExperiment exp;
  exp.system = flagship();
  exp.ensemble = {10, SamplingMode::LebesgueBurnin, {}, 1, 0};
  exp.v_grid = {1.0, 0.0};
  exp.radii = {0.1};
  CHECK_THROWS_AS((void)empirical_evt_cdf(exp), std::invalid_argument);
  exp.v_grid = {0.0};
  exp.radii = {0.1, 0.1};
  CHECK_THROWS_AS((void)empirical_evt_cdf(exp), std::invalid_argument);

  VianaParams wild;
  wild.a0 = 2.0;
  wild.alpha = 0.2;
  exp.system = SystemDescriptor(wild);
  exp.radii = {0.1};
  exp.burn_in = 0;
  exp.n = 1000;
  exp.target = [] {
    ProductPoint p;
    p.base.push_back(CircleCoord{});
    p.fiber.push_back(IntervalCoord{0.0});
    return p;
  }();
  CHECK_THROWS_AS((void)empirical_evt_cdf(exp), TooManyDiverged);
}

TEST_CASE("a fixed-point target triggers the short-return warning") {
  EvtExperiment exp;
  exp.system = flagship();
  exp.target = circle2(0.0, 0.0);
  exp.n = 10;
  exp.ensemble = {10, SamplingMode::LebesgueBurnin, {}, 1, 0};
  exp.v_grid = {0.0};
  exp.radii = {0.01};
  const auto res = empirical_evt_cdf(exp);
  const bool warned = std::any_of(res.warnings.begin(), res.warnings.end(), [](const auto& w) {
    return w.find("returns within radius") != std::string::npos;
  });
  CHECK(warned);
}
