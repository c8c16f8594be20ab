#include <doctest.h>

#include <cmath>
#include <numbers>

#include "evtlab/hypotheses.hpp"
#include "evtlab/stats.hpp"

using namespace evtlab;

namespace {

// Fraction of midpoint-grid x in [0, 1) with d(2^j x, x) < 1/n for some j <= g.
double doubling_grid_measure(std::uint64_t n, std::uint64_t g, std::uint64_t cells) {
  std::uint64_t inside = 0;
  for (std::uint64_t i = 0; i < cells; ++i) {
    const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(cells);
    double y = x;
    for (std::uint64_t j = 1; j <= g; ++j) {
      y = 2.0 * y;
      y -= std::floor(y);
      const double diff = std::abs(y - x);
      if (std::min(diff, 1.0 - diff) < 1.0 / static_cast<double>(n)) {
        ++inside;
        break;
      }
    }
  }
  return static_cast<double>(inside) / static_cast<double>(cells);
}

SamplingOptions opts(std::uint64_t samples, std::uint64_t seed,
                     std::optional<std::uint64_t> burn_in = std::nullopt) {
  SamplingOptions s;
  s.samples = samples;
  s.seed = seed;
  s.burn_in = burn_in;
  return s;
}

}  // namespace

TEST_CASE("return horizon") {
  CHECK(ReturnHorizon::power(0.2, 2)(100) == 7);
  CHECK(ReturnHorizon::power(0.25, 2)(10000) == 100);
  CHECK(ReturnHorizon::power(0.2, 2)(1) == 1);
  CHECK(ReturnHorizon::fixed(3)(123456) == 3);
  CHECK(ReturnHorizon::fixed(3).is_fixed());
  CHECK_THROWS_AS((void)ReturnHorizon::fixed(0), std::invalid_argument);
  CHECK_THROWS_AS((void)ReturnHorizon::power(0.0, 2), std::invalid_argument);
}

TEST_CASE("rapid-return set of the doubling map, one step") {
  const SystemDescriptor doubling(LinearExpandingParams{2});
  const std::vector<std::uint64_t> ns{10};
  const double oracle = doubling_grid_measure(10, 1, 10'000'000);
  CHECK(oracle == doctest::Approx(0.2).epsilon(1e-6));
  const auto rep = estimate_en_measure(doubling, ns, ReturnHorizon::fixed(1), opts(1'000'000, 1));
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.uniform_sampling);
  CHECK(std::abs(rep.rows[0].measure - oracle) <= 3.0 * rep.rows[0].error);
}

TEST_CASE("rapid-return set of the doubling map, two steps") {
  const SystemDescriptor doubling(LinearExpandingParams{2});
  const std::vector<std::uint64_t> ns{10};
  const double oracle = doubling_grid_measure(10, 2, 10'000'000);
  CHECK(oracle <= 0.4);
  const auto rep = estimate_en_measure(doubling, ns, ReturnHorizon::fixed(2), opts(1'000'000, 2));
  CHECK(std::abs(rep.rows[0].measure - oracle) <= 3.0 * rep.rows[0].error);
  CHECK(rep.rows[0].measure <= 0.4);
}

TEST_CASE("rapid-return measures are monotone") {
  const SystemDescriptor doubling(LinearExpandingParams{2});
  const std::vector<std::uint64_t> ns{10, 30, 100, 300, 1000};
  // Same seed, same samples: bigger horizons can only add hits.
  std::vector<EnMeasureReport> reps;
  for (std::uint64_t g : {1, 2, 4, 8}) {
    reps.push_back(estimate_en_measure(doubling, ns, ReturnHorizon::fixed(g), opts(200'000, 7)));
  }
  for (std::size_t k = 1; k < reps.size(); ++k) {
    for (std::size_t i = 0; i < ns.size(); ++i) CHECK(reps[k].rows[i].hits >= reps[k - 1].rows[i].hits);
  }
  for (const auto& rep : reps) {
    for (std::size_t i = 1; i < ns.size(); ++i) {
      const auto& a = rep.rows[i - 1];
      const auto& b = rep.rows[i];
      CHECK(b.measure <= a.measure + 3.0 * std::hypot(a.error, b.error));
    }
  }
}

TEST_CASE("fitted exponent of the doubling map") {
  const SystemDescriptor doubling(LinearExpandingParams{2});
  const std::vector<std::uint64_t> ns{100, 1000, 10000, 100000};
  const auto horizon = ReturnHorizon::power(0.2, 2);
  const auto rep = estimate_en_measure(doubling, ns, horizon, opts(2'000'000, 3));
  REQUIRE(rep.beta.exponent);
  // Oracle: each j contributes an arc set of measure exactly 2/n, so the
  // union is 2 g(n) / n up to overlaps.
  std::vector<double> x, y;
  for (auto n : ns) {
    x.push_back(static_cast<double>(n));
    y.push_back(2.0 * static_cast<double>(horizon(n)) / static_cast<double>(n));
  }
  const double analytic = -fit_loglog(x, y).slope;
  CHECK(std::abs(*rep.beta.exponent - analytic) <= 0.2);
  for (std::size_t i = 0; i < ns.size(); ++i) CHECK(rep.rows[i].measure <= y[i] + 3.0 * rep.rows[i].error);
}

TEST_CASE("zero hits give a one-sided bound and drop out of the fit") {
  const SystemDescriptor doubling(LinearExpandingParams{2});
  const std::vector<std::uint64_t> ns{10, 100, 1'000'000'000};
  const auto rep = estimate_en_measure(doubling, ns, ReturnHorizon::fixed(1), opts(10'000, 5));
  CHECK(rep.rows[2].hits == 0);
  CHECK(rep.rows[2].measure == 0.0);
  CHECK(rep.rows[2].upper_bound == doctest::Approx(3e-4));
  REQUIRE(rep.beta.exponent);
  CHECK(rep.beta.points == 2);
}

TEST_CASE("non-uniform bases use burn-in sampling") {
  const SystemDescriptor lsv(LsvParams{0.5});
  const std::vector<std::uint64_t> ns{10, 100};
  const auto rep = estimate_en_measure(lsv, ns, ReturnHorizon::fixed(2), opts(10'000, 5, 100));
  CHECK_FALSE(rep.uniform_sampling);
  CHECK(rep.burn_in == 100);
  CHECK(rep.rows[0].measure > rep.rows[1].measure);
}

TEST_CASE("product rapid-return set sits inside the base one") {
  const SystemDescriptor sys(CircleExtensionParams{LinearExpandingParams{3}, CocycleSpec::linear()});
  const std::vector<std::uint64_t> ns{10, 100, 1000, 10000};
  const auto rep =
      estimate_product_en_measure(sys, ns, ReturnHorizon::power(0.2, 2), opts(1'000'000, 12));
  CHECK(rep.inclusion_checks == 1'000'000ULL * ns.size());
  for (const auto& row : rep.rows) {
    CAPTURE(row.n);
    CHECK(row.product_hits <= row.base_hits);
    CHECK(row.product_measure <= row.base_measure + 3.0 * row.base_error);
    if (row.base_hits == 0) CHECK(row.product_measure == 0.0);
  }
  const std::vector<std::uint64_t> huge{1'000'000'000};
  const auto empty = estimate_product_en_measure(sys, huge, ReturnHorizon::fixed(1), opts(100'000, 12));
  CHECK(empty.rows[0].base_hits == 0);
  CHECK(empty.rows[0].product_hits == 0);
  const SystemDescriptor trig(
      CircleExtensionParams{LinearExpandingParams{2}, CocycleSpec::trigonometric(0.3)});
  const auto r2 = estimate_product_en_measure(trig, ns, ReturnHorizon::fixed(3), opts(200'000, 4));
  for (const auto& row : r2.rows) CHECK(row.product_hits <= row.base_hits);
}

TEST_CASE("test function evaluation and norms") {
  const Geometry line{{Axis::circle()}, {}};
  const Geometry box{{Axis::interval(0.0, 2.0)}, {Axis::circle()}};
  ProductPoint p;
  p.base.push_back(CircleCoord::from_real(0.25));
  CHECK(evaluate(TestFunction::cosine(), line, p) == doctest::Approx(0.0).scale(1.0));
  CHECK(evaluate(TestFunction::sine(), line, p) == doctest::Approx(1.0));
  CHECK(evaluate(TestFunction::sawtooth(), line, p) == -0.25);
  CHECK(evaluate(TestFunction::constant(2.5), line, p) == 2.5);
  CHECK(evaluate(TestFunction::bump({0.25}, 0.1), line, p) == 1.0);
  ProductPoint q;
  q.base.push_back(IntervalCoord{1.5});
  q.fiber.push_back(CircleCoord::from_real(0.5));
  CHECK(evaluate(TestFunction::sawtooth(0), box, q) == doctest::Approx(0.25));
  CHECK(evaluate(TestFunction::cosine(1), box, q) == doctest::Approx(-1.0));
  CHECK(sup_norm(TestFunction::cosine(), line) == 1.0);
  CHECK_FALSE(holder_norm(TestFunction::sawtooth(), line, 1.0));
  CHECK(holder_norm(TestFunction::sawtooth(0), box, 1.0) == doctest::Approx(0.5 + 0.5));
  CHECK(holder_norm(TestFunction::cosine(), line, 1.0) ==
        doctest::Approx(1.0 + 2.0 * std::numbers::pi));
  CHECK_THROWS_AS(check_test_function(TestFunction::cosine(3), box), std::invalid_argument);
  CHECK(parse_test_function(to_string(TestFunction::Kind::Bump)) == TestFunction::Kind::Bump);
}

TEST_CASE("cosine correlations of the doubling map vanish") {
  const SystemDescriptor doubling(LinearExpandingParams{2});
  const std::vector<std::uint64_t> js{1, 2, 3, 4, 5};
  const auto rep = estimate_correlation_decay(doubling, TestFunction::cosine(), TestFunction::cosine(),
                                              js, opts(200'000, 21));
  for (const auto& row : rep.rows) {
    CAPTURE(row.j);
    CHECK(std::abs(row.covariance) <= 3.0 * row.error);
  }
  CHECK(rep.psi_sup == 1.0);
}

TEST_CASE("sawtooth correlations of the doubling map halve each step") {
  const SystemDescriptor doubling(LinearExpandingParams{2});
  const std::vector<std::uint64_t> js{1, 2, 3, 4, 5, 6};
  const auto rep = estimate_correlation_decay(doubling, TestFunction::sawtooth(),
                                              TestFunction::sawtooth(), js, opts(1'000'000, 22));
  for (const auto& row : rep.rows) {
    // Midpoint quadrature oracle for the integral of (x - 1/2)(2^j x mod 1 - 1/2).
    const int cells = 1 << 20;
    double q = 0.0;
    for (int i = 0; i < cells; ++i) {
      const double x = (i + 0.5) / cells;
      double y = std::ldexp(x, static_cast<int>(row.j));
      y -= std::floor(y);
      q += (x - 0.5) * (y - 0.5);
    }
    q /= cells;
    CAPTURE(row.j);
    CHECK(q == doctest::Approx(std::ldexp(1.0, -static_cast<int>(row.j)) / 12.0).epsilon(1e-4));
    CHECK(std::abs(row.covariance - q) <= 3.0 * row.error);
  }
  CHECK_FALSE(rep.upsilon_holder);
  REQUIRE(rep.alpha.exponent);
}

TEST_CASE("a constant observable has zero correlation") {
  const SystemDescriptor sys(CircleExtensionParams{LsvParams{0.5}, CocycleSpec::trigonometric(0.3)});
  const std::vector<std::uint64_t> js{1, 5, 10};
  const auto rep = estimate_correlation_decay(sys, TestFunction::constant(3.0), TestFunction::cosine(1),
                                              js, opts(20'000, 1, 100));
  for (const auto& row : rep.rows) {
    CHECK(row.covariance == 0.0);
    CHECK(row.error == 0.0);
  }
  CHECK_FALSE(rep.alpha.exponent);
}

TEST_CASE("decay estimates do not depend on thread count") {
  const SystemDescriptor sys(GouezelParams{});
  const std::vector<std::uint64_t> js{1, 3, 9};
  const auto f = TestFunction::bump({0.5, 0.1}, 0.3);
  const auto a = estimate_correlation_decay(sys, f, TestFunction::sawtooth(1), js, opts(5000, 3, 100), 1.0,
                                            Exec{1, 100});
  const auto b = estimate_correlation_decay(sys, f, TestFunction::sawtooth(1), js, opts(5000, 3, 100), 1.0,
                                            Exec{4, 100});
  for (std::size_t i = 0; i < js.size(); ++i) {
    CHECK(a.rows[i].covariance == b.rows[i].covariance);
    CHECK(a.rows[i].error == b.rows[i].error);
  }
}

TEST_CASE("exponent threshold arithmetic") {
  HypothesisParams p;
  p.kappa = 2.0;
  p.gamma_prime = 0.5;
  CHECK(check_exponent_condition(p, 2).threshold == doctest::Approx(8.0).epsilon(1e-15));
  CHECK_FALSE(check_exponent_condition(p, 2).satisfied);
  p.alpha = 8.5;
  CHECK(check_exponent_condition(p, 2).satisfied);
  p.alpha = 8.0;
  CHECK_FALSE(check_exponent_condition(p, 2).satisfied);
  p.kappa = 1.0;
  CHECK(check_exponent_condition(p, 2).threshold == doctest::Approx(5.0).epsilon(1e-15));

  p.alpha = 1e300;
  p.gamma_prime = 1e-310;
  const auto tiny = check_exponent_condition(p, 2);
  CHECK_FALSE(tiny.satisfied);
  p.gamma_prime = 0.0;
  CHECK_THROWS_AS((void)check_exponent_condition(p, 2), std::invalid_argument);

  // kappa from delta when only delta is given: delta = 1 gives kappa = 2.
  HypothesisParams q;
  q.delta = 1.0;
  q.gamma_prime = 0.5;
  CHECK(check_exponent_condition(q, 2).threshold == doctest::Approx(8.0).epsilon(1e-15));
}

TEST_CASE("threshold monotonicity in gamma'") {
  HypothesisParams p;
  p.kappa = 1.5;
  for (int D : {1, 2, 3}) {
    double prev = std::numeric_limits<double>::infinity();
    double prev_bound = 0.0;
    for (int i = 1; i <= 200; ++i) {
      const double g = i * 0.005;
      p.gamma_prime = g;
      const double t = check_exponent_condition(p, D).threshold;
      const double b = check_gouezel_alpha_condition(0.1, g, D).threshold;
      if (g <= 0.5) {
        CHECK(t < prev);
        CHECK(b > prev_bound);
      } else {
        CHECK(t == prev);
        CHECK(b == prev_bound);
      }
      prev = t;
      prev_bound = b;
    }
  }
}

TEST_CASE("gouezel alpha bound") {
  CHECK(check_gouezel_alpha_condition(0.15, 0.5, 2).threshold ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(check_gouezel_alpha_condition(0.15, 0.5, 2).satisfied);
  CHECK_FALSE(check_gouezel_alpha_condition(0.2, 0.5, 2).satisfied);
}

TEST_CASE("hypothesis parameter validation") {
  HypothesisParams ok;
  ok.delta = 1.0;
  ok.kappa = 2.0;
  CHECK(validate(ok, 2).empty());
  HypothesisParams bad_pair = ok;
  bad_pair.kappa = 3.0;
  CHECK(validate(bad_pair, 2).size() == 1);
  HypothesisParams g;
  g.gamma_prime = 0.6;
  g.beta = 1.0;
  CHECK(validate(g, 2).size() == 1);
  g.gamma_prime = 0.4;
  CHECK(validate(g, 2).empty());
  HypothesisParams h;
  h.holder_exponent = 1.5;
  h.delta = -1.0;
  CHECK(validate(h, 2).size() == 2);
}
