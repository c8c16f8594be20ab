#include <doctest.h>

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <random>

#include "evtlab/circle.hpp"
#include "evtlab/geometry.hpp"
#include "evtlab/rng.hpp"

using namespace evtlab;
using boost::multiprecision::uint256_t;

namespace {

const uint256_t kP = kCircleModulus;

ProductPoint circle_point(double base, std::optional<double> fiber = std::nullopt) {
  ProductPoint p;
  p.base.push_back(CircleCoord::from_real(base));
  if (fiber) p.fiber.push_back(CircleCoord::from_real(*fiber));
  return p;
}

}  // namespace

TEST_CASE("modulus is 2^64 - 59") {
  CHECK(uint256_t(kCircleModulus) == (uint256_t(1) << 64) - 59);
}

TEST_CASE("mul_mod and add_mod agree with wide integer arithmetic") {
  CounterRng rng(123);
  for (int i = 0; i < 100000; ++i) {
    const std::uint64_t a = rng.uniform_ticks();
    const std::uint64_t b = i % 7 == 0 ? kCircleModulus - 1 - (rng.next() % 64) : rng.uniform_ticks();
    CHECK(uint256_t(mul_mod(a, b)) == (uint256_t(a) * b) % kP);
    CHECK(uint256_t(add_mod(a, b)) == (uint256_t(a) + b) % kP);
  }
  CHECK(mul_mod(kCircleModulus - 1, kCircleModulus - 1) == 1);
  CHECK(add_mod(kCircleModulus - 1, 1) == 0);
}

TEST_CASE("pow_mod matches repeated multiplication") {
  std::uint64_t acc = 1;
  for (std::uint64_t e = 0; e < 200; ++e) {
    CHECK(pow_mod(3, e) == acc);
    acc = mul_mod(acc, 3);
  }
  // Fermat: a^(P-1) = 1.
  CHECK(pow_mod(2, kCircleModulus - 1) == 1);
  CHECK(pow_mod(123456789, kCircleModulus - 1) == 1);
}

TEST_CASE("real conversion round-trips and stays in [0, 1)") {
  CounterRng rng(9);
  for (int i = 0; i < 100000; ++i) {
    const double x = rng.uniform();
    CHECK(CircleCoord::from_real(x).value() == x);
  }
  CHECK(CircleCoord::from_real(1.0).value() == 0.0);
  CHECK(CircleCoord::from_real(-0.25).value() == 0.75);
  CHECK(CircleCoord::from_real(2.5).value() == 0.5);
  CHECK(CircleCoord::from_ticks(kCircleModulus - 1).value() < 1.0);
  CHECK(CircleCoord::from_real(std::nextafter(1.0, 0.0)).value() < 1.0);
}

TEST_CASE("from_rational rounds num/den onto the nearest tick") {
  const auto third = CircleCoord::from_rational(1, 3);
  // Oracle: round(P / 3) with exact integers.
  CHECK(uint256_t(third.ticks()) == (kP + 1) / 3);
  CHECK(CircleCoord::from_rational(-1, 4).value() == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(CircleCoord::from_rational(0, 5).ticks() == 0);
  CHECK(CircleCoord::from_rational(5, 5).ticks() == 0);
}

TEST_CASE("arc distance") {
  CHECK(arc_distance(CircleCoord::from_real(0.9), CircleCoord::from_real(0.1)) ==
        doctest::Approx(0.2).epsilon(1e-15));
  CHECK(arc_distance(CircleCoord::from_real(0.1), CircleCoord::from_real(0.9)) ==
        doctest::Approx(0.2).epsilon(1e-15));
  CHECK(arc_distance(CircleCoord::from_real(0.3), CircleCoord::from_real(0.3)) == 0.0);
  CHECK(arc_distance(CircleCoord::from_real(0.0), CircleCoord::from_real(0.5)) ==
        doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("product metric examples") {
  const auto p = circle_point(0.0, 0.0);
  CHECK(product_metric(p, p) == 0.0);
  CHECK(product_metric(circle_point(0.0, 0.0), circle_point(0.3, 0.4)) ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK(product_metric(circle_point(0.9), circle_point(0.1)) ==
        doctest::Approx(0.2).epsilon(1e-15));

  Geometry g{{Axis::circle()}, {Axis::interval(0.0, 1.0)}};
  const std::vector<double> b1{0.2}, f1{0.1}, b2{0.5}, f2{0.5};
  CHECK(product_metric(make_point(g, b1, f1), make_point(g, b2, f2), g) ==
        doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("product metric rejects mismatched geometry") {
  CHECK_THROWS_AS((void)product_metric(circle_point(0.1), circle_point(0.1, 0.2)),
                  std::invalid_argument);
  ProductPoint interval;
  interval.base.push_back(IntervalCoord{0.1});
  CHECK_THROWS_AS((void)product_metric(circle_point(0.1), interval), std::invalid_argument);
  Geometry g{{Axis::interval(0.0, 1.0)}, {}};
  ProductPoint outside;
  outside.base.push_back(IntervalCoord{1.5});
  CHECK_THROWS_AS((void)product_metric(interval, outside, g), std::invalid_argument);
}

TEST_CASE("product metric is a metric on random triples") {
  Geometry g{{Axis::circle(), Axis::interval(0.0, 2.0)}, {Axis::circle()}};
  CounterRng rng(77);
  auto draw = [&] {
    const std::vector<double> b{rng.uniform(), 2.0 * rng.uniform()};
    const std::vector<double> f{rng.uniform()};
    return make_point(g, b, f);
  };
  const double ulp = std::numeric_limits<double>::epsilon();
  for (int i = 0; i < 100000; ++i) {
    const auto p = draw();
    const auto q = draw();
    const auto r = draw();
    const double pq = product_metric(p, q);
    CHECK(pq == product_metric(q, p));
    CHECK(pq >= 0.0);
    const double pr = product_metric(p, r);
    const double rq = product_metric(r, q);
    CHECK(pq <= (pr + rq) * (1.0 + 4.0 * ulp));
    CHECK((pq == 0.0) == (p == q));
  }
}

TEST_CASE("base distance never exceeds product distance") {
  CounterRng rng(5);
  for (int i = 0; i < 100000; ++i) {
    const auto p = circle_point(rng.uniform(), rng.uniform());
    const auto q = circle_point(rng.uniform(), rng.uniform());
    CHECK(base_squared_distance_unchecked(p, q) <= squared_distance_unchecked(p, q));
    CHECK(base_distance(p, q) <= product_metric(p, q));
  }
}

TEST_CASE("geometry membership and point construction") {
  Geometry g{{Axis::circle()}, {Axis::interval(-2.0, 2.0)}};
  const std::vector<double> b{1.25};
  const std::vector<double> f{-2.0};
  const auto p = make_point(g, b, f);
  CHECK(g.contains(p));
  CHECK(coordinate_value(p.base[0]) == 0.25);
  const std::vector<double> bad{2.5};
  CHECK_THROWS_AS((void)make_point(g, b, bad), std::invalid_argument);
  CHECK_THROWS_AS((void)make_point(g, b, {}), std::invalid_argument);
  CHECK(g.dimension() == 2);
  CHECK(describe(p) == "(0.25; -2)");
}
