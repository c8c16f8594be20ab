#include "evtlab/hypotheses.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "evtlab/orbit.hpp"
#include "evtlab/stats.hpp"

namespace evtlab {
namespace {

constexpr std::uint64_t kEnStream = 0x456E0001ULL;
constexpr std::uint64_t kProductEnStream = 0x456E0002ULL;
constexpr std::uint64_t kDecayStream = 0x44430001ULL;

std::vector<std::uint64_t> sorted_unique(std::span<const std::uint64_t> xs) {
  std::vector<std::uint64_t> out(xs.begin(), xs.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void check_n_list(std::span<const std::uint64_t> n_list) {
  if (n_list.empty()) throw std::invalid_argument("n_list must not be empty");
  for (auto n : n_list) {
    if (n < 1) throw std::invalid_argument("n_list values must be >= 1");
  }
}

// Sampling plan shared by the estimators: uniform starts when Lebesgue is
// invariant, burn-in starts otherwise.
struct Plan {
  Ensemble ensemble;
  std::uint64_t burn_in{0};
  bool uniform{false};
};

Plan make_plan(const SystemDescriptor& system, const SamplingOptions& options,
               std::uint64_t stream) {
  if (options.samples < 1) throw std::invalid_argument("samples must be >= 1");
  Plan plan;
  plan.ensemble.count = options.samples;
  plan.ensemble.seed = options.seed;
  plan.ensemble.stream = stream;
  plan.uniform = system.lebesgue_invariant() && !options.burn_in;
  plan.burn_in = plan.uniform ? 0 : options.burn_in.value_or(system.default_burn_in());
  return plan;
}

PowerFit fit_power(std::span<const double> x, std::span<const double> y, const FitRange& range) {
  PowerFit fit;
  fit.range = range;
  std::vector<double> fx;
  std::vector<double> fy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (range.contains(x[i]) && x[i] > 0.0 && y[i] > 0.0) {
      fx.push_back(x[i]);
      fy.push_back(y[i]);
    }
  }
  fit.points = fx.size();
  if (fx.size() >= 2) {
    const LineFit line = fit_loglog(fx, fy);
    fit.exponent = -line.slope;
    fit.intercept = line.intercept;
  }
  return fit;
}

double binomial_error(std::uint64_t hits, std::uint64_t samples) {
  const double m = static_cast<double>(hits) / static_cast<double>(samples);
  return std::sqrt(m * (1.0 - m) / static_cast<double>(samples));
}

struct HorizonPlan {
  std::vector<std::uint64_t> n_values;      // sorted unique
  std::vector<std::uint64_t> horizon_of_n;  // g(n) per n value
  std::uint64_t longest{0};
};

HorizonPlan plan_horizons(std::span<const std::uint64_t> n_list, const ReturnHorizon& horizon) {
  check_n_list(n_list);
  HorizonPlan hp;
  hp.n_values = sorted_unique(n_list);
  for (auto n : hp.n_values) {
    hp.horizon_of_n.push_back(horizon(n));
    hp.longest = std::max(hp.longest, hp.horizon_of_n.back());
  }
  return hp;
}

// Prefix minima of squared return distances, read off at each requested horizon.
template <class Stepper, class Dist>
void prefix_minima(const Stepper& stepper, const ProductPoint& start, std::uint64_t longest,
                   std::uint64_t burn_in, Dist&& dist, std::vector<double>& min_by_j) {
  ProductPoint p = start;
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t j = 1; j <= longest; ++j) {
    if (!stepper(p)) throw OrbitDiverged(burn_in + j - 1, "orbit left the phase space");
    best = std::min(best, dist(p));
    min_by_j[j] = best;
  }
}

struct Moments {
  long double x{0}, xx{0}, yx{0}, yyx{0}, yxx{0}, yyxx{0};
};

Coordinate coordinate_at(const ProductPoint& p, std::size_t axis) {
  return axis < p.base.size() ? p.base[axis] : p.fiber[axis - p.base.size()];
}

const Axis& axis_at(const Geometry& g, std::size_t axis) {
  return axis < g.base.size() ? g.base[axis] : g.fiber[axis - g.base.size()];
}

}  // namespace

// --- return horizon -----------------------------------------------------------------

ReturnHorizon ReturnHorizon::power(double gamma_prime, int dimension) {
  if (!(gamma_prime > 0.0)) throw std::invalid_argument("gamma' must be positive");
  if (dimension < 1) throw std::invalid_argument("dimension must be >= 1");
  ReturnHorizon h;
  h.gamma_prime_ = gamma_prime;
  h.dimension_ = dimension;
  return h;
}

ReturnHorizon ReturnHorizon::fixed(std::uint64_t g) {
  if (g < 1) throw std::invalid_argument("fixed return horizon must be >= 1");
  ReturnHorizon h;
  h.fixed_ = g;
  return h;
}

std::uint64_t ReturnHorizon::operator()(std::uint64_t n) const {
  if (fixed_ > 0) return fixed_;
  return std::max<std::uint64_t>(
      1, snapped_ceil(std::pow(static_cast<double>(n), dimension_ * gamma_prime_)));
}

// --- E_n measures -----------------------------------------------------------------------

EnMeasureReport estimate_en_measure(const SystemDescriptor& system,
                                    std::span<const std::uint64_t> n_list,
                                    const ReturnHorizon& horizon, const SamplingOptions& options,
                                    const Exec& exec) {
  const SystemDescriptor base = system.fiber_dimension() == 0 ? system : system.base_system();
  const HorizonPlan hp = plan_horizons(n_list, horizon);
  const Plan plan = make_plan(base, options, kEnStream);
  const std::size_t k = hp.n_values.size();
  std::vector<std::vector<std::uint64_t>> hits(
      chunk_count(plan.ensemble.count, std::max<std::uint64_t>(exec.chunk, 1)),
      std::vector<std::uint64_t>(k, 0));

  visit_stepper(base, [&](const auto& stepper) {
    parallel_for_chunks(plan.ensemble.count, exec,
                        [&](std::uint64_t c, std::uint64_t begin, std::uint64_t end) {
      std::vector<double> min_by_j(hp.longest + 1);
      for (std::uint64_t i = begin; i < end; ++i) {
        const ProductPoint x =
            sample_member(stepper, base.geometry(), plan.ensemble, i, plan.burn_in);
        prefix_minima(stepper, x, hp.longest, plan.burn_in,
                      [&x](const ProductPoint& p) { return base_squared_distance_unchecked(p, x); },
                      min_by_j);
        for (std::size_t t = 0; t < k; ++t) {
          if (std::sqrt(min_by_j[hp.horizon_of_n[t]]) < 1.0 / static_cast<double>(hp.n_values[t])) {
            ++hits[c][t];
          }
        }
      }
    });
  });

  EnMeasureReport out;
  out.samples = plan.ensemble.count;
  out.burn_in = plan.burn_in;
  out.uniform_sampling = plan.uniform;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t t = 0; t < k; ++t) {
    EnMeasureRow row;
    row.n = hp.n_values[t];
    row.horizon = hp.horizon_of_n[t];
    for (const auto& h : hits) row.hits += h[t];
    row.measure = static_cast<double>(row.hits) / static_cast<double>(out.samples);
    row.error = binomial_error(row.hits, out.samples);
    row.upper_bound = row.hits == 0 ? 3.0 / static_cast<double>(out.samples) : row.measure;
    xs.push_back(static_cast<double>(row.n));
    ys.push_back(row.measure);
    out.rows.push_back(row);
  }
  out.beta = fit_power(xs, ys, options.fit);
  return out;
}

ProductEnReport estimate_product_en_measure(const SystemDescriptor& system,
                                            std::span<const std::uint64_t> n_list,
                                            const ReturnHorizon& horizon,
                                            const SamplingOptions& options, const Exec& exec) {
  const HorizonPlan hp = plan_horizons(n_list, horizon);
  const Plan plan = make_plan(system, options, kProductEnStream);
  const std::size_t k = hp.n_values.size();
  struct Counts {
    std::vector<std::uint64_t> product;
    std::vector<std::uint64_t> base;
    std::uint64_t violations{0};
  };
  std::vector<Counts> partial(
      chunk_count(plan.ensemble.count, std::max<std::uint64_t>(exec.chunk, 1)),
      Counts{std::vector<std::uint64_t>(k, 0), std::vector<std::uint64_t>(k, 0), 0});

  visit_stepper(system, [&](const auto& stepper) {
    parallel_for_chunks(plan.ensemble.count, exec,
                        [&](std::uint64_t c, std::uint64_t begin, std::uint64_t end) {
      auto& counts = partial[c];
      std::vector<double> product_min(hp.longest + 1);
      std::vector<double> base_min(hp.longest + 1);
      for (std::uint64_t i = begin; i < end; ++i) {
        ProductPoint p =
            sample_member(stepper, system.geometry(), plan.ensemble, i, plan.burn_in);
        const ProductPoint start = p;
        double best_product = std::numeric_limits<double>::infinity();
        double best_base = best_product;
        for (std::uint64_t j = 1; j <= hp.longest; ++j) {
          if (!stepper(p)) throw OrbitDiverged(plan.burn_in + j - 1, "orbit left the phase space");
          best_product = std::min(best_product, squared_distance_unchecked(p, start));
          best_base = std::min(best_base, base_squared_distance_unchecked(p, start));
          product_min[j] = best_product;
          base_min[j] = best_base;
        }
        for (std::size_t t = 0; t < k; ++t) {
          const double radius = 1.0 / static_cast<double>(hp.n_values[t]);
          const bool product_hit = std::sqrt(product_min[hp.horizon_of_n[t]]) < radius;
          const bool base_hit = std::sqrt(base_min[hp.horizon_of_n[t]]) < radius;
          if (product_hit) ++counts.product[t];
          if (base_hit) ++counts.base[t];
          if (product_hit && !base_hit) ++counts.violations;
        }
      }
    });
  });

  ProductEnReport out;
  out.samples = plan.ensemble.count;
  out.burn_in = plan.burn_in;
  out.inclusion_checks = out.samples * k;
  std::uint64_t violations = 0;
  for (const auto& c : partial) violations += c.violations;
  if (violations > 0) {
    throw std::logic_error(fmt::format(
        "{} product return hits without a base return hit; d_X <= d must make this impossible",
        violations));
  }
  for (std::size_t t = 0; t < k; ++t) {
    ProductEnRow row;
    row.n = hp.n_values[t];
    row.horizon = hp.horizon_of_n[t];
    for (const auto& c : partial) {
      row.product_hits += c.product[t];
      row.base_hits += c.base[t];
    }
    const auto s = static_cast<double>(out.samples);
    row.product_measure = static_cast<double>(row.product_hits) / s;
    row.product_error = binomial_error(row.product_hits, out.samples);
    row.base_measure = static_cast<double>(row.base_hits) / s;
    row.base_error = binomial_error(row.base_hits, out.samples);
    out.rows.push_back(row);
  }
  return out;
}

// --- test functions -----------------------------------------------------------------------

TestFunction TestFunction::cosine(std::size_t axis, int frequency) {
  TestFunction f;
  f.kind = Kind::Cos;
  f.axis = axis;
  f.frequency = frequency;
  return f;
}

TestFunction TestFunction::sine(std::size_t axis, int frequency) {
  TestFunction f = cosine(axis, frequency);
  f.kind = Kind::Sin;
  return f;
}

TestFunction TestFunction::sawtooth(std::size_t axis) {
  TestFunction f;
  f.kind = Kind::Sawtooth;
  f.axis = axis;
  return f;
}

TestFunction TestFunction::bump(std::vector<double> center, double width) {
  TestFunction f;
  f.kind = Kind::Bump;
  f.center = std::move(center);
  f.width = width;
  return f;
}

TestFunction TestFunction::constant(double value) {
  TestFunction f;
  f.kind = Kind::Constant;
  f.value = value;
  return f;
}

namespace {
constexpr std::array<std::string_view, 5> kTestFunctionNames = {"cos", "sin", "sawtooth", "bump",
                                                                 "constant"};
}  // namespace

std::string_view to_string(TestFunction::Kind kind) noexcept {
  return kTestFunctionNames[static_cast<std::size_t>(kind)];
}

std::optional<TestFunction::Kind> parse_test_function(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kTestFunctionNames.size(); ++i) {
    if (kTestFunctionNames[i] == name) return static_cast<TestFunction::Kind>(i);
  }
  return std::nullopt;
}

void check_test_function(const TestFunction& f, const Geometry& geometry) {
  const auto dim = static_cast<std::size_t>(geometry.dimension());
  switch (f.kind) {
    case TestFunction::Kind::Cos:
    case TestFunction::Kind::Sin:
    case TestFunction::Kind::Sawtooth:
      if (f.axis >= dim) {
        throw std::invalid_argument(
            fmt::format("test function axis {} out of range (dimension {})", f.axis, dim));
      }
      break;
    case TestFunction::Kind::Bump:
      if (f.center.size() != dim) {
        throw std::invalid_argument(
            fmt::format("bump centre needs {} coordinates (got {})", dim, f.center.size()));
      }
      if (!(f.width > 0.0)) throw std::invalid_argument("bump width must be positive");
      break;
    case TestFunction::Kind::Constant:
      if (!std::isfinite(f.value)) throw std::invalid_argument("constant must be finite");
      break;
  }
}

namespace {

// A test function with its bump centre resolved to a point.
struct PreparedFunction {
  const TestFunction* f;
  const Geometry* geometry;
  ProductPoint center;

  PreparedFunction(const TestFunction& fn, const Geometry& g) : f(&fn), geometry(&g) {
    check_test_function(fn, g);
    if (fn.kind == TestFunction::Kind::Bump) {
      const std::span<const double> all(fn.center);
      center = make_point(g, all.first(g.base.size()), all.subspan(g.base.size()));
    }
  }

  double operator()(const ProductPoint& p) const {
    switch (f->kind) {
      case TestFunction::Kind::Cos:
        return std::cos(2.0 * std::numbers::pi * f->frequency *
                        coordinate_value(coordinate_at(p, f->axis)));
      case TestFunction::Kind::Sin:
        return std::sin(2.0 * std::numbers::pi * f->frequency *
                        coordinate_value(coordinate_at(p, f->axis)));
      case TestFunction::Kind::Sawtooth: {
        const Axis& a = axis_at(*geometry, f->axis);
        const double x = coordinate_value(coordinate_at(p, f->axis));
        if (a.kind == AxisKind::Circle || (a.lo == 0.0 && a.hi == 1.0)) return x - 0.5;
        return (x - a.lo) / (a.hi - a.lo) - 0.5;
      }
      case TestFunction::Kind::Bump:
        return std::max(0.0, 1.0 - std::sqrt(squared_distance_unchecked(p, center)) / f->width);
      case TestFunction::Kind::Constant:
        return f->value;
    }
    return 0.0;
  }
};

}  // namespace

double evaluate(const TestFunction& f, const Geometry& geometry, const ProductPoint& p) {
  if (!geometry.contains(p)) throw std::invalid_argument("evaluate: point outside the phase space");
  return PreparedFunction(f, geometry)(p);
}

double sup_norm(const TestFunction& f, const Geometry& geometry) {
  check_test_function(f, geometry);
  switch (f.kind) {
    case TestFunction::Kind::Sawtooth:
      return 0.5;
    case TestFunction::Kind::Constant:
      return std::abs(f.value);
    default:
      return 1.0;
  }
}

std::optional<double> holder_norm(const TestFunction& f, const Geometry& geometry,
                                  double exponent) {
  if (!(exponent > 0.0 && exponent <= 1.0)) {
    throw std::invalid_argument("Holder exponent must lie in (0, 1]");
  }
  check_test_function(f, geometry);
  double lipschitz = 0.0;
  double oscillation = 0.0;
  switch (f.kind) {
    case TestFunction::Kind::Cos:
    case TestFunction::Kind::Sin:
      lipschitz = 2.0 * std::numbers::pi * std::abs(f.frequency);
      oscillation = 2.0;
      break;
    case TestFunction::Kind::Sawtooth: {
      const Axis& a = axis_at(geometry, f.axis);
      if (a.kind == AxisKind::Circle) return std::nullopt;
      lipschitz = 1.0 / (a.hi - a.lo);
      oscillation = 1.0;
      break;
    }
    case TestFunction::Kind::Bump:
      lipschitz = 1.0 / f.width;
      oscillation = 1.0;
      break;
    case TestFunction::Kind::Constant:
      break;
  }
  const double seminorm =
      lipschitz == 0.0 ? 0.0 : std::pow(lipschitz, exponent) * std::pow(oscillation, 1.0 - exponent);
  return sup_norm(f, geometry) + seminorm;
}

// --- correlations ----------------------------------------------------------------------------

DecayReport estimate_correlation_decay(const SystemDescriptor& system, const TestFunction& upsilon,
                                       const TestFunction& psi,
                                       std::span<const std::uint64_t> j_list,
                                       const SamplingOptions& options, double holder_exponent,
                                       const Exec& exec) {
  if (j_list.empty()) throw std::invalid_argument("j_list must not be empty");
  const auto js = sorted_unique(j_list);
  const Plan plan = make_plan(system, options, kDecayStream);
  const Geometry& geometry = system.geometry();
  const PreparedFunction up(upsilon, geometry);
  const PreparedFunction ps(psi, geometry);
  const std::size_t k = js.size();

  DecayReport out;
  out.samples = plan.ensemble.count;
  out.burn_in = plan.burn_in;
  out.holder_exponent = holder_exponent;
  out.psi_sup = sup_norm(psi, geometry);
  out.upsilon_holder = holder_norm(upsilon, geometry, holder_exponent);

  // Values of the first sample; every sample is shifted by them so that
  // constant functions give exactly zero and large means do not cancel.
  double y0 = 0.0;
  std::vector<double> x0(k);

  auto observe = [&](const auto& stepper, ProductPoint p, double& y, std::vector<double>& x) {
    y = up(p);
    std::uint64_t at = 0;
    for (std::size_t t = 0; t < k; ++t) {
      for (; at < js[t]; ++at) {
        if (!stepper(p)) throw OrbitDiverged(plan.burn_in + at, "orbit left the phase space");
      }
      x[t] = ps(p);
    }
  };

  struct Partial {
    long double y{0}, yy{0};
    std::vector<Moments> m;
  };
  std::vector<Partial> partial(
      chunk_count(plan.ensemble.count, std::max<std::uint64_t>(exec.chunk, 1)),
      Partial{0, 0, std::vector<Moments>(k)});

  visit_stepper(system, [&](const auto& stepper) {
    observe(stepper, sample_member(stepper, geometry, plan.ensemble, 0, plan.burn_in), y0, x0);
    parallel_for_chunks(plan.ensemble.count, exec,
                        [&](std::uint64_t c, std::uint64_t begin, std::uint64_t end) {
      auto& acc = partial[c];
      double y = 0.0;
      std::vector<double> x(k);
      for (std::uint64_t i = begin; i < end; ++i) {
        observe(stepper, sample_member(stepper, geometry, plan.ensemble, i, plan.burn_in), y, x);
        const long double yd = y - y0;
        acc.y += yd;
        acc.yy += yd * yd;
        for (std::size_t t = 0; t < k; ++t) {
          const long double xd = x[t] - x0[t];
          auto& m = acc.m[t];
          m.x += xd;
          m.xx += xd * xd;
          m.yx += yd * xd;
          m.yyx += yd * yd * xd;
          m.yxx += yd * xd * xd;
          m.yyxx += yd * yd * xd * xd;
        }
      }
    });
  });

  Partial total{0, 0, std::vector<Moments>(k)};
  for (const auto& p : partial) {
    total.y += p.y;
    total.yy += p.yy;
    for (std::size_t t = 0; t < k; ++t) {
      auto& m = total.m[t];
      m.x += p.m[t].x;
      m.xx += p.m[t].xx;
      m.yx += p.m[t].yx;
      m.yyx += p.m[t].yyx;
      m.yxx += p.m[t].yxx;
      m.yyxx += p.m[t].yyxx;
    }
  }

  const auto s = static_cast<long double>(out.samples);
  const long double a = total.y / s;
  const long double ey2 = total.yy / s;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t t = 0; t < k; ++t) {
    const auto& m = total.m[t];
    const long double b = m.x / s;
    const long double cov = m.yx / s - a * b;
    // E[((Y - a)(X - b))^2] expanded in raw moments.
    const long double ew2 = m.yyxx / s - 2 * b * m.yyx / s + b * b * ey2 - 2 * a * m.yxx / s +
                            4 * a * b * m.yx / s - 2 * a * b * b * a + a * a * m.xx / s -
                            2 * a * a * b * b + a * a * b * b;
    long double var = ew2 - cov * cov;
    if (var < 0) var = 0;
    if (out.samples > 1) var *= s / (s - 1);
    DecayRow row;
    row.j = js[t];
    row.covariance = static_cast<double>(cov);
    row.value = std::abs(row.covariance);
    row.error = static_cast<double>(std::sqrt(var / s));
    xs.push_back(static_cast<double>(row.j));
    ys.push_back(row.value);
    out.rows.push_back(row);
  }
  out.alpha = fit_power(xs, ys, options.fit);
  return out;
}

// --- exponent conditions ------------------------------------------------------------------------

std::vector<std::string> validate(const HypothesisParams& params, int dimension) {
  std::vector<std::string> out;
  if (params.beta && !(*params.beta > 0.0)) {
    out.push_back(fmt::format("beta must be positive (got {})", *params.beta));
  }
  if (params.gamma_prime) {
    const double g = *params.gamma_prime;
    if (!(g > 0.0)) out.push_back(fmt::format("gamma' must be positive (got {})", g));
    if (params.beta && *params.beta > 0.0 && !(g < *params.beta / dimension)) {
      out.push_back(fmt::format("gamma' < beta/D violated: gamma' = {} but beta/D = {}", g,
                                *params.beta / dimension));
    }
  }
  if (params.delta && !(*params.delta > 0.0)) {
    out.push_back(fmt::format("delta must be positive (got {})", *params.delta));
  }
  if (params.kappa && !(*params.kappa >= 1.0)) {
    out.push_back(fmt::format("kappa must be >= 1 (got {})", *params.kappa));
  }
  if (params.delta && params.kappa && *params.delta > 0.0 && *params.kappa > 0.0) {
    const double gap = 1.0 / (1.0 + *params.delta) + 1.0 / *params.kappa - 1.0;
    if (std::abs(gap) > 1e-12) {
      out.push_back(fmt::format(
          "kappa is not conjugate to 1 + delta: 1/(1+delta) + 1/kappa = {} (must be 1)", gap + 1.0));
    }
  }
  if (params.holder_exponent &&
      !(*params.holder_exponent > 0.0 && *params.holder_exponent <= 1.0)) {
    out.push_back(
        fmt::format("Holder exponent must lie in (0, 1] (got {})", *params.holder_exponent));
  }
  if (params.alpha && !(*params.alpha > 0.0)) {
    out.push_back(fmt::format("alpha must be positive (got {})", *params.alpha));
  }
  return out;
}

ThresholdVerdict check_exponent_condition(const HypothesisParams& params, int dimension) {
  if (!params.gamma_prime) throw std::invalid_argument("check_exponent_condition needs gamma'");
  const double g = *params.gamma_prime;
  if (!(g > 0.0)) throw std::invalid_argument(fmt::format("gamma' must be positive (got {})", g));
  if (dimension < 1) throw std::invalid_argument("dimension must be >= 1");
  double kappa = 0.0;
  if (params.kappa) {
    kappa = *params.kappa;
  } else if (params.delta && *params.delta > 0.0) {
    kappa = (1.0 + *params.delta) / *params.delta;
  } else {
    throw std::invalid_argument("check_exponent_condition needs kappa or delta");
  }
  const double d = dimension;
  const double numerator = (1.0 / d) * (1.0 + d * kappa * (1.5 - 1.0 / kappa)) + 1.5;
  ThresholdVerdict out;
  out.threshold = numerator / std::min(g, 0.5);
  out.satisfied = params.alpha.has_value() && *params.alpha > out.threshold;
  return out;
}

ThresholdVerdict check_gouezel_alpha_condition(double alpha_max, double gamma_prime,
                                               int dimension) {
  if (!(gamma_prime > 0.0)) throw std::invalid_argument("gamma' must be positive");
  if (dimension < 1) throw std::invalid_argument("dimension must be >= 1");
  const double m = std::min(gamma_prime, 0.5);
  const double d = dimension;
  ThresholdVerdict out;
  out.threshold = m / (m + (1.0 / d) * (1.0 + d / 2.0) + 1.5);
  out.satisfied = alpha_max < out.threshold;
  return out;
}

}  // namespace evtlab
