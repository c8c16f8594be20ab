#include "evtlab/maps.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <iterator>
#include <utility>

namespace evtlab {
namespace {

constexpr std::array<std::string_view, 6> kMapNames = {
    "linear-expanding", "piecewise-c2", "lsv", "circle-extension", "gouezel", "viana"};

std::string join_violations(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

void check_linear(const LinearExpandingParams& p, std::vector<std::string>& out) {
  if (p.multiplier < 2) out.push_back(fmt::format("multiplier must be >= 2 (got {})", p.multiplier));
}

void check_piecewise(const PiecewiseC2Params& p, std::vector<std::string>& out) {
  const auto& b = p.breakpoints;
  if (b.size() < 3) {
    out.emplace_back("piecewise-c2 needs at least two branches (three breakpoints)");
    return;
  }
  for (std::size_t i = 1; i < b.size(); ++i) {
    if (!(b[i] > b[i - 1])) {
      out.emplace_back("piecewise-c2 breakpoints must be strictly increasing");
      return;
    }
  }
  if (!(std::abs(p.distortion) > 0.0 && std::abs(p.distortion) < 1.0)) {
    out.push_back(fmt::format(
        "piecewise-c2 distortion must satisfy 0 < |c| < 1 (got {}); affine branches belong to "
        "linear-expanding",
        p.distortion));
    return;
  }
  const double length = b.back() - b.front();
  double widest = 0.0;
  for (std::size_t i = 1; i < b.size(); ++i) widest = std::max(widest, b[i] - b[i - 1]);
  const double min_slope = (1.0 - std::abs(p.distortion)) * length / widest;
  if (!(min_slope > 1.0)) {
    out.push_back(fmt::format("piecewise-c2 is not uniformly expanding: min |T'| = {} <= 1",
                              min_slope));
  }
}

void check_lsv(const LsvParams& p, std::vector<std::string>& out) {
  if (!(p.omega > 0.0 && p.omega < 1.0)) {
    out.push_back(fmt::format("lsv omega must lie in (0, 1) (got {})", p.omega));
  }
}

void check_cocycle(const CocycleSpec& h, std::vector<std::string>& out) {
  if (!(h.holder_exponent() > 0.0 && h.holder_exponent() <= 1.0)) {
    out.push_back(
        fmt::format("cocycle Holder exponent must lie in (0, 1] (got {})", h.holder_exponent()));
  }
  if (h.form() == CocycleSpec::Form::Table && h.values().size() < 2) {
    out.emplace_back("cocycle table needs at least two values");
  }
  if (!std::isfinite(h.coefficient())) out.emplace_back("cocycle coefficient must be finite");
}

void check_viana(const VianaParams& p, std::vector<std::string>& out) {
  if (p.multiplier < 16) {
    out.push_back(fmt::format("viana multiplier must be >= 16 (got {})", p.multiplier));
  }
  if (!(p.trap_lo < p.trap_hi)) out.emplace_back("viana trapping interval must have lo < hi");
  if (!std::isfinite(p.a0) || !std::isfinite(p.alpha)) {
    out.emplace_back("viana a0 and alpha must be finite");
  }
}

Axis base_axis(const BaseMapParams& base) {
  return std::visit(
      [](const auto& prm) -> Axis {
        using T = std::decay_t<decltype(prm)>;
        if constexpr (std::is_same_v<T, LinearExpandingParams>) {
          return Axis::circle();
        } else if constexpr (std::is_same_v<T, PiecewiseC2Params>) {
          return Axis::interval(prm.breakpoints.front(), prm.breakpoints.back());
        } else {
          return Axis::interval(0.0, 1.0);
        }
      },
      base);
}

Geometry geometry_of(const SystemParams& params) {
  Geometry g;
  std::visit(
      [&g](const auto& prm) {
        using T = std::decay_t<decltype(prm)>;
        if constexpr (std::is_same_v<T, CircleExtensionParams>) {
          g.base.push_back(base_axis(prm.base));
          g.fiber.push_back(Axis::circle());
        } else if constexpr (std::is_same_v<T, GouezelParams>) {
          g.base.push_back(Axis::circle());
          g.fiber.push_back(Axis::interval(0.0, 1.0));
        } else if constexpr (std::is_same_v<T, VianaParams>) {
          g.base.push_back(Axis::circle());
          g.fiber.push_back(Axis::interval(prm.trap_lo, prm.trap_hi));
        } else {
          g.base.push_back(base_axis(BaseMapParams{prm}));
        }
      },
      params);
  return g;
}

template <class T>
T& coord_as(Coordinate& c, const char* what) {
  auto* v = std::get_if<T>(&c);
  if (v == nullptr) throw std::invalid_argument(fmt::format("{}: wrong coordinate kind", what));
  return *v;
}

void require_shape(const ProductPoint& p, std::size_t base, std::size_t fiber, const char* what) {
  if (p.base.size() != base || p.fiber.size() != fiber) {
    throw std::invalid_argument(
        fmt::format("{}: expected {} base and {} fiber coordinates", what, base, fiber));
  }
}

}  // namespace

// --- cocycles ----------------------------------------------------------------

CocycleSpec CocycleSpec::linear(double slope, double holder_exponent) {
  CocycleSpec h;
  h.form_ = Form::Linear;
  h.coefficient_ = slope;
  h.holder_exponent_ = holder_exponent;
  return h;
}

CocycleSpec CocycleSpec::trigonometric(double amplitude, double holder_exponent) {
  CocycleSpec h;
  h.form_ = Form::Trigonometric;
  h.coefficient_ = amplitude;
  h.holder_exponent_ = holder_exponent;
  return h;
}

CocycleSpec CocycleSpec::table(std::vector<double> values, double holder_exponent) {
  CocycleSpec h;
  h.form_ = Form::Table;
  h.table_ = std::move(values);
  h.holder_exponent_ = holder_exponent;
  return h;
}

double CocycleSpec::operator()(double x) const noexcept {
  double raw = 0.0;
  switch (form_) {
    case Form::Linear:
      raw = coefficient_ * x;
      break;
    case Form::Trigonometric:
      raw = coefficient_ * std::cos(2.0 * std::numbers::pi * x);
      break;
    case Form::Table: {
      const double t = std::clamp(x, 0.0, 1.0) * static_cast<double>(table_.size() - 1);
      const auto i = std::min(static_cast<std::size_t>(t), table_.size() - 2);
      const double frac = t - static_cast<double>(i);
      raw = table_[i] + frac * (table_[i + 1] - table_[i]);
      break;
    }
  }
  const double r = raw - std::floor(raw);
  return r >= 1.0 ? 0.0 : r;
}

std::optional<std::int64_t> CocycleSpec::integer_slope() const noexcept {
  if (form_ != Form::Linear) return std::nullopt;
  if (std::abs(coefficient_) > 9.0e15 || coefficient_ != std::trunc(coefficient_)) return std::nullopt;
  return static_cast<std::int64_t>(coefficient_);
}

// --- alpha profile -------------------------------------------------------------

std::vector<std::string> AlphaProfile::violations(double alpha_min, double alpha_max) {
  std::vector<std::string> out;
  if (!(alpha_min > 0.0)) out.push_back(fmt::format("alpha_min > 0 (got {})", alpha_min));
  if (!(alpha_min < alpha_max)) {
    out.push_back(fmt::format("alpha_min < alpha_max (got {} >= {})", alpha_min, alpha_max));
  }
  if (!(alpha_max < 1.0)) out.push_back(fmt::format("alpha_max < 1 (got {})", alpha_max));
  if (!(alpha_max < 1.5 * alpha_min)) {
    out.push_back(fmt::format("alpha_max < 1.5*alpha_min (got {} >= {})", alpha_max,
                              1.5 * alpha_min));
  }
  return out;
}

AlphaProfile AlphaProfile::cosine(double alpha_min, double alpha_max) {
  const auto bad = violations(alpha_min, alpha_max);
  if (!bad.empty()) throw std::invalid_argument("invalid alpha profile: " + join_violations(bad));
  return AlphaProfile(alpha_min, alpha_max);
}

double alpha_profile(CircleCoord omega, const AlphaProfile& profile) noexcept {
  return profile(omega.value());
}

// --- system descriptor -------------------------------------------------------------

std::string_view to_string(MapKind kind) noexcept {
  return kMapNames[static_cast<std::size_t>(kind)];
}

std::optional<MapKind> parse_map_kind(std::string_view name) noexcept {
  const auto* it = std::find(kMapNames.begin(), kMapNames.end(), name);
  if (it == kMapNames.end()) return std::nullopt;
  return static_cast<MapKind>(std::distance(kMapNames.begin(), it));
}

std::vector<std::string> validate(const SystemParams& params) {
  std::vector<std::string> out;
  std::visit(
      [&out](const auto& prm) {
        using T = std::decay_t<decltype(prm)>;
        if constexpr (std::is_same_v<T, LinearExpandingParams>) {
          check_linear(prm, out);
        } else if constexpr (std::is_same_v<T, PiecewiseC2Params>) {
          check_piecewise(prm, out);
        } else if constexpr (std::is_same_v<T, LsvParams>) {
          check_lsv(prm, out);
        } else if constexpr (std::is_same_v<T, CircleExtensionParams>) {
          std::visit(
              [&out](const auto& base) {
                using B = std::decay_t<decltype(base)>;
                if constexpr (std::is_same_v<B, LinearExpandingParams>) {
                  check_linear(base, out);
                } else if constexpr (std::is_same_v<B, PiecewiseC2Params>) {
                  check_piecewise(base, out);
                } else {
                  check_lsv(base, out);
                }
              },
              prm.base);
          check_cocycle(prm.cocycle, out);
        } else if constexpr (std::is_same_v<T, VianaParams>) {
          check_viana(prm, out);
        }
        // GouezelParams carries an AlphaProfile, which cannot exist invalid.
      },
      params);
  return out;
}

SystemDescriptor::SystemDescriptor(SystemParams params) : params_(std::move(params)) {
  const auto bad = validate(params_);
  if (!bad.empty()) throw std::invalid_argument("invalid system: " + join_violations(bad));
  geometry_ = geometry_of(params_);
}

std::uint64_t SystemDescriptor::default_burn_in() const noexcept {
  const bool neutral = std::visit(
      [](const auto& prm) {
        using T = std::decay_t<decltype(prm)>;
        if constexpr (std::is_same_v<T, LsvParams> || std::is_same_v<T, GouezelParams>) {
          return true;
        } else if constexpr (std::is_same_v<T, CircleExtensionParams>) {
          return std::holds_alternative<LsvParams>(prm.base);
        } else {
          return false;
        }
      },
      params_);
  return neutral ? 10'000 : 1'000;
}

bool SystemDescriptor::lebesgue_invariant() const noexcept {
  if (std::holds_alternative<LinearExpandingParams>(params_)) return true;
  if (const auto* ext = std::get_if<CircleExtensionParams>(&params_)) {
    return std::holds_alternative<LinearExpandingParams>(ext->base);
  }
  return false;
}

SystemDescriptor SystemDescriptor::base_system() const {
  return std::visit(
      [](const auto& prm) -> SystemDescriptor {
        using T = std::decay_t<decltype(prm)>;
        if constexpr (std::is_same_v<T, CircleExtensionParams>) {
          return std::visit([](const auto& b) { return SystemDescriptor(SystemParams{b}); },
                            prm.base);
        } else if constexpr (std::is_same_v<T, GouezelParams>) {
          return SystemDescriptor(LinearExpandingParams{4});
        } else if constexpr (std::is_same_v<T, VianaParams>) {
          return SystemDescriptor(LinearExpandingParams{prm.multiplier});
        } else {
          return SystemDescriptor(SystemParams{prm});
        }
      },
      params_);
}

// --- steps ---------------------------------------------------------------------------

namespace detail {

double piecewise_c2_branch(double x, const PiecewiseC2Params& params) noexcept {
  const auto& b = params.breakpoints;
  const auto upper = std::upper_bound(b.begin() + 1, b.end() - 1, x);
  const auto j = static_cast<std::size_t>(std::distance(b.begin(), upper)) - 1;
  const double t = std::clamp((x - b[j]) / (b[j + 1] - b[j]), 0.0, 1.0);
  double phi = t + params.distortion * t * (1.0 - t);
  if (params.alternating && (j % 2 == 1)) phi = 1.0 - phi;
  return std::clamp(b.front() + (b.back() - b.front()) * phi, b.front(), b.back());
}

std::optional<std::uint64_t> exact_cocycle_slope(const CircleExtensionParams& params) noexcept {
  if (!std::holds_alternative<LinearExpandingParams>(params.base)) return std::nullopt;
  const auto slope = params.cocycle.integer_slope();
  if (!slope) return std::nullopt;
  // Reduce the signed slope into [0, P).
  const auto m = static_cast<std::int64_t>(*slope);
  if (m >= 0) return static_cast<std::uint64_t>(m);
  return kCircleModulus - static_cast<std::uint64_t>(-m);
}

}  // namespace detail

IntervalCoord step_lsv(IntervalCoord x, double omega) {
  if (!(omega > 0.0 && omega < 1.0)) {
    throw std::invalid_argument(fmt::format("lsv omega must lie in (0, 1) (got {})", omega));
  }
  return IntervalCoord{detail::lsv_map(x.value, omega)};
}

IntervalCoord step_piecewise_c2(IntervalCoord x, const PiecewiseC2Params& params) {
  return IntervalCoord{detail::piecewise_c2_branch(x.value, params)};
}

ProductPoint step_circle_extension(const ProductPoint& p, const BaseMapParams& base,
                                   const CocycleSpec& h) {
  require_shape(p, 1, 1, "step_circle_extension");
  if (!std::holds_alternative<CircleCoord>(p.fiber[0])) {
    throw std::invalid_argument("step_circle_extension: fiber must be a circle coordinate");
  }
  CircleExtensionParams params{base, h};
  const SystemDescriptor system(params);
  if (!system.geometry().contains(p)) {
    throw std::invalid_argument("step_circle_extension: point outside the phase space");
  }
  return step(system, p);
}

ProductPoint step_gouezel(const ProductPoint& p, const AlphaProfile& profile) {
  require_shape(p, 1, 1, "step_gouezel");
  ProductPoint out = p;
  coord_as<CircleCoord>(out.base[0], "step_gouezel");
  coord_as<IntervalCoord>(out.fiber[0], "step_gouezel");
  GouezelStepper{&profile}(out);
  return out;
}

ProductPoint step_viana(const ProductPoint& p, const VianaParams& params) {
  require_shape(p, 1, 1, "step_viana");
  ProductPoint out = p;
  coord_as<CircleCoord>(out.base[0], "step_viana");
  coord_as<IntervalCoord>(out.fiber[0], "step_viana");
  if (!VianaStepper{&params}(out)) {
    throw OrbitDiverged(0, fmt::format("viana fiber left [{}, {}] from x = {}", params.trap_lo,
                                       params.trap_hi, std::get<IntervalCoord>(p.fiber[0]).value));
  }
  return out;
}

ProductPoint step(const SystemDescriptor& system, const ProductPoint& p) {
  if (!system.geometry().contains(p)) {
    throw std::invalid_argument("step: point " + describe(p) + " outside the phase space");
  }
  ProductPoint out = p;
  const bool ok = visit_stepper(system, [&out](const auto& stepper) { return stepper(out); });
  if (!ok) throw OrbitDiverged(0, "orbit left the phase space at " + describe(p));
  return out;
}

}  // namespace evtlab
