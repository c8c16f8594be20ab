#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "evtlab/circle.hpp"
#include "evtlab/geometry.hpp"

namespace evtlab {

/// Raised when an orbit leaves its phase space (Viana fiber escape). Carries
/// the index of the step that produced the out-of-range point.
class OrbitDiverged : public std::runtime_error {
 public:
  OrbitDiverged(std::uint64_t step, const std::string& what)
      : std::runtime_error(what), step_(step) {}

  [[nodiscard]] std::uint64_t step() const noexcept { return step_; }

 private:
  std::uint64_t step_;
};

// --- parameters -----------------------------------------------------------

/// x -> d*x mod 1 on the circle, iterated in exact fixed-point arithmetic.
struct LinearExpandingParams {
  std::uint64_t multiplier{2};
};

/// Piecewise C^2 expanding map of [b_0, b_m]. Branch j maps [b_j, b_{j+1})
/// onto the whole interval through phi(t) = t + c*t*(1 - t), reversed on odd
/// branches when `alternating` is set.
struct PiecewiseC2Params {
  std::vector<double> breakpoints{0.0, 0.5, 1.0};
  double distortion{0.25};
  bool alternating{false};
};

/// Liverani-Saussol-Vaienti map with neutral fixed point at 0.
struct LsvParams {
  double omega{0.5};
};

using BaseMapParams = std::variant<LinearExpandingParams, PiecewiseC2Params, LsvParams>;

/// Circle-valued cocycle h: X -> S^1, always reduced mod 1.
class CocycleSpec {
 public:
  enum class Form { Linear, Trigonometric, Table };

  CocycleSpec() = default;

  /// h(x) = slope * x mod 1.
  static CocycleSpec linear(double slope = 1.0, double holder_exponent = 1.0);
  /// h(x) = amplitude * cos(2 pi x) mod 1.
  static CocycleSpec trigonometric(double amplitude, double holder_exponent = 1.0);
  /// Piecewise-linear interpolation of values at the uniform nodes i/(m-1) of [0, 1].
  static CocycleSpec table(std::vector<double> values, double holder_exponent = 1.0);

  [[nodiscard]] Form form() const noexcept { return form_; }
  [[nodiscard]] double coefficient() const noexcept { return coefficient_; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return table_; }
  [[nodiscard]] double holder_exponent() const noexcept { return holder_exponent_; }

  /// h(x) in [0, 1).
  [[nodiscard]] double operator()(double x) const noexcept;

  /// Integer slope of a linear cocycle, when it has one. Such cocycles act on
  /// fixed-point circle bases exactly.
  [[nodiscard]] std::optional<std::int64_t> integer_slope() const noexcept;

 private:
  Form form_{Form::Linear};
  double coefficient_{1.0};
  std::vector<double> table_;
  double holder_exponent_{1.0};
};

/// alpha(w) = a_min + (a_max - a_min) * (1 - cos 2 pi w) / 2.
///
/// C^2, minimal only at w = 0 where alpha'' = (a_max - a_min) * 2 pi^2 > 0.
/// The constructor enforces 0 < a_min < a_max < 1 and a_max < 1.5 a_min.
class AlphaProfile {
 public:
  enum class Form { Cosine };

  static AlphaProfile cosine(double alpha_min, double alpha_max);

  /// Every violated constraint, worded for humans; empty when valid.
  static std::vector<std::string> violations(double alpha_min, double alpha_max);

  [[nodiscard]] Form form() const noexcept { return Form::Cosine; }
  [[nodiscard]] double alpha_min() const noexcept { return alpha_min_; }
  [[nodiscard]] double alpha_max() const noexcept { return alpha_max_; }

  [[nodiscard]] double operator()(double omega) const noexcept {
    const double a =
        alpha_min_ + span_ * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * omega));
    return std::clamp(a, alpha_min_, alpha_max_);
  }

 private:
  AlphaProfile(double alpha_min, double alpha_max)
      : alpha_min_(alpha_min), alpha_max_(alpha_max), span_(alpha_max - alpha_min) {}

  double alpha_min_;
  double alpha_max_;
  double span_;
};

struct CircleExtensionParams {
  BaseMapParams base{LinearExpandingParams{}};
  CocycleSpec cocycle{};
};

struct GouezelParams {
  AlphaProfile profile{AlphaProfile::cosine(0.10, 0.14)};
};

enum class VianaForcing { Sin, Cos };

/// Real parameter where 0 is pre-periodic for a - x^2: 0 -> a -> a - a^2 lands
/// on the fixed point after three steps.
inline constexpr double kMisiurewiczA0 = 1.5436890126920764;

/// (theta, x) -> (d*theta mod 1, a0 + alpha*b(theta) - x^2) with b = sin or
/// cos of 2 pi theta. Leaving [trap_lo, trap_hi] is reported, never clamped.
struct VianaParams {
  std::uint64_t multiplier{16};
  double a0{kMisiurewiczA0};
  double alpha{0.01};
  VianaForcing forcing{VianaForcing::Sin};
  double trap_lo{-2.0};
  double trap_hi{2.0};
};

using SystemParams = std::variant<LinearExpandingParams, PiecewiseC2Params, LsvParams,
                                  CircleExtensionParams, GouezelParams, VianaParams>;

enum class MapKind { LinearExpanding, PiecewiseC2, Lsv, CircleExtension, Gouezel, Viana };

[[nodiscard]] std::string_view to_string(MapKind kind) noexcept;
[[nodiscard]] std::optional<MapKind> parse_map_kind(std::string_view name) noexcept;

/// Every constraint the parameters violate; empty when valid.
[[nodiscard]] std::vector<std::string> validate(const SystemParams& params);

/// A validated dynamical system together with its phase-space geometry.
class SystemDescriptor {
 public:
  /// Throws std::invalid_argument listing every violated constraint.
  explicit SystemDescriptor(SystemParams params);

  [[nodiscard]] MapKind kind() const noexcept { return static_cast<MapKind>(params_.index()); }
  [[nodiscard]] const SystemParams& params() const noexcept { return params_; }
  [[nodiscard]] const Geometry& geometry() const noexcept { return geometry_; }
  [[nodiscard]] int base_dimension() const noexcept { return geometry_.base_dimension(); }
  [[nodiscard]] int fiber_dimension() const noexcept { return geometry_.fiber_dimension(); }
  [[nodiscard]] int dimension() const noexcept { return geometry_.dimension(); }

  /// 10^4 for systems with a neutral fixed point, 10^3 otherwise.
  [[nodiscard]] std::uint64_t default_burn_in() const noexcept;

  /// True when Lebesgue measure is invariant (exact linear bases with any
  /// circle cocycle), so uniform sampling draws from the invariant measure.
  [[nodiscard]] bool lebesgue_invariant() const noexcept;

  /// The base map T alone, for base-only statistics.
  [[nodiscard]] SystemDescriptor base_system() const;

 private:
  SystemParams params_;
  Geometry geometry_;
};

// --- single-step maps -------------------------------------------------------

[[nodiscard]] constexpr CircleCoord step_base_expanding(CircleCoord x, std::uint64_t d) noexcept {
  return CircleCoord::from_ticks(mul_mod(x.ticks(), d));
}

namespace detail {

inline double lsv_branch(double x, double omega) noexcept {
  // x (1 + 2^w x^w) == x + x (2x)^w on the left branch.
  if (x < 0.5) return x + x * std::pow(2.0 * x, omega);
  return 2.0 * x - 1.0;
}

// Hot-path variant with sqrt for the common w = 1/2.
inline double lsv_branch_half(double x) noexcept {
  if (x < 0.5) return x + x * std::sqrt(2.0 * x);
  return 2.0 * x - 1.0;
}

inline double lsv_map(double x, double omega) noexcept {
  return omega == 0.5 ? lsv_branch_half(x) : lsv_branch(x, omega);
}

double piecewise_c2_branch(double x, const PiecewiseC2Params& params) noexcept;

}  // namespace detail

/// LSV step on [0, 1]. Throws std::invalid_argument unless 0 < omega < 1.
[[nodiscard]] IntervalCoord step_lsv(IntervalCoord x, double omega);

[[nodiscard]] IntervalCoord step_piecewise_c2(IntervalCoord x, const PiecewiseC2Params& params);

[[nodiscard]] double alpha_profile(CircleCoord omega, const AlphaProfile& profile) noexcept;

/// f(x, theta) = (T x, theta + h(x)) with h evaluated at the pre-step x.
[[nodiscard]] ProductPoint step_circle_extension(const ProductPoint& p, const BaseMapParams& base,
                                                 const CocycleSpec& h);

/// (w, x) -> (4w mod 1, T_{alpha(w)}(x)) with alpha taken at the pre-step w.
[[nodiscard]] ProductPoint step_gouezel(const ProductPoint& p, const AlphaProfile& profile);

/// Throws OrbitDiverged (step 0) when the fiber leaves the trapping interval.
[[nodiscard]] ProductPoint step_viana(const ProductPoint& p, const VianaParams& params);

// --- steppers ---------------------------------------------------------------
//
// Each stepper advances a point in place and returns false if the new point
// would leave the phase space (the point is then left unchanged). They are
// small value types so hot loops can be instantiated per system kind.

struct LinearExpandingStepper {
  std::uint64_t multiplier;

  bool operator()(ProductPoint& p) const noexcept {
    auto& x = *std::get_if<CircleCoord>(&p.base[0]);
    x = step_base_expanding(x, multiplier);
    return true;
  }
};

struct PiecewiseC2Stepper {
  const PiecewiseC2Params* params;

  bool operator()(ProductPoint& p) const noexcept {
    auto& x = *std::get_if<IntervalCoord>(&p.base[0]);
    x.value = detail::piecewise_c2_branch(x.value, *params);
    return true;
  }
};

struct LsvStepper {
  double omega;

  bool operator()(ProductPoint& p) const noexcept {
    auto& x = *std::get_if<IntervalCoord>(&p.base[0]);
    x.value = detail::lsv_map(x.value, omega);
    return true;
  }
};

template <class BaseStepper>
struct CircleExtensionStepper {
  BaseStepper base;
  const CocycleSpec* cocycle;
  // Set when the base is an exact circle map and h(x) = s*x with integer s.
  std::optional<std::uint64_t> exact_slope;

  bool operator()(ProductPoint& p) const noexcept {
    auto& theta = *std::get_if<CircleCoord>(&p.fiber[0]);
    CircleCoord shift;
    if (exact_slope) {
      shift = CircleCoord::from_ticks(
          mul_mod(std::get_if<CircleCoord>(&p.base[0])->ticks(), *exact_slope));
    } else {
      shift = CircleCoord::from_real((*cocycle)(coordinate_value(p.base[0])));
    }
    base(p);
    theta = rotate(theta, shift);
    return true;
  }
};

struct GouezelStepper {
  const AlphaProfile* profile;

  bool operator()(ProductPoint& p) const noexcept {
    auto& w = *std::get_if<CircleCoord>(&p.base[0]);
    auto& x = *std::get_if<IntervalCoord>(&p.fiber[0]);
    x.value = detail::lsv_branch(x.value, (*profile)(w.value()));
    w = step_base_expanding(w, 4);
    return true;
  }
};

struct VianaStepper {
  const VianaParams* params;

  bool operator()(ProductPoint& p) const noexcept {
    auto& theta = *std::get_if<CircleCoord>(&p.base[0]);
    auto& x = *std::get_if<IntervalCoord>(&p.fiber[0]);
    const double angle = 2.0 * std::numbers::pi * theta.value();
    const double b = params->forcing == VianaForcing::Sin ? std::sin(angle) : std::cos(angle);
    const double next = params->a0 + params->alpha * b - x.value * x.value;
    if (!(next >= params->trap_lo && next <= params->trap_hi)) return false;
    x.value = next;
    theta = step_base_expanding(theta, params->multiplier);
    return true;
  }
};

namespace detail {

inline LinearExpandingStepper make_base_stepper(const LinearExpandingParams& prm) noexcept {
  return {prm.multiplier};
}
inline PiecewiseC2Stepper make_base_stepper(const PiecewiseC2Params& prm) noexcept {
  return {&prm};
}
inline LsvStepper make_base_stepper(const LsvParams& prm) noexcept { return {prm.omega}; }

std::optional<std::uint64_t> exact_cocycle_slope(const CircleExtensionParams& params) noexcept;

}  // namespace detail

/// Calls f with a stepper specialised for the system's map, so loops written
/// inside f compile to one straight-line step per iteration.
template <class F>
decltype(auto) visit_stepper(const SystemDescriptor& system, F&& f) {
  return std::visit(
      [&f](const auto& prm) -> decltype(auto) {
        using T = std::decay_t<decltype(prm)>;
        if constexpr (std::is_same_v<T, CircleExtensionParams>) {
          const auto slope = detail::exact_cocycle_slope(prm);
          return std::visit(
              [&](const auto& base_prm) -> decltype(auto) {
                auto base = detail::make_base_stepper(base_prm);
                return f(CircleExtensionStepper<decltype(base)>{base, &prm.cocycle, slope});
              },
              prm.base);
        } else if constexpr (std::is_same_v<T, GouezelParams>) {
          return f(GouezelStepper{&prm.profile});
        } else if constexpr (std::is_same_v<T, VianaParams>) {
          return f(VianaStepper{&prm});
        } else {
          return f(detail::make_base_stepper(prm));
        }
      },
      system.params());
}

/// One step of any system. Throws OrbitDiverged (step 0) on escape.
[[nodiscard]] ProductPoint step(const SystemDescriptor& system, const ProductPoint& p);

}  // namespace evtlab
