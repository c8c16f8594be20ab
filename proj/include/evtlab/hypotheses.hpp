#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evtlab/geometry.hpp"
#include "evtlab/maps.hpp"
#include "evtlab/parallel.hpp"

namespace evtlab {

/// g(n): the return horizon of the rapidly returning set.
class ReturnHorizon {
 public:
  /// g(n) = ceil(n^{D gamma'}).
  static ReturnHorizon power(double gamma_prime, int dimension);
  /// g(n) = g for every n.
  static ReturnHorizon fixed(std::uint64_t g);

  [[nodiscard]] std::uint64_t operator()(std::uint64_t n) const;
  [[nodiscard]] bool is_fixed() const noexcept { return fixed_ > 0; }
  [[nodiscard]] double gamma_prime() const noexcept { return gamma_prime_; }
  [[nodiscard]] int dimension() const noexcept { return dimension_; }
  [[nodiscard]] std::uint64_t fixed_value() const noexcept { return fixed_; }

 private:
  ReturnHorizon() = default;
  double gamma_prime_{0.0};
  int dimension_{1};
  std::uint64_t fixed_{0};
};

struct FitRange {
  double lo{0.0};
  double hi{std::numeric_limits<double>::infinity()};

  [[nodiscard]] bool contains(double x) const noexcept { return x >= lo && x <= hi; }
};

struct PowerFit {
  std::optional<double> exponent;  // minus the log-log slope; empty with < 2 usable points
  double intercept{0.0};
  std::size_t points{0};
  FitRange range;
};

struct EnMeasureRow {
  std::uint64_t n{0};
  std::uint64_t horizon{0};
  std::uint64_t hits{0};
  double measure{0.0};
  double error{0.0};
  double upper_bound{0.0};  // one-sided 95% bound (rule of three) when hits == 0
};

struct EnMeasureReport {
  std::vector<EnMeasureRow> rows;
  PowerFit beta;
  std::uint64_t samples{0};
  std::uint64_t burn_in{0};
  bool uniform_sampling{false};
};

struct SamplingOptions {
  std::uint64_t samples{10'000};
  std::uint64_t seed{0};
  std::optional<std::uint64_t> burn_in;  // system default when empty
  FitRange fit;
};

/// μ_X(E_n^X), E_n^X = {x : d_X(T^j x, x) < 1/n for some 1 <= j <= g(n)}, for
/// the base of `system`. Linear expanding bases are sampled uniformly (Lebesgue
/// is invariant), other bases by uniform start plus burn-in.
[[nodiscard]] EnMeasureReport estimate_en_measure(const SystemDescriptor& system,
                                                  std::span<const std::uint64_t> n_list,
                                                  const ReturnHorizon& horizon,
                                                  const SamplingOptions& options,
                                                  const Exec& exec = {});

struct ProductEnRow {
  std::uint64_t n{0};
  std::uint64_t horizon{0};
  std::uint64_t product_hits{0};
  std::uint64_t base_hits{0};
  double product_measure{0.0};
  double product_error{0.0};
  double base_measure{0.0};
  double base_error{0.0};
};

struct ProductEnReport {
  std::vector<ProductEnRow> rows;
  std::uint64_t samples{0};
  std::uint64_t burn_in{0};
  std::uint64_t inclusion_checks{0};  // samples x n values checked
};

/// ν(Ẽ_n) with the product metric, and the same samples' base hits. Every
/// product hit is checked to be a base hit; a failure throws std::logic_error.
[[nodiscard]] ProductEnReport estimate_product_en_measure(const SystemDescriptor& system,
                                                          std::span<const std::uint64_t> n_list,
                                                          const ReturnHorizon& horizon,
                                                          const SamplingOptions& options,
                                                          const Exec& exec = {});

/// Built-in Hölder test functions of one coordinate (or of the whole point for
/// the bump). Coordinates are indexed base first, then fiber.
struct TestFunction {
  enum class Kind { Cos, Sin, Sawtooth, Bump, Constant };

  Kind kind{Kind::Cos};
  std::size_t axis{0};
  int frequency{1};
  std::vector<double> center;  // bump centre, one real per coordinate
  double width{0.1};
  double value{1.0};  // constant

  static TestFunction cosine(std::size_t axis = 0, int frequency = 1);
  static TestFunction sine(std::size_t axis = 0, int frequency = 1);
  static TestFunction sawtooth(std::size_t axis = 0);
  static TestFunction bump(std::vector<double> center, double width);
  static TestFunction constant(double value);
};

[[nodiscard]] std::string_view to_string(TestFunction::Kind kind) noexcept;
[[nodiscard]] std::optional<TestFunction::Kind> parse_test_function(std::string_view name) noexcept;

/// Throws std::invalid_argument when f does not fit the geometry.
void check_test_function(const TestFunction& f, const Geometry& geometry);

/// f(p). The sawtooth is x - 1/2 on [0, 1] and circle axes, rescaled to
/// [-1/2, 1/2] on other intervals.
[[nodiscard]] double evaluate(const TestFunction& f, const Geometry& geometry,
                              const ProductPoint& p);

[[nodiscard]] double sup_norm(const TestFunction& f, const Geometry& geometry);

/// sup|f| + Hölder constant of exponent a, bounded by L^a * osc^{1-a} from the
/// Lipschitz constant L and oscillation osc. Empty when f is not Hölder on the
/// phase space (the sawtooth on a circle axis jumps at 0).
[[nodiscard]] std::optional<double> holder_norm(const TestFunction& f, const Geometry& geometry,
                                                double exponent);

struct DecayRow {
  std::uint64_t j{0};
  double covariance{0.0};  // signed estimate
  double value{0.0};       // |covariance|
  double error{0.0};
};

struct DecayReport {
  std::vector<DecayRow> rows;
  PowerFit alpha;
  double psi_sup{0.0};
  std::optional<double> upsilon_holder;
  double holder_exponent{1.0};
  std::uint64_t samples{0};
  std::uint64_t burn_in{0};
};

/// |E[Ψ∘f^j Υ] - E[Υ] E[Ψ]| under ν for each j, with standard errors
/// sd((Υ - E Υ)(Ψ∘f^j - E Ψ∘f^j)) / sqrt(S).
[[nodiscard]] DecayReport estimate_correlation_decay(const SystemDescriptor& system,
                                                     const TestFunction& upsilon,
                                                     const TestFunction& psi,
                                                     std::span<const std::uint64_t> j_list,
                                                     const SamplingOptions& options,
                                                     double holder_exponent = 1.0,
                                                     const Exec& exec = {});

struct HypothesisParams {
  std::optional<double> beta;
  std::optional<double> gamma_prime;
  std::optional<double> alpha;
  std::optional<double> holder_exponent;
  std::optional<double> delta;
  std::optional<double> kappa;
};

/// Every inconsistency among the given parameters (β > 0, 0 < γ' < β/D,
/// δ > 0, κ conjugate to 1 + δ, 0 < Hölder exponent <= 1).
[[nodiscard]] std::vector<std::string> validate(const HypothesisParams& params, int dimension);

struct ThresholdVerdict {
  double threshold{0.0};
  bool satisfied{false};
};

/// α > [(1/D)(1 + Dκ(3/2 - 1/κ)) + 3/2] / min(γ', 1/2). Needs γ' and κ;
/// satisfied is false when α is absent. Throws std::invalid_argument for γ' <= 0.
[[nodiscard]] ThresholdVerdict check_exponent_condition(const HypothesisParams& params,
                                                        int dimension);

/// α_max < m / (m + (1/D)(1 + D/2) + 3/2) with m = min(γ', 1/2).
[[nodiscard]] ThresholdVerdict check_gouezel_alpha_condition(double alpha_max,
                                                             double gamma_prime, int dimension);

}  // namespace evtlab
