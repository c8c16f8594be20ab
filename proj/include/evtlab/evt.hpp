#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "evtlab/geometry.hpp"
#include "evtlab/maps.hpp"
#include "evtlab/orbit.hpp"
#include "evtlab/parallel.hpp"
#include "evtlab/stats.hpp"

namespace evtlab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Phi from a squared distance: -log d, +inf at d = 0.
[[nodiscard]] inline double phi_from_squared(double d2) noexcept {
  return d2 == 0.0 ? kInfinity : -0.5 * std::log(d2);
}

/// -log d(p, target); +inf when the points coincide. Throws
/// std::invalid_argument when the shapes differ.
[[nodiscard]] double observable_phi(const ProductPoint& p, const ProductPoint& target);

/// u_n = v + log(n) / D. Throws std::invalid_argument unless n >= 1 and D >= 1.
[[nodiscard]] double scaling_un(double v, double n, int dimension);

/// Largest value; +inf propagates. Throws std::invalid_argument when empty.
[[nodiscard]] double block_maximum(std::span<const double> phi_values);
[[nodiscard]] double block_maximum(std::span<const ProductPoint> orbit, const ProductPoint& target);

/// exp(-H e^{-D v}). Throws std::invalid_argument for H < 0.
[[nodiscard]] double gumbel_limit(double v, double H, int dimension);

/// Volume of the Euclidean unit ball in R^D: pi^{D/2} / Gamma(D/2 + 1).
[[nodiscard]] double unit_ball_volume(int dimension);

/// Lebesgue volume of the metric ball B_r(center) inside the phase space.
/// Interval axes truncate the ball exactly for D <= 2; a circle axis is the
/// chart [c - 1/2, c + 1/2] around the centre, which is exact for the arc
/// metric. Truncated balls in D > 2 throw std::domain_error.
[[nodiscard]] double ball_volume(const Geometry& geometry, const ProductPoint& center, double r);

/// sup_i |empirical_i - theoretical_i|. Throws on length mismatch.
[[nodiscard]] double ks_distance(std::span<const double> empirical,
                                 std::span<const double> theoretical);

/// Indicator bookkeeping for {Z_k >= u} over phi values with indices 0..k.
struct ExceedanceCounts {
  std::uint64_t hits{0};           // sum_j 1{phi_j >= u}
  std::uint64_t max_indicator{0};  // 1{Z_k >= u}
  std::uint64_t ordered_pairs{0};  // sum_{l != j} 1{phi_j >= u} 1{phi_l >= u}
};

[[nodiscard]] ExceedanceCounts exceedance_counts(std::span<const double> phi_values, double u);

/// Z_0, Z_1, ..., Z_k of a finite sequence of phi values.
[[nodiscard]] std::vector<double> running_maxima(std::span<const double> phi_values);

// --- local density --------------------------------------------------------------

struct DensityRow {
  double radius{0.0};
  double volume{0.0};
  std::uint64_t visits{0};
  double mass{0.0};
  double estimate{0.0};
  double error{0.0};
};

struct DensityEstimate {
  std::vector<DensityRow> rows;  // in the order of the requested radii
  double H_hat{0.0};
  double H_hat_error{0.0};
  double H_hat_radius{0.0};
  std::vector<std::string> warnings;
};

/// Per-member visit counts to nested balls around one target, reduced with
/// exact integer sums.
class DensityTally {
 public:
  DensityTally() = default;
  explicit DensityTally(std::vector<double> radii);

  [[nodiscard]] std::size_t size() const noexcept { return radii_.size(); }
  [[nodiscard]] const std::vector<double>& radii() const noexcept { return radii_; }
  [[nodiscard]] double largest_squared() const noexcept { return largest_sq_; }

  /// Counts for one member; reset before each member.
  struct Member {
    std::vector<std::uint64_t> counts;
  };
  [[nodiscard]] Member member() const { return {std::vector<std::uint64_t>(radii_.size(), 0)}; }

  void record(Member& m, double d2) const noexcept {
    if (d2 >= largest_sq_) return;
    for (std::size_t i = 0; i < squared_.size(); ++i) {
      if (d2 < squared_[i]) ++m.counts[i];
    }
  }

  void add(const Member& m);
  void merge(const DensityTally& other);

  [[nodiscard]] std::uint64_t members() const noexcept { return members_; }
  [[nodiscard]] const CountMoments& moments(std::size_t i) const { return moments_.at(i); }

  /// Estimates ν(B_r) / λ(B_r) with `points_per_member` orbit points per member.
  [[nodiscard]] DensityEstimate estimate(const Geometry& geometry, const ProductPoint& target,
                                         std::uint64_t points_per_member) const;

 private:
  std::vector<double> radii_;
  std::vector<double> squared_;
  double largest_sq_{0.0};
  std::vector<CountMoments> moments_;
  std::uint64_t members_{0};
};

/// Throws std::invalid_argument unless radii are positive and strictly decreasing.
void check_radii(std::span<const double> radii);

struct DensityOptions {
  std::uint64_t burn_in{0};
  std::uint64_t window{1};  // orbit points counted per member, starting after burn-in
};

/// ν(B_r(target)) / λ(B_r) for each radius, from the visit frequency of the
/// ensemble orbits. H_hat is the value at the smallest radius with visits.
[[nodiscard]] DensityEstimate estimate_local_density(const SystemDescriptor& system,
                                                     const Ensemble& ensemble,
                                                     const ProductPoint& target,
                                                     std::span<const double> radii,
                                                     const DensityOptions& options,
                                                     const Exec& exec = {});

/// Same estimate for several targets from one set of orbits.
[[nodiscard]] std::vector<DensityEstimate> density_profile(
    const SystemDescriptor& system, const Ensemble& ensemble,
    std::span<const ProductPoint> targets, std::span<const double> radii,
    const DensityOptions& options, const Exec& exec = {});

// --- short-range returns --------------------------------------------------------------

struct ShortRangeResult {
  double statistic{0.0};
  double radius{0.0};       // e^{-u_n}
  std::uint64_t horizon{0};  // floor(n^gamma')
  double ball_mass{0.0};    // estimated ν(B)
  std::uint64_t ball_visits{0};
  double mean_returns{0.0};  // returns to B within the horizon, starts uniform in B
  std::uint64_t starts{0};
};

struct ShortRangeOptions {
  double v{0.0};
  std::uint64_t burn_in{0};
  std::uint64_t window{1000};       // points per member for the mass of B
  std::uint64_t return_starts{0};   // 0 means ensemble.count
};

/// n * sum_{j=1}^{J} ν(Phi >= u_n, Phi∘f^j >= u_n), J = floor(n^gamma'),
/// estimated as n * ν(B) * E[#returns to B | start uniform in B].
[[nodiscard]] ShortRangeResult short_range_pair_statistic(const SystemDescriptor& system,
                                                          const ProductPoint& target,
                                                          std::uint64_t n, double gamma_prime,
                                                          const Ensemble& ensemble,
                                                          const ShortRangeOptions& options,
                                                          const Exec& exec = {});

/// First j in 1..steps with d(f^j target, target) < radius, if any.
[[nodiscard]] std::optional<std::uint64_t> target_short_return(const SystemDescriptor& system,
                                                               const ProductPoint& target,
                                                               double radius,
                                                               std::uint64_t steps);

// --- the experiment ----------------------------------------------------------------------

/// Thrown when more than 1% of ensemble members leave the phase space.
class TooManyDiverged : public std::runtime_error {
 public:
  TooManyDiverged(std::uint64_t diverged, std::uint64_t count);
  [[nodiscard]] std::uint64_t diverged() const noexcept { return diverged_; }
  [[nodiscard]] std::uint64_t count() const noexcept { return count_; }

 private:
  std::uint64_t diverged_;
  std::uint64_t count_;
};

struct ShortRangeRequest {
  double gamma_prime{0.4};
  double v{0.0};
  std::uint64_t return_starts{0};
};

struct EvtExperiment {
  SystemDescriptor system{LinearExpandingParams{}};
  std::optional<ProductPoint> target;  // drawn by burn-in sampling when empty
  std::uint64_t n{1};
  Ensemble ensemble;
  std::optional<std::uint64_t> burn_in;  // system default when empty
  std::vector<double> v_grid;
  std::vector<double> radii;
  std::optional<ShortRangeRequest> short_range;
  std::uint64_t short_return_steps{20};
};

struct EvtRow {
  double v{0.0};
  double u_n{0.0};
  double empirical{0.0};
  double theoretical{0.0};
};

struct EvtResult {
  std::vector<EvtRow> rows;
  double ks_distance{0.0};
  // KS against exp(-H_hat e^{-Dv}), i.e. without the unit-ball volume.
  double ks_distance_unit_constant{0.0};
  DensityEstimate density;
  ProductPoint target;
  int dimension{0};
  std::uint64_t burn_in{0};
  std::uint64_t members_used{0};
  std::uint64_t diverged{0};
  std::vector<double> block_maxima;  // Z_n per surviving member, in member order
  std::optional<ShortRangeResult> short_range;
  std::vector<std::string> warnings;
};

void check_experiment(const EvtExperiment& experiment);

/// Target drawn for an experiment with no explicit target.
[[nodiscard]] ProductPoint sample_target(const SystemDescriptor& system, std::uint64_t seed,
                                         std::uint64_t burn_in);

/// Fraction of members with Z_n < u_n(v) on the v-grid, together with the
/// local density at the target and the limit law exp(-V_D H_hat e^{-Dv}).
[[nodiscard]] EvtResult empirical_evt_cdf(const EvtExperiment& experiment, const Exec& exec = {});

}  // namespace evtlab
