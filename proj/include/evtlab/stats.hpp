#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "evtlab/circle.hpp"

namespace evtlab {

struct LineFit {
  double slope{0.0};
  double intercept{0.0};
  std::size_t points{0};
};

/// Ordinary least squares y = intercept + slope * x. Throws
/// std::invalid_argument for fewer than two points or constant x.
[[nodiscard]] LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Least squares on (log x, log y); every x and y must be positive.
[[nodiscard]] LineFit fit_loglog(std::span<const double> x, std::span<const double> y);

/// Mean and standard error of per-member counts c_i / scale, from the exact
/// integer sums of c_i and c_i^2 over `members` members.
struct CountMoments {
  std::uint64_t sum{0};
  detail::u128 sum_sq{0};

  void add(std::uint64_t c) noexcept {
    sum += c;
    sum_sq += static_cast<detail::u128>(c) * c;
  }
  void merge(const CountMoments& o) noexcept {
    sum += o.sum;
    sum_sq += o.sum_sq;
  }
};

struct MeanError {
  double mean{0.0};
  double error{0.0};
};

[[nodiscard]] MeanError count_mean(const CountMoments& m, std::uint64_t members, double scale);

}  // namespace evtlab

namespace evtlab {

/// floor(x) and ceil(x) that treat values within 1e-9 (relative) of an
/// integer as that integer, so n^{1/2} at n = 10^4 gives exactly 100.
[[nodiscard]] std::uint64_t snapped_floor(double x);
[[nodiscard]] std::uint64_t snapped_ceil(double x);

}  // namespace evtlab
