#include "evtlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evtlab {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: x and y differ in length");
  if (x.size() < 2) throw std::invalid_argument("fit_line: need at least two points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_line: x values are all equal");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx, x.size()};
}

LineFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_loglog: x and y differ in length");
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw std::invalid_argument("fit_loglog: values must be positive");
    }
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return fit_line(lx, ly);
}

MeanError count_mean(const CountMoments& m, std::uint64_t members, double scale) {
  if (members == 0) return {};
  const auto n = static_cast<long double>(members);
  const auto s = static_cast<long double>(m.sum);
  const auto mean = s / n;
  long double var = 0.0L;
  if (members > 1) {
    var = (static_cast<long double>(m.sum_sq) - s * mean) / (n - 1.0L);
    if (var < 0.0L) var = 0.0L;
  }
  return {static_cast<double>(mean / scale),
          static_cast<double>(std::sqrt(var / n) / scale)};
}

}  // namespace evtlab

namespace evtlab {
namespace {

bool near_integer(double x, double& r) {
  r = std::round(x);
  return std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x));
}

}  // namespace

std::uint64_t snapped_floor(double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("snapped_floor: negative or NaN argument");
  double r = 0.0;
  return static_cast<std::uint64_t>(near_integer(x, r) ? r : std::floor(x));
}

std::uint64_t snapped_ceil(double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("snapped_ceil: negative or NaN argument");
  double r = 0.0;
  return static_cast<std::uint64_t>(near_integer(x, r) ? r : std::ceil(x));
}

}  // namespace evtlab
