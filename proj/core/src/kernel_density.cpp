#include "liftsim/kernel_density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "liftsim/grid.hpp"

namespace liftsim {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kKernelWindow = 10.0;  // bandwidths

void check_sample(std::span<const double> sample) {
  if (sample.empty()) throw std::invalid_argument("kernel density: empty sample");
  if (has_missing(sample)) throw std::invalid_argument("kernel density: missing values present");
  for (double v : sample) {
    if (std::isinf(v)) throw std::invalid_argument("kernel density: non-finite sample value");
  }
}

}  // namespace

double silverman_bandwidth(std::span<const double> sample) {
  check_sample(sample);
  const std::size_t n = sample.size();
  if (n < 2) throw std::invalid_argument("silverman_bandwidth: need at least two points");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  double mean = 0.0;
  for (double v : sorted) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : sorted) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const double iqr = quantile_type7(sorted, 0.75) - quantile_type7(sorted, 0.25);
  const double width = std::min(sd, iqr / 1.34);
  if (!(width > 0.0))
    throw std::invalid_argument("silverman_bandwidth: zero bandwidth (degenerate sample)");
  return 0.9 * width * std::pow(static_cast<double>(n), -0.2);
}

KernelDensity KernelDensity::fit(std::span<const double> sample) {
  const double h = silverman_bandwidth(sample);
  return with_bandwidth(sample, h);
}

KernelDensity KernelDensity::with_bandwidth(std::span<const double> sample, double h) {
  check_sample(sample);
  if (!(h > 0.0)) throw std::invalid_argument("kernel density: bandwidth must be positive");
  KernelDensity kd;
  kd.sample.assign(sample.begin(), sample.end());
  std::sort(kd.sample.begin(), kd.sample.end());
  kd.bandwidth = h;
  return kd;
}

double KernelDensity::pdf(double x) const {
  const double h = bandwidth;
  const double lo = x - kKernelWindow * h;
  const double hi = x + kKernelWindow * h;
  const auto begin = std::lower_bound(sample.begin(), sample.end(), lo);
  const auto end = std::upper_bound(begin, sample.end(), hi);
  double acc = 0.0;
  const double inv_h = 1.0 / h;
  for (auto it = begin; it != end; ++it) {
    const double z = (x - *it) * inv_h;
    acc += std::exp(-0.5 * z * z);
  }
  return acc * kInvSqrt2Pi * inv_h / static_cast<double>(sample.size());
}

double KernelDensity::cdf(double x) const {
  const double h = bandwidth;
  const double lo = x - kKernelWindow * h;
  const double hi = x + kKernelWindow * h;
  const auto begin = std::lower_bound(sample.begin(), sample.end(), lo);
  const auto end = std::upper_bound(begin, sample.end(), hi);
  // Points below the window contribute a full unit each.
  double acc = static_cast<double>(begin - sample.begin());
  const double inv_h = 1.0 / h;
  for (auto it = begin; it != end; ++it) {
    const double z = (x - *it) * inv_h;
    acc += 0.5 * std::erfc(-z * kInvSqrt2);
  }
  return acc / static_cast<double>(sample.size());
}

double KernelDensity::cdf_inverse(double p, double hi, double hint) const {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("cdf_inverse: p outside (0,1)");
  double a = sample_min() - 10.0 * bandwidth;
  double b = hi;
  if (!(a < b)) throw std::invalid_argument("cdf_inverse: empty bracket");
  const double tol = 1e-11 * std::max({1.0, std::fabs(a), std::fabs(b)});
  // Newton steps inside a maintained bracket; bisection whenever the step
  // leaves it or the density vanishes.
  double x = hint > a && hint < b ? hint : 0.5 * (a + b);
  for (int i = 0; i < 200 && (b - a) > tol; ++i) {
    const double f = cdf(x) - p;
    if (f < 0.0)
      a = x;
    else
      b = x;
    if ((b - a) <= tol) break;
    const double d = pdf(x);
    double next = d > 0.0 ? x - f / d : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (next == x) return x;  // converged to a machine-exact root
    x = next;
  }
  return 0.5 * (a + b);
}

double threshold_for_tail_mass(const KernelDensity& kd, double p_u) {
  if (!(p_u > 0.0 && p_u < 1.0))
    throw std::invalid_argument("threshold_for_tail_mass: p_u outside (0,1)");
  const double target = 1.0 - p_u;
  double a = kd.sample_min() - 10.0 * kd.bandwidth;
  double b = kd.sample_max() + 10.0 * kd.bandwidth;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;  // interval at double resolution
    if (kd.cdf(mid) < target)
      a = mid;
    else
      b = mid;
  }
  return 0.5 * (a + b);
}

}  // namespace liftsim
