#pragma once

#include <span>
#include <vector>

namespace liftsim {

// Gaussian kernel density estimate with one shared bandwidth. The sample is
// kept sorted so CDF evaluation can skip kernels more than 10 bandwidths away
// (tail mass below 1e-22 per point, far under every tolerance used here).
struct KernelDensity {
  static constexpr double kNoHint = -1e308;

  std::vector<double> sample;  // sorted ascending
  double bandwidth = 0.0;

  // Silverman rule-of-thumb bandwidth.
  static KernelDensity fit(std::span<const double> sample);
  // Explicit bandwidth, h > 0.
  static KernelDensity with_bandwidth(std::span<const double> sample, double h);

  double pdf(double x) const;
  double cdf(double x) const;

  // Inverse CDF by bisection on [sample_min - 10h, hi]; requires cdf(hi) >= p.
  // Resolves x to 1e-11 (absolute, widened by the bracket magnitude). A hint
  // inside the bracket seeds the search, e.g. a neighboring root.
  double cdf_inverse(double p, double hi, double hint = kNoHint) const;

  double sample_min() const { return sample.front(); }
  double sample_max() const { return sample.back(); }
};

// 0.9 * min(sd, iqr/1.34) * n^(-1/5). Errors when the width term vanishes
// (constant sample) or n < 2.
double silverman_bandwidth(std::span<const double> sample);

// Root of cdf(u) = 1 - p_u, so the kernel upper tail above u carries mass p_u.
// Bisection run to full double resolution.
double threshold_for_tail_mass(const KernelDensity& kd, double p_u);

}  // namespace liftsim
