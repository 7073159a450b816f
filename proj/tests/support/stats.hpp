#pragma once

// Shared statistical helpers for the test binaries. Everything here is
// deliberately independent of the library under test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace testsupport {

inline double mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / x.size();
}

inline double sample_variance(std::span<const double> x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / (x.size() - 1);
}

// Survival function of the Kolmogorov distribution,
// Q(lambda) = 2 * sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2).
inline double kolmogorov_q(double lambda) {
  if (lambda < 1e-8) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

// One-sample KS statistic of `x` against the continuous CDF `cdf`.
inline double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max(d, std::max(f - i / n, (i + 1) / n - f));
  }
  return d;
}

// P-value via the asymptotic Kolmogorov distribution with the Stephens
// finite-sample correction.
inline double ks_pvalue(double d, double n_effective) {
  const double sn = std::sqrt(n_effective);
  return kolmogorov_q(d * (sn + 0.12 + 0.11 / sn));
}

inline double ks_test(std::vector<double> x, const std::function<double(double)>& cdf) {
  const double n = static_cast<double>(x.size());
  return ks_pvalue(ks_statistic(std::move(x), cdf), n);
}

// Two-sample KS statistic: max gap between the two empirical CDFs.
inline double ks_two_sample_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::fabs(i / na - j / nb));
  }
  return d;
}

inline double ks_two_sample_test(std::vector<double> a, std::vector<double> b) {
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double d = ks_two_sample_statistic(std::move(a), std::move(b));
  return ks_pvalue(d, na * nb / (na + nb));
}

// One-sided paired t-test p-value for H1: mean(a - b) > 0.
inline double paired_t_pvalue_greater(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2)
    throw std::invalid_argument("paired_t_pvalue_greater: need equal sizes >= 2");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  const double m = mean(diff);
  const double sd = std::sqrt(sample_variance(diff));
  const double t = m / (sd / std::sqrt(static_cast<double>(diff.size())));
  boost::math::students_t dist(static_cast<double>(diff.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, t));
}

// Central confidence band for a binomial proportion at confidence `level`,
// normal approximation. Returns {lo, hi} for the observed proportion when the
// true success probability is p.
struct Band {
  double lo = 0.0;
  double hi = 0.0;
};

inline Band binomial_band(double p, double n, double level) {
  boost::math::normal norm;
  const double z = boost::math::quantile(norm, 0.5 + level / 2.0);
  const double half = z * std::sqrt(p * (1.0 - p) / n);
  return Band{p - half, p + half};
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// Asymptotic CDF of the Anderson-Darling statistic (Marsaglia & Marsaglia
// rational approximations, accurate to ~1e-5 over the testing range).
inline double anderson_darling_cdf(double z) {
  if (z <= 0.0) return 0.0;
  if (z < 2.0)
    return std::pow(z, -0.5) * std::exp(-1.2337141 / z) *
           (2.00012 +
            (0.247105 - (0.0649821 - (0.0347962 - (0.011672 - 0.00168691 * z) * z) * z) * z) * z);
  return std::exp(
      -std::exp(1.0776 - (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * z) * z) * z) * z) * z));
}

// Anderson-Darling p-value of `x` against a fully specified standard normal
// null (no estimated parameters).
inline double anderson_darling_pvalue_standard_normal(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  if (n < 8) throw std::invalid_argument("anderson_darling: need at least 8 points");
  long double s = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const double fi = std::clamp(normal_cdf(x[i]), 1e-300, 1.0 - 1e-16);
    const double fj = std::clamp(normal_cdf(x[n - 1 - i]), 1e-300, 1.0 - 1e-16);
    s += (2.0 * i + 1.0) * (std::log(fi) + std::log1p(-fj));
  }
  const double a2 = -static_cast<double>(n) - static_cast<double>(s) / n;
  return 1.0 - anderson_darling_cdf(a2);
}

}  // namespace testsupport
