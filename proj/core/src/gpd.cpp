#include "liftsim/gpd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace liftsim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_point(double y, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gpd: sigma must be positive");
  if (!(y >= 0.0)) throw std::invalid_argument("gpd: exceedance must be nonnegative");
}

double loglik(std::span<const double> y, double sigma, double xi) {
  const std::size_t n = y.size();
  double ll = -static_cast<double>(n) * std::log(sigma);
  if (std::fabs(xi) < kShapeExponentialSwitch) {
    double s = 0.0;
    for (double v : y) s += v;
    return ll - s / sigma;
  }
  double s = 0.0;
  for (double v : y) {
    const double t = xi * v / sigma;
    if (t <= -1.0) return kNegInf;
    s += std::log1p(t);
  }
  return ll - (1.0 + 1.0 / xi) * s;
}

// Maximizes the likelihood over sigma for fixed xi. Golden section on
// log(sigma); the profile is unimodal in sigma for fixed xi.
double best_sigma(std::span<const double> y, double xi, double ybar, double ymax) {
  if (std::fabs(xi) < kShapeExponentialSwitch) return ybar;  // closed form at xi = 0
  double lo, hi;
  if (xi > 0.0) {
    lo = std::log(ybar) - 15.0;
    hi = std::log(ybar) + 15.0;
  } else {
    // Support constraint 1 + xi*ymax/sigma > 0.
    lo = std::log(-xi * ymax) + 1e-10;
    hi = std::log(std::max(ybar, -xi * ymax)) + 15.0;
  }
  constexpr double kInvPhi = 0.6180339887498949;
  double c = hi - kInvPhi * (hi - lo);
  double d = lo + kInvPhi * (hi - lo);
  double fc = loglik(y, std::exp(c), xi);
  double fd = loglik(y, std::exp(d), xi);
  for (int i = 0; i < 120 && (hi - lo) > 1e-10; ++i) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kInvPhi * (hi - lo);
      fc = loglik(y, std::exp(c), xi);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kInvPhi * (hi - lo);
      fd = loglik(y, std::exp(d), xi);
    }
  }
  return std::exp(0.5 * (lo + hi));
}

}  // namespace

double gpd_survival(double y, double sigma, double xi) {
  check_point(y, sigma);
  if (std::fabs(xi) < kShapeExponentialSwitch) return std::exp(-y / sigma);
  const double t = 1.0 + xi * y / sigma;
  if (t <= 0.0) return 0.0;  // past the upper endpoint for xi < 0
  return std::pow(t, -1.0 / xi);
}

double gpd_cdf(double y, double sigma, double xi) {
  return 1.0 - gpd_survival(y, sigma, xi);
}

double gpd_density(double y, double sigma, double xi) {
  check_point(y, sigma);
  if (std::fabs(xi) < kShapeExponentialSwitch) return std::exp(-y / sigma) / sigma;
  const double t = 1.0 + xi * y / sigma;
  if (t <= 0.0) return 0.0;
  return std::pow(t, -1.0 / xi - 1.0) / sigma;
}

double gpd_quantile(double p, double sigma, double xi) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gpd: sigma must be positive");
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("gpd_quantile: p outside [0,1)");
  if (std::fabs(xi) < kShapeExponentialSwitch) return -sigma * std::log1p(-p);
  return sigma / xi * (std::pow(1.0 - p, -xi) - 1.0);
}

ShapeMethod parse_shape_method(std::string_view name) {
  if (name == "moment") return ShapeMethod::moment;
  if (name == "hill") return ShapeMethod::hill;
  if (name == "ml") return ShapeMethod::ml;
  if (name == "ml-nonpositive") return ShapeMethod::ml_nonpositive;
  throw std::invalid_argument("unknown shape method: " + std::string(name));
}

std::string_view shape_method_name(ShapeMethod method) {
  switch (method) {
    case ShapeMethod::moment: return "moment";
    case ShapeMethod::hill: return "hill";
    case ShapeMethod::ml: return "ml";
    case ShapeMethod::ml_nonpositive: return "ml-nonpositive";
  }
  throw std::logic_error("shape_method_name: bad enum");
}

GpdFit fit_gpd_ml(std::span<const double> y, bool nonpositive_shape) {
  if (y.empty()) throw std::invalid_argument("fit_gpd_ml: no exceedances");
  double ybar = 0.0, ymax = 0.0;
  for (double v : y) {
    if (!(v > 0.0)) throw std::invalid_argument("fit_gpd_ml: exceedances must be positive");
    ybar += v;
    ymax = std::max(ymax, v);
  }
  ybar /= static_cast<double>(y.size());

  const double xi_lo = -0.99;
  const double xi_hi = nonpositive_shape ? 0.0 : 5.0;
  auto profile = [&](double xi) { return loglik(y, best_sigma(y, xi, ybar, ymax), xi); };

  // Coarse grid, then golden refinement around the grid best.
  double best_xi = 0.0;
  double best_ll = profile(0.0);
  for (double xi = xi_lo; xi < xi_hi + 1e-12; xi += 0.05) {
    const double ll = profile(xi);
    if (ll > best_ll) {
      best_ll = ll;
      best_xi = xi;
    }
  }
  double lo = std::max(xi_lo, best_xi - 0.05);
  double hi = std::min(xi_hi, best_xi + 0.05);
  constexpr double kInvPhi = 0.6180339887498949;
  double c = hi - kInvPhi * (hi - lo);
  double d = lo + kInvPhi * (hi - lo);
  double fc = profile(c);
  double fd = profile(d);
  for (int i = 0; i < 80 && (hi - lo) > 1e-8; ++i) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kInvPhi * (hi - lo);
      fc = profile(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kInvPhi * (hi - lo);
      fd = profile(d);
    }
  }
  double xi = 0.5 * (lo + hi);
  double ll = profile(xi);
  if (ll < best_ll) {
    xi = best_xi;
    ll = best_ll;
  }
  // Snap to the exponential sub-model when it is not worse; this makes the
  // active xi <= 0 boundary return exactly zero.
  if (std::fabs(xi) < 1e-7) {
    const double ll0 = loglik(y, ybar, 0.0);
    if (ll0 >= ll - 1e-9 * (1.0 + std::fabs(ll))) return GpdFit{ybar, 0.0};
  }
  if (ll == kNegInf) throw std::runtime_error("fit_gpd_ml: likelihood maximization failed");
  return GpdFit{best_sigma(y, xi, ybar, ymax), xi};
}

double estimate_shape(std::span<const double> y, double threshold, ShapeMethod method) {
  if (y.size() < 10) throw std::invalid_argument("estimate_shape: fewer than 10 exceedances");
  for (double v : y) {
    if (!(v > 0.0)) throw std::invalid_argument("estimate_shape: exceedances must be positive");
  }
  if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); }))
    throw std::invalid_argument("estimate_shape: degenerate exceedances (all equal)");
  switch (method) {
    case ShapeMethod::moment:
    case ShapeMethod::hill: {
      if (!(threshold > 0.0))
        throw std::invalid_argument(
            "estimate_shape: moment/hill need a positive threshold (log excess ratios)");
      double m1 = 0.0, m2 = 0.0;
      for (double v : y) {
        const double r = std::log1p(v / threshold);
        m1 += r;
        m2 += r * r;
      }
      m1 /= static_cast<double>(y.size());
      m2 /= static_cast<double>(y.size());
      if (method == ShapeMethod::hill) return m1;
      const double denom = 1.0 - m1 * m1 / m2;
      if (!(denom > 0.0))
        throw std::runtime_error("estimate_shape: degenerate log-excess moments");
      return m1 + 1.0 - 0.5 / denom;
    }
    case ShapeMethod::ml:
      return fit_gpd_ml(y, false).xi;
    case ShapeMethod::ml_nonpositive:
      return fit_gpd_ml(y, true).xi;
  }
  throw std::logic_error("estimate_shape: bad enum");
}

}  // namespace liftsim
