#pragma once

#include <span>
#include <string_view>

namespace liftsim {

// Shape values closer to zero than this are treated as the exponential limit.
inline constexpr double kShapeExponentialSwitch = 1e-8;

// Generalized Pareto exceedance distribution in (sigma, xi) parametrization:
// survival (1 + xi*y/sigma)^(-1/xi) on its support, exp(-y/sigma) at xi ~ 0.
// y is the exceedance above the threshold, y >= 0, sigma > 0.
double gpd_survival(double y, double sigma, double xi);
double gpd_cdf(double y, double sigma, double xi);
double gpd_density(double y, double sigma, double xi);
// Inverse CDF for p in [0, 1).
double gpd_quantile(double p, double sigma, double xi);

enum class ShapeMethod { moment, hill, ml, ml_nonpositive };

// "moment" | "hill" | "ml" | "ml-nonpositive"
ShapeMethod parse_shape_method(std::string_view name);
std::string_view shape_method_name(ShapeMethod method);

struct GpdFit {
  double sigma = 0.0;
  double xi = 0.0;
};

// Maximum likelihood over (sigma, xi): profile search in xi with sigma
// maximized inside. The likelihood is unbounded for xi <= -1, so the search
// runs on xi in [-0.99, 5] (clamped to [-0.99, 0] for the nonpositive
// variant, which returns xi = 0 exactly when the boundary is active).
GpdFit fit_gpd_ml(std::span<const double> exceedances, bool nonpositive_shape);

// Tail index from exceedances y = x - u > 0 over threshold u.
//   moment: xi = M1 + 1 - 1/(2*(1 - M1^2/M2)), M_r the r-th empirical moment
//           of log((u+y)/u); requires u > 0.
//   hill:   xi = M1; requires u > 0.
//   ml, ml-nonpositive: shape component of fit_gpd_ml.
double estimate_shape(std::span<const double> exceedances, double threshold,
                      ShapeMethod method);

}  // namespace liftsim
