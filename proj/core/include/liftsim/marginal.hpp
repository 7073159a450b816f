#pragma once

#include <algorithm>
#include <filesystem>
#include <span>
#include <vector>

#include "liftsim/gpd.hpp"
#include "liftsim/grid.hpp"
#include "liftsim/kernel_density.hpp"

namespace liftsim {

// Uniform-scale values F(x) - 1 live in (-1, 0); values are clamped away from
// both endpoints before any reciprocal so the Pareto scale stays finite.
inline constexpr double kUniformFloor = -1.0 + 1e-12;
inline constexpr double kUniformCeil = -1e-12;

inline double clamp_uniform(double xu) {
  return std::clamp(xu, kUniformFloor, kUniformCeil);
}

struct GpdTail {
  double u = 0.0;
  double sigma = 1.0;
  double xi = 0.0;
};

// Spliced marginal: kernel density below the threshold u, generalized Pareto
// exceedance model above it. The tail carries mass p_u, u is placed where the
// kernel upper tail holds exactly that mass, and sigma = p_u / pdf_kernel(u)
// makes the density continuous at the splice.
struct MarginalModel {
  KernelDensity bulk;
  GpdTail tail;
  double p_u = 0.0;
  ShapeMethod method = ShapeMethod::moment;

  double density(double x) const;
  double cdf(double x) const;
  // p in (0, 1); closed-form GPD inverse above 1 - p_u, kernel bisection below.
  // The hint seeds the bulk inversion, see KernelDensity::cdf_inverse.
  double quantile(double p, double hint = KernelDensity::kNoHint) const;

  double to_uniform(double x) const { return cdf(x) - 1.0; }
  double to_pareto(double x) const { return 1.0 / (1.0 - cdf(x)); }
  double from_uniform(double xu) const;
};

MarginalModel fit_marginal(std::span<const double> sample, double p_u, ShapeMethod method);

// One model per cell, each fit on that cell's replicate series.
std::vector<MarginalModel> fit_margins_per_cell(const GridStack& stack, double p_u,
                                                ShapeMethod method, int threads = 1);

// Fitted parameters, one row per cell:
// cell,row,col,u,sigma,xi,p_u,bandwidth
void write_margin_params_csv(const std::filesystem::path& path,
                             std::span<const MarginalModel> models, const Grid& grid);

// Cellwise F(x) - 1, clamped into [kUniformFloor, kUniformCeil]. models holds
// either one model per cell or a single pooled model applied everywhere.
GridStack standardize(const GridStack& stack, std::span<const MarginalModel> models,
                      int threads = 1);
// Cellwise quantile(1 + xu), the inverse of standardize up to clamping.
GridStack back_transform(const GridStack& uniform, std::span<const MarginalModel> models,
                         int threads = 1);

}  // namespace liftsim
