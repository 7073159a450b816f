#include "liftsim/marginal.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "liftsim/parallel.hpp"

namespace liftsim {

double MarginalModel::density(double x) const {
  if (x <= tail.u) return bulk.pdf(x);
  return p_u * gpd_density(x - tail.u, tail.sigma, tail.xi);
}

double MarginalModel::cdf(double x) const {
  if (x <= tail.u) return bulk.cdf(x);
  return 1.0 - p_u * gpd_survival(x - tail.u, tail.sigma, tail.xi);
}

double MarginalModel::quantile(double p, double hint) const {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile: p outside (0,1)");
  const double bulk_mass = 1.0 - p_u;
  if (p >= bulk_mass) return tail.u + gpd_quantile((p - bulk_mass) / p_u, tail.sigma, tail.xi);
  return bulk.cdf_inverse(p, tail.u, hint);
}

double MarginalModel::from_uniform(double xu) const {
  if (!(xu >= -1.0 && xu < 0.0))
    throw std::invalid_argument("from_uniform: value outside [-1,0)");
  return quantile(1.0 + clamp_uniform(xu));
}

MarginalModel fit_marginal(std::span<const double> sample, double p_u, ShapeMethod method) {
  if (!(p_u > 0.0 && p_u < 1.0)) throw std::invalid_argument("fit_marginal: p_u outside (0,1)");
  if (p_u * static_cast<double>(sample.size()) < 10.0)
    throw std::invalid_argument(
        "fit_marginal: sample too small for p_u (fewer than 10 expected exceedances)");

  MarginalModel model;
  model.bulk = KernelDensity::fit(sample);
  model.p_u = p_u;
  model.method = method;
  model.tail.u = threshold_for_tail_mass(model.bulk, p_u);

  const double f_at_u = model.bulk.pdf(model.tail.u);
  if (!(f_at_u > 0.0))
    throw std::runtime_error("fit_marginal: kernel density vanishes at the threshold");
  model.tail.sigma = p_u / f_at_u;  // density continuity at the splice

  std::vector<double> exceedances;
  for (double x : sample) {
    if (x > model.tail.u) exceedances.push_back(x - model.tail.u);
  }
  if (exceedances.size() < 10)
    throw std::runtime_error("fit_marginal: fewer than 10 exceedances above the threshold");
  model.tail.xi = estimate_shape(exceedances, model.tail.u, method);
  return model;
}

std::vector<MarginalModel> fit_margins_per_cell(const GridStack& stack, double p_u,
                                                ShapeMethod method, int threads) {
  const std::size_t cells = stack.grid.cells();
  if (cells == 0 || stack.m == 0)
    throw std::invalid_argument("fit_margins_per_cell: empty stack");
  std::vector<MarginalModel> models(cells);
  parallel_for(cells, threads, [&](std::size_t i) {
    std::vector<double> series(stack.m);
    for (std::size_t j = 0; j < stack.m; ++j) series[j] = stack.values[j * cells + i];
    models[i] = fit_marginal(series, p_u, method);
  });
  return models;
}

void write_margin_params_csv(const std::filesystem::path& path,
                             std::span<const MarginalModel> models, const Grid& grid) {
  if (models.size() != grid.cells() && models.size() != 1)
    throw std::invalid_argument("write_margin_params_csv: model count does not match grid");
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << "cell,row,col,u,sigma,xi,p_u,bandwidth\n";
  char line[192];
  for (std::size_t i = 0; i < models.size(); ++i) {
    const MarginalModel& m = models[i];
    const auto row = static_cast<std::uint32_t>(i / grid.nx);
    const auto col = static_cast<std::uint32_t>(i % grid.nx);
    std::snprintf(line, sizeof(line), "%zu,%u,%u,%.17g,%.17g,%.17g,%.17g,%.17g\n", i, row, col,
                  m.tail.u, m.tail.sigma, m.tail.xi, m.p_u, m.bulk.bandwidth);
    out << line;
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

namespace {

const MarginalModel& model_for_cell(std::span<const MarginalModel> models, std::size_t cell) {
  return models.size() == 1 ? models[0] : models[cell];
}

void check_models(const GridStack& stack, std::span<const MarginalModel> models) {
  if (models.size() != stack.grid.cells() && models.size() != 1)
    throw std::invalid_argument("transform: model count does not match grid");
  if (has_missing(stack.values)) throw std::invalid_argument("transform: missing values present");
}

}  // namespace

GridStack standardize(const GridStack& stack, std::span<const MarginalModel> models,
                      int threads) {
  check_models(stack, models);
  GridStack out{stack.grid, stack.m, std::vector<double>(stack.values.size())};
  const std::size_t cells = stack.grid.cells();
  parallel_for(stack.m, threads, [&](std::size_t j) {
    const double* src = stack.values.data() + j * cells;
    double* dst = out.values.data() + j * cells;
    for (std::size_t i = 0; i < cells; ++i)
      dst[i] = clamp_uniform(model_for_cell(models, i).to_uniform(src[i]));
  });
  return out;
}

GridStack back_transform(const GridStack& uniform, std::span<const MarginalModel> models,
                         int threads) {
  check_models(uniform, models);
  GridStack out{uniform.grid, uniform.m, std::vector<double>(uniform.values.size())};
  const std::size_t cells = uniform.grid.cells();

  if (models.size() == 1) {
    // One shared model: resampled stacks repeat training values heavily, so
    // invert each distinct value once and map the rest by lookup.
    std::vector<double> unique = uniform.values;
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    std::vector<double> quantiles(unique.size());
    // contiguous chunks so each worker can seed inversions with the root just found
    const std::size_t chunks =
        std::min(unique.size(), static_cast<std::size_t>(resolve_threads(threads)) * 4);
    parallel_for(chunks, threads, [&](std::size_t c) {
      const std::size_t lo = unique.size() * c / chunks;
      const std::size_t hi = unique.size() * (c + 1) / chunks;
      double hint = KernelDensity::kNoHint;
      for (std::size_t i = lo; i < hi; ++i) {
        quantiles[i] = models[0].quantile(1.0 + clamp_uniform(unique[i]), hint);
        hint = quantiles[i];
      }
    });
    parallel_for(uniform.m, threads, [&](std::size_t j) {
      const double* src = uniform.values.data() + j * cells;
      double* dst = out.values.data() + j * cells;
      for (std::size_t i = 0; i < cells; ++i) {
        const auto it = std::lower_bound(unique.begin(), unique.end(), src[i]);
        dst[i] = quantiles[static_cast<std::size_t>(it - unique.begin())];
      }
    });
    return out;
  }

  parallel_for(uniform.m, threads, [&](std::size_t j) {
    const double* src = uniform.values.data() + j * cells;
    double* dst = out.values.data() + j * cells;
    for (std::size_t i = 0; i < cells; ++i) {
      const double xu = clamp_uniform(src[i]);
      dst[i] = model_for_cell(models, i).quantile(1.0 + xu);
    }
  });
  return out;
}

}  // namespace liftsim
