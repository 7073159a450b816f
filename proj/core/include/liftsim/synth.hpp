#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "liftsim/grid.hpp"

namespace liftsim::synth {

enum class CovarianceKind { exponential };

// variance * exp(-h / range) at physical distance h between cell centers.
struct CovarianceSpec {
  CovarianceKind kind = CovarianceKind::exponential;
  double range = 0.2;
  double variance = 1.0;
};

enum class FieldFamily { gaussian, student };
enum class MarginTransform { none, exponential, log_gaussian };

FieldFamily parse_field_family(std::string_view name);
MarginTransform parse_margin_transform(std::string_view name);
std::string_view field_family_name(FieldFamily family);
std::string_view margin_transform_name(MarginTransform margin);

struct SynthSpec {
  Grid grid;
  CovarianceSpec cov;
  std::size_t m = 1;
  FieldFamily family = FieldFamily::gaussian;
  double nu = 3.0;  // student degrees of freedom
  MarginTransform margin = MarginTransform::none;
  std::uint64_t seed = 0;
  std::size_t dense_cell_limit = 10000;  // larger grids go through the circulant path
};

// Dense covariance over cell centers, row-major cells x cells. Symmetric with
// diagonal exactly `variance`. Refuses grids above max_cells; those simulate
// through the circulant embedding inside simulate().
std::vector<double> covariance_matrix(const Grid& grid, const CovarianceSpec& cov,
                                      std::size_t max_cells = 10000);

// Stationary replicates on spec.grid. Gaussian replicates are zero-mean with
// the requested covariance; student replicates divide each Gaussian field by
// sqrt(Q/nu), Q ~ chi^2_nu drawn independently per replicate. The margin
// transform runs cellwise last: `exponential` maps each value through its
// exact marginal CDF onto Exp(1), `log_gaussian` exponentiates. Replicate
// streams are keyed by (seed, replicate), so output is identical for any
// thread count.
GridStack simulate(const SynthSpec& spec, int threads = 1);

}  // namespace liftsim::synth
