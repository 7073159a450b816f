#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "liftsim/grid.hpp"

namespace liftsim {

enum class RiskKind { max, min, mean, median, site, order_statistic };

RiskKind parse_risk_kind(std::string_view name);
std::string_view risk_kind_name(RiskKind kind);

// Positively homogeneous spatial aggregation r, r(a*x) = a*r(x) for a > 0.
// index is the 0-based cell for `site` and the 1-based rank (k-th smallest)
// for `order_statistic`; median of an even cell count takes the midpoint of
// the two central order statistics.
struct RiskFunctional {
  RiskKind kind = RiskKind::max;
  std::size_t index = 0;

  double aggregate(std::span<const double> values) const;
};

// Replicate summary on the uniform scale: V = -1 / r(-1/xU), with xU clamped
// into [kUniformFloor, kUniformCeil] before inversion. For pure
// order-statistic kinds this reduces to the same order statistic of xU itself
// (the map is monotone), which is how those kinds are evaluated.
double apply_risk(const RiskFunctional& r, std::span<const double> uniform_values);

struct SummarySeries {
  std::vector<double> v;  // one summary per replicate, each in (-1, 0)
};

SummarySeries summary_series(const GridStack& uniform, const RiskFunctional& r,
                             int threads = 1);

// replicate,v
void write_summary_series_csv(const std::filesystem::path& path, const SummarySeries& series);

struct ThetaEstimate {
  double theta = 0.0;
  double u = 0.0;
  std::size_t exceedances = 0;
  std::size_t m = 0;
};

// theta = count{v_j > u} / (-u * m) for a uniform-scale threshold u < 0.
ThetaEstimate estimate_extremal_theta(const SummarySeries& series, double u);

enum class ReturnLevelRule {
  reciprocal,    // u = -1 / (theta * period)
  theta_scaled,  // u = -theta / period
};

ReturnLevelRule parse_return_level_rule(std::string_view name);
std::string_view return_level_rule_name(ReturnLevelRule rule);

// Uniform-scale level exceeded once per `period` replicates on average.
// The two rules coincide at theta = 1.
double return_level(double theta, double period,
                    ReturnLevelRule rule = ReturnLevelRule::reciprocal);

}  // namespace liftsim
