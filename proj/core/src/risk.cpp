#include "liftsim/risk.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "liftsim/marginal.hpp"
#include "liftsim/parallel.hpp"

namespace liftsim {

namespace {

double kth_smallest(std::vector<double> values, std::size_t k) {
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k),
                   values.end());
  return values[k];
}

void check_index(const RiskFunctional& r, std::size_t n) {
  if (r.kind == RiskKind::site && r.index >= n)
    throw std::invalid_argument("risk: site index out of range");
  if (r.kind == RiskKind::order_statistic && (r.index < 1 || r.index > n))
    throw std::invalid_argument("risk: order statistic rank out of range");
}

}  // namespace

RiskKind parse_risk_kind(std::string_view name) {
  if (name == "max") return RiskKind::max;
  if (name == "min") return RiskKind::min;
  if (name == "mean") return RiskKind::mean;
  if (name == "median") return RiskKind::median;
  if (name == "site") return RiskKind::site;
  if (name == "order_statistic") return RiskKind::order_statistic;
  throw std::invalid_argument("unknown risk functional: " + std::string(name));
}

std::string_view risk_kind_name(RiskKind kind) {
  switch (kind) {
    case RiskKind::max: return "max";
    case RiskKind::min: return "min";
    case RiskKind::mean: return "mean";
    case RiskKind::median: return "median";
    case RiskKind::site: return "site";
    case RiskKind::order_statistic: return "order_statistic";
  }
  throw std::logic_error("risk_kind_name: bad enum");
}

ReturnLevelRule parse_return_level_rule(std::string_view name) {
  if (name == "reciprocal") return ReturnLevelRule::reciprocal;
  if (name == "theta-scaled") return ReturnLevelRule::theta_scaled;
  throw std::invalid_argument("unknown return level rule: " + std::string(name));
}

std::string_view return_level_rule_name(ReturnLevelRule rule) {
  return rule == ReturnLevelRule::reciprocal ? "reciprocal" : "theta-scaled";
}

double RiskFunctional::aggregate(std::span<const double> values) const {
  if (values.empty()) throw std::invalid_argument("risk: empty field");
  check_index(*this, values.size());
  const std::size_t n = values.size();
  switch (kind) {
    case RiskKind::max: return *std::max_element(values.begin(), values.end());
    case RiskKind::min: return *std::min_element(values.begin(), values.end());
    case RiskKind::mean: {
      double s = 0.0;
      for (double v : values) s += v;
      return s / static_cast<double>(n);
    }
    case RiskKind::median: {
      std::vector<double> copy(values.begin(), values.end());
      if (n % 2 == 1) return kth_smallest(std::move(copy), n / 2);
      std::nth_element(copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(n / 2 - 1),
                       copy.end());
      const double a = copy[n / 2 - 1];
      const double b = *std::min_element(copy.begin() + static_cast<std::ptrdiff_t>(n / 2),
                                         copy.end());
      return 0.5 * (a + b);
    }
    case RiskKind::site: return values[index];
    case RiskKind::order_statistic:
      return kth_smallest(std::vector<double>(values.begin(), values.end()), index - 1);
  }
  throw std::logic_error("risk aggregate: bad enum");
}

double apply_risk(const RiskFunctional& r, std::span<const double> xu) {
  if (xu.empty()) throw std::invalid_argument("apply_risk: empty field");
  if (has_missing(xu)) throw std::invalid_argument("apply_risk: missing values present");
  check_index(r, xu.size());
  const std::size_t n = xu.size();

  // -1/x is increasing on the clamped range, so order-statistic kinds commute
  // with the Pareto transform and can be read off the uniform scale.
  switch (r.kind) {
    case RiskKind::max: {
      double best = kUniformFloor;
      for (double v : xu) best = std::max(best, clamp_uniform(v));
      return best;
    }
    case RiskKind::min: {
      double best = kUniformCeil;
      for (double v : xu) best = std::min(best, clamp_uniform(v));
      return best;
    }
    case RiskKind::site:
      return clamp_uniform(xu[r.index]);
    case RiskKind::order_statistic:
    case RiskKind::median:
    case RiskKind::mean:
      break;
  }

  std::vector<double> clamped(n);
  for (std::size_t i = 0; i < n; ++i) clamped[i] = clamp_uniform(xu[i]);

  if (r.kind == RiskKind::order_statistic) return kth_smallest(std::move(clamped), r.index - 1);
  if (r.kind == RiskKind::median && n % 2 == 1)
    return kth_smallest(std::move(clamped), n / 2);

  if (r.kind == RiskKind::mean) {
    double s = 0.0;
    for (double v : clamped) s += -1.0 / v;
    return -1.0 / (s / static_cast<double>(n));
  }

  // Even-count median: midpoint taken on the Pareto scale.
  std::nth_element(clamped.begin(), clamped.begin() + static_cast<std::ptrdiff_t>(n / 2 - 1),
                   clamped.end());
  const double a = clamped[n / 2 - 1];
  const double b =
      *std::min_element(clamped.begin() + static_cast<std::ptrdiff_t>(n / 2), clamped.end());
  return -1.0 / (0.5 * (-1.0 / a + -1.0 / b));
}

SummarySeries summary_series(const GridStack& uniform, const RiskFunctional& r, int threads) {
  if (uniform.m == 0) throw std::invalid_argument("summary_series: empty stack");
  SummarySeries series;
  series.v.resize(uniform.m);
  parallel_for(uniform.m, threads,
               [&](std::size_t j) { series.v[j] = apply_risk(r, uniform.replicate(j)); });
  return series;
}

void write_summary_series_csv(const std::filesystem::path& path, const SummarySeries& series) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << "replicate,v\n";
  char line[64];
  for (std::size_t j = 0; j < series.v.size(); ++j) {
    std::snprintf(line, sizeof(line), "%zu,%.17g\n", j, series.v[j]);
    out << line;
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

ThetaEstimate estimate_extremal_theta(const SummarySeries& series, double u) {
  if (series.v.empty()) throw std::invalid_argument("estimate_extremal_theta: empty series");
  if (!(u < 0.0))
    throw std::invalid_argument("estimate_extremal_theta: threshold must be negative");
  ThetaEstimate est;
  est.u = u;
  est.m = series.v.size();
  for (double v : series.v) {
    if (v > u) ++est.exceedances;
  }
  est.theta = static_cast<double>(est.exceedances) / (-u * static_cast<double>(est.m));
  return est;
}

double return_level(double theta, double period, ReturnLevelRule rule) {
  if (!(theta > 0.0)) throw std::invalid_argument("return_level: theta must be positive");
  if (!(period > 0.0)) throw std::invalid_argument("return_level: period must be positive");
  return rule == ReturnLevelRule::reciprocal ? -1.0 / (theta * period) : -theta / period;
}

}  // namespace liftsim
