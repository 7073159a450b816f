#include "liftsim/grid.hpp"

#include <algorithm>
#include <cmath>

namespace liftsim {

double quantile_type7(std::span<const double> sorted_values, double p) {
  if (sorted_values.empty()) throw std::invalid_argument("quantile_type7: empty input");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile_type7: p outside [0,1]");
  const double h = p * static_cast<double>(sorted_values.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted_values.size()) return sorted_values.back();
  const double w = h - static_cast<double>(lo);
  return sorted_values[lo] + w * (sorted_values[lo + 1] - sorted_values[lo]);
}

bool has_missing(std::span<const double> values) {
  for (double v : values) {
    if (std::isnan(v)) return true;
  }
  return false;
}

FieldSummary summarize(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("summarize: empty field");
  if (has_missing(values)) throw std::invalid_argument("summarize: missing values present");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double v : sorted) sum += v;
  FieldSummary s;
  s.min = sorted.front();
  s.max = sorted.back();
  s.mean = sum / static_cast<double>(sorted.size());
  s.median = quantile_type7(sorted, 0.5);
  s.iqr = quantile_type7(sorted, 0.75) - quantile_type7(sorted, 0.25);
  s.range = s.max - s.min;
  return s;
}

FieldSummary summarize(const Field& field) {
  return summarize(std::span<const double>(field.values));
}

}  // namespace liftsim
