#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace liftsim {

// Regular grid of nx*ny cells; values attach to cell centers.
struct Grid {
  std::uint32_t nx = 0;
  std::uint32_t ny = 0;
  double x0 = 0.0;
  double y0 = 0.0;
  double dx = 1.0;
  double dy = 1.0;

  std::size_t cells() const { return std::size_t(nx) * std::size_t(ny); }
  double center_x(std::uint32_t col) const { return x0 + (col + 0.5) * dx; }
  double center_y(std::uint32_t row) const { return y0 + (row + 0.5) * dy; }
  double extent_x() const { return nx * dx; }
  double extent_y() const { return ny * dy; }

  // Unit-square grid over [0,1]^2.
  static Grid unit_square(std::uint32_t nx, std::uint32_t ny) {
    return Grid{nx, ny, 0.0, 0.0, 1.0 / nx, 1.0 / ny};
  }

  bool operator==(const Grid&) const = default;
};

// Single replicate; values in row-major order, values[row * nx + col].
struct Field {
  Grid grid;
  std::vector<double> values;
};

// m replicates over a shared grid, replicate-major storage.
struct GridStack {
  Grid grid;
  std::size_t m = 0;
  std::vector<double> values;

  std::span<const double> replicate(std::size_t j) const {
    if (j >= m) throw std::out_of_range("GridStack::replicate: index out of range");
    return std::span<const double>(values).subspan(j * grid.cells(), grid.cells());
  }
  std::span<double> replicate(std::size_t j) {
    if (j >= m) throw std::out_of_range("GridStack::replicate: index out of range");
    return std::span<double>(values).subspan(j * grid.cells(), grid.cells());
  }
  Field field(std::size_t j) const {
    auto r = replicate(j);
    return Field{grid, std::vector<double>(r.begin(), r.end())};
  }
};

struct FieldSummary {
  double min = 0;
  double max = 0;
  double mean = 0;
  double median = 0;
  double iqr = 0;
  double range = 0;
};

// Quantile with linear interpolation between order statistics at h = p*(n-1)
// (the convention used by numpy default and R type 7). Input must be sorted.
double quantile_type7(std::span<const double> sorted_values, double p);

// Missing values are encoded as NaN; summarize rejects them.
bool has_missing(std::span<const double> values);

FieldSummary summarize(std::span<const double> values);
FieldSummary summarize(const Field& field);

}  // namespace liftsim
