#include "liftsim/naive.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "liftsim/rng.hpp"

namespace liftsim {

namespace {

// Ordering permutation: idx[j] is the position of the (j+1)-th smallest value.
std::vector<std::uint32_t> ordering(std::span<const double> values, std::size_t* ties) {
  if (values.empty()) throw std::invalid_argument("rank_pattern: empty input");
  if (values.size() > std::numeric_limits<std::uint32_t>::max())
    throw std::invalid_argument("rank_pattern: input too large");
  for (double v : values) {
    if (std::isnan(v)) throw std::invalid_argument("rank_pattern: missing value");
  }
  std::vector<std::uint32_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (values[a] != values[b]) return values[a] < values[b];
    return a < b;
  });
  if (ties) {
    std::size_t t = 0;
    for (std::size_t j = 1; j < idx.size(); ++j) {
      if (values[idx[j]] == values[idx[j - 1]]) ++t;
    }
    *ties = t;
  }
  return idx;
}

}  // namespace

std::vector<std::uint32_t> rank_pattern(std::span<const double> values, std::size_t* ties) {
  const auto idx = ordering(values, ties);
  std::vector<std::uint32_t> ranks(values.size());
  for (std::uint32_t j = 0; j < idx.size(); ++j) ranks[idx[j]] = j + 1;
  return ranks;
}

std::vector<double> apply_rank_pattern(std::span<const double> pattern_source,
                                       std::vector<double> draws) {
  if (draws.size() != pattern_source.size())
    throw std::invalid_argument("apply_rank_pattern: draw count differs from pattern size");
  const auto idx = ordering(pattern_source, nullptr);
  std::sort(draws.begin(), draws.end());
  std::vector<double> out(draws.size());
  for (std::size_t j = 0; j < idx.size(); ++j) out[idx[j]] = draws[j];
  return out;
}

GridStack naive_resample(const GridStack& training, const MarginalModel& model,
                         RankSource source, const DsParams& ds_params, std::uint64_t seed,
                         int threads, std::size_t* ties) {
  const std::size_t n = training.values.size();
  if (n == 0) throw std::invalid_argument("naive_resample: empty training stack");

  auto eng = rng::engine(seed, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> draws(n);
  for (double& d : draws) {
    double u = unit(eng);
    while (u == 0.0) u = unit(eng);
    d = u;
  }
  // Only the multiset of draws matters (assignment is by rank), so invert in
  // ascending order and seed each kernel inversion with the previous root.
  std::sort(draws.begin(), draws.end());
  double hint = KernelDensity::kNoHint;
  for (double& d : draws) {
    d = model.quantile(d, hint);
    if (d < model.tail.u) hint = d;
  }

  std::vector<double> pattern;
  if (source == RankSource::ds) {
    DsParams params = ds_params;
    params.seed = rng::derive(seed, 1);
    pattern = ds_simulate(training, training.grid, params, {}, training.m, threads).values;
  }
  const std::span<const double> pattern_view =
      source == RankSource::copy ? std::span<const double>(training.values)
                                 : std::span<const double>(pattern);
  if (ties) ordering(pattern_view, ties);

  return GridStack{training.grid, training.m, apply_rank_pattern(pattern_view, std::move(draws))};
}

std::vector<double> renyi_order_statistics(std::size_t n, std::mt19937_64& rng) {
  if (n == 0) throw std::invalid_argument("renyi_order_statistics: n must be positive");
  std::exponential_distribution<double> exp1(1.0);
  std::vector<double> y(n);
  double sum = 0.0;
  for (std::size_t l = 1; l <= n; ++l) {
    sum += exp1(rng) / static_cast<double>(n - l + 1);
    y[l - 1] = sum;
  }
  return y;
}

SpacingDiagnostics spacing_diagnostics(std::span<const GridStack> stacks) {
  if (stacks.empty()) throw std::invalid_argument("spacing_diagnostics: no samples");
  SpacingDiagnostics diag;
  diag.maxima.reserve(stacks.size());
  diag.top_spacings.reserve(stacks.size());
  for (const GridStack& stack : stacks) {
    if (stack.values.size() < 2)
      throw std::invalid_argument("spacing_diagnostics: sample needs at least two values");
    double largest = -std::numeric_limits<double>::infinity();
    double second = largest;
    for (double v : stack.values) {
      if (std::isnan(v)) throw std::invalid_argument("spacing_diagnostics: missing value");
      if (v > largest) {
        second = largest;
        largest = v;
      } else if (v > second) {
        second = v;
      }
    }
    diag.maxima.push_back(largest);
    diag.top_spacings.push_back(second - largest);
  }
  return diag;
}

void write_spacing_csv(const std::filesystem::path& path, const SpacingDiagnostics& diag) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "sample,maximum,top_spacing\n";
  char line[96];
  for (std::size_t i = 0; i < diag.maxima.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g", i, diag.maxima[i],
                  diag.top_spacings[i]);
    out << line << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace liftsim
