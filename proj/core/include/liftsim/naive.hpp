#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "liftsim/direct_sampling.hpp"
#include "liftsim/grid.hpp"
#include "liftsim/marginal.hpp"

namespace liftsim {

// 1-based ranks of `values`, ties broken by position (earlier index ranks
// lower). `ties` receives the number of tied adjacent pairs when non-null.
std::vector<std::uint32_t> rank_pattern(std::span<const double> values,
                                        std::size_t* ties = nullptr);

// Sorts `draws` and places the k-th smallest draw at the position holding
// rank k. Output keeps the rank pattern of `pattern_source` exactly.
std::vector<double> apply_rank_pattern(std::span<const double> pattern_source,
                                       std::vector<double> draws);

enum class RankSource { copy, ds };

// Rank-preserving resample: n = m * cells i.i.d. draws from `model`, assigned
// by rank. copy reuses the pooled rank pattern of the training stack; ds ranks
// one Direct Sampling pass over the training stack (engine (seed, 1)). Draw
// k comes from a single engine (seed, 0) stream.
GridStack naive_resample(const GridStack& training, const MarginalModel& model,
                         RankSource source, const DsParams& ds_params, std::uint64_t seed,
                         int threads = 1, std::size_t* ties = nullptr);

// Order statistics of n i.i.d. Exp(1) variables built from the partial sums
// sum_{l<=i} Z_l / (n - l + 1); nondecreasing by construction.
std::vector<double> renyi_order_statistics(std::size_t n, std::mt19937_64& rng);

// Per-sample global maximum and (second largest - largest), the latter never
// positive. Inputs are expected on the standard exponential scale already.
struct SpacingDiagnostics {
  std::vector<double> maxima;
  std::vector<double> top_spacings;
};

SpacingDiagnostics spacing_diagnostics(std::span<const GridStack> stacks);

// sample,maximum,top_spacing
void write_spacing_csv(const std::filesystem::path& path, const SpacingDiagnostics& diag);

}  // namespace liftsim
