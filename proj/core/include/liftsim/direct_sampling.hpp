#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "liftsim/grid.hpp"

namespace liftsim {

struct DsParams {
  int n_neighbors = 20;
  double dist_threshold = 0.05;  // accept the first candidate at or under this
  double scan_fraction = 0.5;    // portion of the pooled training cells scanned per node
  double coord_weight = 0.1;     // weight of the anchor-position term
  std::uint64_t seed = 0;
};

// Neighborhood pattern anchored at a cell: integer lags to informed cells,
// their values, and the anchor position normalized to the unit square of its
// own grid.
struct DsPattern {
  std::vector<std::array<int, 2>> offsets;  // {drow, dcol}
  std::vector<double> values;
  double anchor_x = 0.0;
  double anchor_y = 0.0;
};

// (1-w)*d_val + w*d_coord with w = coord_weight. d_val is the mean absolute
// difference of paired values rescaled by value_range, d_coord the anchor
// distance rescaled by the unit-square diagonal. Both terms lie in [0,1] when
// the values come from the training range.
double pattern_distance(const DsPattern& a, const DsPattern& b, double coord_weight,
                        double value_range);

struct DsConditioning {
  std::vector<std::size_t> cells;  // target-grid linear indices
  std::vector<double> values;
};

struct DsStats {
  std::size_t nodes = 0;
  std::size_t threshold_accepts = 0;
  double mean_paste_distance = 0.0;
};

// Direct Sampling resampler. Every realization visits the non-conditioned
// cells of the target grid along a uniform random path. At each cell the
// pattern of the n_neighbors nearest informed cells (Euclidean lag, ties by
// angle then lag-lexicographic order) is compared against candidate anchors
// drawn from all replicates of the training stack; the first candidate within
// dist_threshold is pasted, otherwise the best seen during the scan. Scan
// order is a per-realization shuffle of the pooled candidates entered at a
// random phase per node; candidates whose pattern would leave the training
// grid are skipped. Realization k uses an engine derived from (seed, k), so
// output is reproducible for any worker count.
GridStack ds_simulate(const GridStack& training, const Grid& target, const DsParams& params,
                      const DsConditioning& conditioning, std::size_t count, int threads = 1,
                      DsStats* stats = nullptr);

}  // namespace liftsim
