#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "liftsim/grid.hpp"
#include "liftsim/risk.hpp"

namespace liftsim {

// Uniform-scale replicate selected as an extreme episode.
struct ExtremeEvent {
  std::size_t replicate = 0;
  double v = 0.0;  // summary level, in (-1, 0)
  Field uniform_field;
};

// Greedy declustering: repeatedly keep the largest remaining exceedance of
// `threshold` and drop indices closer than min_separation to a kept one. Ties
// go to the smaller replicate index. Result sorted by v descending.
// max_events == 0 means no cap.
std::vector<ExtremeEvent> extract_events(const GridStack& uniform,
                                         const SummarySeries& series, double threshold,
                                         std::size_t min_separation, std::size_t max_events);

struct LiftSpec {
  double v1 = 0.0;      // target level interval, -1 < v1 <= v2 <= 0, v1 < 0
  double v2 = 0.0;
  double u_marg = 0.0;  // uniform-scale splice point for postprocessing, in (-1, 0)
  std::uint64_t seed = 0;
};

// Target level V ~ U(v1, v2); a degenerate interval returns v1 without
// consuming the engine.
double sample_scale_target(const LiftSpec& spec, std::mt19937_64& rng);

// Exact rescaling x -> (v_new / v_source) * x of the whole uniform field. Any
// homogeneous summary of the result equals v_new. Down-lifting (s > 1) can
// push bulk cells below -1; the postprocessed variant keeps the range.
Field lift_event(const ExtremeEvent& event, double v_new);

struct LiftedEvent {
  std::size_t source_replicate = 0;
  double v_source = 0.0;
  double v_new = 0.0;
  double s = 0.0;  // v_new / v_source
  Field uniform_field;
};

// Rescales tail cells and remaps the bulk affinely so the field stays in [-1, 0):
//   x >  u_marg: s*x
//   x <= u_marg: -1 + (1 + s*u_marg)/(1 + u_marg) * (1 + x)
// Both pieces meet at u_marg and the map is strictly increasing, so cell ranks
// are preserved. Rejects s >= -1/u_marg.
LiftedEvent lift_event_postprocessed(const ExtremeEvent& event, double v_new, double u_marg);

// m_target lifted events. Sources cycle in v-descending order; output index k
// draws its target level from an engine derived from (spec.seed, k), so the
// batch is reproducible independently of evaluation order.
std::vector<LiftedEvent> lift_batch(const std::vector<ExtremeEvent>& events,
                                    const LiftSpec& spec, std::size_t m_target);

GridStack lifted_stack(const std::vector<LiftedEvent>& lifted, const Grid& grid);

// output_index,source_replicate,v_source,v_new,s
void write_lift_manifest_csv(const std::filesystem::path& path,
                             const std::vector<LiftedEvent>& lifted);

}  // namespace liftsim
