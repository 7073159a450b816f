#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "liftsim/config.hpp"
#include "liftsim/grid.hpp"
#include "liftsim/lifting.hpp"
#include "liftsim/marginal.hpp"
#include "liftsim/risk.hpp"

namespace liftsim {

// Input stack from the synth_* keys, seeded from the master seed exactly as
// the full run's input stage, so `synth` writes what `run` consumes.
GridStack synthesize_input(const PipelineConfig& config);

// Pooled or per-cell marginal fits per config.margin_pooling; `auto` pools a
// single-replicate stack and fits per cell otherwise.
std::vector<MarginalModel> fit_margins(const GridStack& stack, const PipelineConfig& config);

// Replicate summaries plus the extreme split: the holdout_top_k largest-v
// replicates become validation data, the training extremes come from the
// remainder (declustered, thresholded or capped at event_top_k).
struct EventSelection {
  SummarySeries series;
  std::vector<std::size_t> holdout;  // replicate indices, v descending
  std::vector<ExtremeEvent> events;  // v descending
};

EventSelection select_events(const GridStack& uniform, const PipelineConfig& config);

// Target interval for lifting. Explicit config levels win; otherwise v1 comes
// from the return period (via the extremal coefficient of the summary series)
// or from the smallest holdout level, and v2 from the largest holdout level.
struct LiftBounds {
  double v1 = 0.0;
  double v2 = 0.0;
  double u_marg = 0.0;
  double theta = PipelineConfig::kUnset;    // set when a return period was used
  double theta_u = PipelineConfig::kUnset;  // threshold the estimate used
};

LiftBounds resolve_lift_bounds(const EventSelection& selection, const PipelineConfig& config);

// requires explicit ds_threshold and ds_scan_fraction: neither has a published value
DsParams ds_params_from(const PipelineConfig& config);

// Coverage of each holdout field summary by the simulated summary range,
// statistic by statistic (min, max, mean, median, iqr, range).
struct ValidationReport {
  std::vector<FieldSummary> simulated;
  std::vector<FieldSummary> holdout;
  std::vector<std::array<bool, 6>> coverage;  // [holdout][statistic]
  double coverage_fraction = 0.0;
};

inline constexpr std::array<const char*, 6> kSummaryStatNames = {
    "min", "max", "mean", "median", "iqr", "range"};

std::array<double, 6> summary_stats(const FieldSummary& s);

ValidationReport validate_stacks(const GridStack& simulations, const GridStack& holdout);

// validation_simulated.csv, validation_holdout.csv, coverage.csv
void write_validation_csv(const std::filesystem::path& dir, const ValidationReport& report);

struct RunResult {
  ValidationReport validation;
  LiftBounds bounds;
  std::size_t event_count = 0;
  std::size_t lifted_count = 0;
  std::uint64_t hash = 0;
  std::filesystem::path output_dir;
};

// Full run: input (loaded, synthesized, or `input` when non-null) -> margins
// -> uniform scale -> event split -> lifting -> resampling -> back-transform
// -> validation. Every intermediate lands in config.output_dir; errors carry
// the failing stage name and leave status.txt marked failed.
RunResult run_pipeline(const PipelineConfig& config, const GridStack* input = nullptr);

}  // namespace liftsim
