#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <string_view>

#include "liftsim/direct_sampling.hpp"
#include "liftsim/gpd.hpp"
#include "liftsim/grid_io.hpp"
#include "liftsim/risk.hpp"
#include "liftsim/synth.hpp"

namespace liftsim {

enum class MarginPooling { automatic, pooled, per_cell };

MarginPooling parse_margin_pooling(std::string_view name);
std::string_view margin_pooling_name(MarginPooling pooling);

// Flat key=value run description. '#' lines and blank lines are skipped;
// unknown or repeated keys are errors. Unset optional levels stay NaN and are
// resolved by the pipeline (lift bounds from the holdout or return period,
// u_marg from p_u, lift_count from realization_count).
struct PipelineConfig {
  static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

  std::string input_path;  // empty: synthesize input from the synth_* keys
  FileFormat input_format = FileFormat::binary;
  std::string output_dir = "out";
  FileFormat output_format = FileFormat::binary;
  std::uint64_t seed = 0;
  int threads = 1;

  double p_u = 0.05;
  ShapeMethod shape_method = ShapeMethod::ml;
  MarginPooling margin_pooling = MarginPooling::automatic;
  std::size_t pooled_sample_cap = 2000;  // 0: fit pooled margins on every point

  RiskKind risk_kind = RiskKind::max;
  std::size_t risk_index = 0;

  double event_threshold = kUnset;  // uniform-scale; NaN selects by rank
  std::size_t event_top_k = 10;
  std::size_t min_separation = 1;
  std::size_t holdout_top_k = 0;

  double lift_v1 = kUnset;
  double lift_v2 = kUnset;
  double lift_u_marg = kUnset;
  double return_period = kUnset;  // replicates; alternative source for lift_v1
  double theta_threshold_quantile = 0.95;
  ReturnLevelRule return_level_rule = ReturnLevelRule::reciprocal;
  std::size_t lift_count = 0;  // 0: use realization_count
  std::size_t realization_count = 100;

  int ds_neighbors = 20;
  double ds_threshold = kUnset;      // no published value, must be set to run the pipeline
  double ds_scan_fraction = kUnset;  // same
  double ds_coord_weight = 0.1;

  bool include_bulk_replicates = false;

  std::uint32_t synth_nx = 0;
  std::uint32_t synth_ny = 0;
  std::size_t synth_m = 0;
  synth::FieldFamily synth_family = synth::FieldFamily::gaussian;
  double synth_nu = 3.0;
  double synth_range = 0.2;
  double synth_variance = 1.0;
  synth::MarginTransform synth_margin = synth::MarginTransform::none;
};

PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

// Every key in a fixed order with normalized values; equal configs produce
// equal text. The run hash is FNV-1a over this text.
std::string canonical_text(const PipelineConfig& config);
std::uint64_t config_hash(const PipelineConfig& config);

}  // namespace liftsim
