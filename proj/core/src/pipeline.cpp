#include "liftsim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "liftsim/direct_sampling.hpp"
#include "liftsim/grid_io.hpp"
#include "liftsim/rng.hpp"
#include "liftsim/synth.hpp"

namespace liftsim {

namespace {

namespace fs = std::filesystem;

// Stage keys for substream derivation from the master seed.
constexpr std::uint64_t kSynthStream = 1;
constexpr std::uint64_t kLiftStream = 2;
constexpr std::uint64_t kDsStream = 3;

template <class F>
auto stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("stage ") + name + ": " + e.what());
  }
}

void write_status(const fs::path& dir, const std::string& text) {
  std::ofstream out(dir / "status.txt");
  out << text << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string stack_file_name(const char* base, FileFormat format) {
  return std::string(base) + (format == FileFormat::binary ? ".grds" : ".csv");
}

void save_stack(const fs::path& dir, const char* base, const GridStack& stack,
                FileFormat format) {
  save_grid_stack(stack, dir / stack_file_name(base, format), format);
}

void write_events_csv(const fs::path& path, const std::vector<ExtremeEvent>& events) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "event,replicate,v\n";
  char line[64];
  for (std::size_t i = 0; i < events.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%zu,%.17g", i, events[i].replicate, events[i].v);
    out << line << '\n';
  }
}

void write_holdout_csv(const fs::path& path, const std::vector<std::size_t>& holdout,
                       const SummarySeries& series) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "rank,replicate,v\n";
  char line[64];
  for (std::size_t i = 0; i < holdout.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%zu,%.17g", i, holdout[i], series.v[holdout[i]]);
    out << line << '\n';
  }
}

}  // namespace

GridStack synthesize_input(const PipelineConfig& c) {
  if (c.synth_nx == 0 || c.synth_ny == 0 || c.synth_m == 0)
    throw std::invalid_argument("no input: set input_path or synth_nx/synth_ny/synth_m");
  synth::SynthSpec spec;
  spec.grid = Grid::unit_square(c.synth_nx, c.synth_ny);
  spec.cov.range = c.synth_range;
  spec.cov.variance = c.synth_variance;
  spec.m = c.synth_m;
  spec.family = c.synth_family;
  spec.nu = c.synth_nu;
  spec.margin = c.synth_margin;
  spec.seed = rng::derive(c.seed, kSynthStream);
  return synth::simulate(spec, c.threads);
}

std::vector<MarginalModel> fit_margins(const GridStack& stack, const PipelineConfig& config) {
  const bool pooled = config.margin_pooling == MarginPooling::pooled ||
                      (config.margin_pooling == MarginPooling::automatic && stack.m == 1);
  if (!pooled)
    return fit_margins_per_cell(stack, config.p_u, config.shape_method, config.threads);

  const std::size_t cap = config.pooled_sample_cap;
  if (cap == 0 || stack.values.size() <= cap)
    return {fit_marginal(stack.values, config.p_u, config.shape_method)};

  // quantile-spaced subsample keeps the fit cost flat as the pool grows
  std::vector<double> sorted = stack.values;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> sample(cap);
  const std::size_t n = sorted.size();
  for (std::size_t i = 0; i < cap; ++i) sample[i] = sorted[((2 * i + 1) * n) / (2 * cap)];
  return {fit_marginal(sample, config.p_u, config.shape_method)};
}

EventSelection select_events(const GridStack& uniform, const PipelineConfig& config) {
  EventSelection sel;
  sel.series =
      summary_series(uniform, {config.risk_kind, config.risk_index}, config.threads);

  std::vector<std::size_t> order(uniform.m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sel.series.v[a] != sel.series.v[b]) return sel.series.v[a] > sel.series.v[b];
    return a < b;
  });
  if (config.holdout_top_k >= uniform.m)
    throw std::invalid_argument("holdout_top_k leaves no training replicates");
  sel.holdout.assign(order.begin(), order.begin() + config.holdout_top_k);

  SummarySeries masked = sel.series;
  for (std::size_t j : sel.holdout) masked.v[j] = -1.0;  // below any admissible threshold
  const double threshold =
      std::isnan(config.event_threshold) ? -1.0 : config.event_threshold;
  sel.events = extract_events(uniform, masked, threshold, config.min_separation,
                              config.event_top_k);
  if (sel.events.empty()) throw std::runtime_error("no events above the extraction level");
  return sel;
}

LiftBounds resolve_lift_bounds(const EventSelection& selection, const PipelineConfig& config) {
  LiftBounds b;
  b.u_marg = std::isnan(config.lift_u_marg) ? -config.p_u : config.lift_u_marg;

  auto holdout_levels = [&]() {
    std::vector<double> v;
    v.reserve(selection.holdout.size());
    for (std::size_t j : selection.holdout) v.push_back(selection.series.v[j]);
    return v;
  };

  b.v1 = config.lift_v1;
  if (std::isnan(b.v1) && !std::isnan(config.return_period)) {
    std::vector<double> sorted = selection.series.v;
    std::sort(sorted.begin(), sorted.end());
    b.theta_u = quantile_type7(sorted, config.theta_threshold_quantile);
    b.theta = estimate_extremal_theta(selection.series, b.theta_u).theta;
    b.v1 = return_level(b.theta, config.return_period, config.return_level_rule);
  }
  if (std::isnan(b.v1) && !selection.holdout.empty()) {
    const auto v = holdout_levels();
    b.v1 = *std::min_element(v.begin(), v.end());
  }
  if (std::isnan(b.v1))
    throw std::invalid_argument(
        "lift_v1 unresolved: set it, or a return_period, or holdout_top_k");

  // default upper bound 0: lift to exceedances of v1 rather than a capped interval
  b.v2 = std::isnan(config.lift_v2) ? 0.0 : config.lift_v2;
  if (!(b.v1 > -1.0 && b.v1 < 0.0 && b.v1 <= b.v2 && b.v2 <= 0.0))
    throw std::invalid_argument("lift bounds outside -1 < v1 <= v2 <= 0");
  return b;
}

DsParams ds_params_from(const PipelineConfig& config) {
  if (std::isnan(config.ds_threshold) || std::isnan(config.ds_scan_fraction))
    throw std::invalid_argument("config: ds_threshold and ds_scan_fraction must be set");
  DsParams params;
  params.n_neighbors = config.ds_neighbors;
  params.dist_threshold = config.ds_threshold;
  params.scan_fraction = config.ds_scan_fraction;
  params.coord_weight = config.ds_coord_weight;
  params.seed = config.seed;
  return params;
}

std::array<double, 6> summary_stats(const FieldSummary& s) {
  return {s.min, s.max, s.mean, s.median, s.iqr, s.range};
}

ValidationReport validate_stacks(const GridStack& simulations, const GridStack& holdout) {
  if (!(simulations.grid == holdout.grid))
    throw std::invalid_argument("validate: grids differ");
  if (simulations.m == 0 || holdout.m == 0)
    throw std::invalid_argument("validate: empty stack");

  ValidationReport report;
  report.simulated.reserve(simulations.m);
  for (std::size_t j = 0; j < simulations.m; ++j)
    report.simulated.push_back(summarize(simulations.replicate(j)));
  report.holdout.reserve(holdout.m);
  for (std::size_t j = 0; j < holdout.m; ++j)
    report.holdout.push_back(summarize(holdout.replicate(j)));

  std::array<double, 6> lo{}, hi{};
  for (std::size_t s = 0; s < 6; ++s) {
    lo[s] = summary_stats(report.simulated[0])[s];
    hi[s] = lo[s];
  }
  for (const FieldSummary& summary : report.simulated) {
    const auto stats = summary_stats(summary);
    for (std::size_t s = 0; s < 6; ++s) {
      lo[s] = std::min(lo[s], stats[s]);
      hi[s] = std::max(hi[s], stats[s]);
    }
  }

  std::size_t covered = 0;
  for (const FieldSummary& summary : report.holdout) {
    const auto stats = summary_stats(summary);
    std::array<bool, 6> flags{};
    for (std::size_t s = 0; s < 6; ++s) {
      flags[s] = lo[s] <= stats[s] && stats[s] <= hi[s];
      covered += flags[s];
    }
    report.coverage.push_back(flags);
  }
  report.coverage_fraction =
      static_cast<double>(covered) / (6.0 * static_cast<double>(holdout.m));
  return report;
}

void write_validation_csv(const std::filesystem::path& dir, const ValidationReport& report) {
  auto write_summaries = [](const fs::path& path, const char* label,
                            const std::vector<FieldSummary>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << label << ",min,max,mean,median,iqr,range\n";
    char line[160];
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto s = summary_stats(rows[i]);
      std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", i, s[0],
                    s[1], s[2], s[3], s[4], s[5]);
      out << line << '\n';
    }
  };
  write_summaries(dir / "validation_simulated.csv", "realization", report.simulated);
  write_summaries(dir / "validation_holdout.csv", "holdout", report.holdout);

  std::ofstream out(dir / "coverage.csv");
  if (!out) throw std::runtime_error("cannot open coverage.csv");
  out << "holdout,min,max,mean,median,iqr,range,covered_count\n";
  for (std::size_t i = 0; i < report.coverage.size(); ++i) {
    const auto& flags = report.coverage[i];
    int count = 0;
    out << i;
    for (bool f : flags) {
      out << ',' << (f ? 1 : 0);
      count += f;
    }
    out << ',' << count << '\n';
  }
}

RunResult run_pipeline(const PipelineConfig& config, const GridStack* input) {
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  write_status(dir, "incomplete");

  try {
    GridStack owned;
    const GridStack* x = input;
    if (!x) {
      owned = stage("input", [&] {
        if (!config.input_path.empty())
          return load_grid_stack(config.input_path, config.input_format);
        return synthesize_input(config);
      });
      x = &owned;
      if (config.input_path.empty())
        save_stack(dir, "input", owned, config.output_format);
    }

    const auto models = stage("margins", [&] { return fit_margins(*x, config); });
    write_margin_params_csv(dir / "margins.csv", models, x->grid);

    const GridStack uniform =
        stage("standardize", [&] { return standardize(*x, models, config.threads); });
    save_stack(dir, "uniform", uniform, config.output_format);

    const EventSelection selection =
        stage("events", [&] { return select_events(uniform, config); });
    write_summary_series_csv(dir / "summary_series.csv", selection.series);
    write_events_csv(dir / "events.csv", selection.events);
    write_holdout_csv(dir / "holdout.csv", selection.holdout, selection.series);

    const LiftBounds bounds =
        stage("lift-bounds", [&] { return resolve_lift_bounds(selection, config); });

    const auto lifted_events = stage("lift", [&] {
      std::size_t m_target = config.lift_count;
      const bool fixed_level = !std::isnan(config.lift_v1) && !std::isnan(config.lift_v2) &&
                               config.lift_v1 == config.lift_v2;
      if (fixed_level) {
        // Explicit degenerate interval: one deterministic lift per event.
        if (m_target != 0 && m_target != selection.events.size())
          throw std::invalid_argument("lift_count must equal the event count when v1 = v2");
        m_target = selection.events.size();
      } else if (m_target == 0) {
        m_target = config.realization_count;
      }
      const LiftSpec spec{bounds.v1, bounds.v2, bounds.u_marg,
                          rng::derive(config.seed, kLiftStream)};
      return lift_batch(selection.events, spec, m_target);
    });
    GridStack training = lifted_stack(lifted_events, x->grid);
    save_stack(dir, "lifted", training, config.output_format);
    write_lift_manifest_csv(dir / "lift_manifest.csv", lifted_events);

    if (config.include_bulk_replicates) {
      std::set<std::size_t> excluded(selection.holdout.begin(), selection.holdout.end());
      for (const ExtremeEvent& e : selection.events) excluded.insert(e.replicate);
      for (std::size_t j = 0; j < uniform.m; ++j) {
        if (excluded.count(j)) continue;
        const auto rep = uniform.replicate(j);
        training.values.insert(training.values.end(), rep.begin(), rep.end());
        ++training.m;
      }
    }

    const GridStack realizations_uniform = stage("resample", [&] {
      DsParams params = ds_params_from(config);
      params.seed = rng::derive(config.seed, kDsStream);
      return ds_simulate(training, x->grid, params, {}, config.realization_count,
                         config.threads);
    });
    save_stack(dir, "realizations_uniform", realizations_uniform, config.output_format);

    const GridStack realizations = stage("back-transform", [&] {
      return back_transform(realizations_uniform, models, config.threads);
    });
    save_stack(dir, "realizations", realizations, config.output_format);

    RunResult result;
    result.bounds = bounds;
    result.event_count = selection.events.size();
    result.lifted_count = lifted_events.size();
    result.hash = config_hash(config);
    result.output_dir = dir;

    if (!selection.holdout.empty()) {
      GridStack holdout{x->grid, 0, {}};
      for (std::size_t j : selection.holdout) {
        const auto rep = x->replicate(j);
        holdout.values.insert(holdout.values.end(), rep.begin(), rep.end());
        ++holdout.m;
      }
      save_stack(dir, "holdout", holdout, config.output_format);
      result.validation =
          stage("validate", [&] { return validate_stacks(realizations, holdout); });
      write_validation_csv(dir, result.validation);
    }

    std::ostringstream manifest;
    manifest << "key,value\n"
             << "config_hash," << result.hash << '\n'
             << "seed," << config.seed << '\n'
             << "replicates," << x->m << '\n'
             << "cells," << x->grid.cells() << '\n'
             << "events," << result.event_count << '\n'
             << "lifted," << result.lifted_count << '\n'
             << "realizations," << config.realization_count << '\n';
    char num[48];
    std::snprintf(num, sizeof num, "%.17g", bounds.v1);
    manifest << "v1," << num << '\n';
    std::snprintf(num, sizeof num, "%.17g", bounds.v2);
    manifest << "v2," << num << '\n';
    std::snprintf(num, sizeof num, "%.17g", bounds.u_marg);
    manifest << "u_marg," << num << '\n';
    std::snprintf(num, sizeof num, "%.17g", bounds.theta);
    manifest << "theta," << num << '\n';
    manifest << "synth_seed," << rng::derive(config.seed, kSynthStream) << '\n'
             << "lift_seed," << rng::derive(config.seed, kLiftStream) << '\n'
             << "ds_seed," << rng::derive(config.seed, kDsStream) << '\n';
    write_text(dir / "run_manifest.csv", manifest.str());
    write_text(dir / "effective_config.txt", canonical_text(config));

    write_status(dir, "complete");
    return result;
  } catch (const std::exception& e) {
    write_status(dir, std::string("failed: ") + e.what());
    throw;
  }
}

}  // namespace liftsim
