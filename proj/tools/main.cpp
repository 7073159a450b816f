#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <string_view>

#include <CLI11.hpp>

#include "liftsim/config.hpp"
#include "liftsim/direct_sampling.hpp"
#include "liftsim/grid_io.hpp"
#include "liftsim/lifting.hpp"
#include "liftsim/marginal.hpp"
#include "liftsim/pipeline.hpp"
#include "liftsim/synth.hpp"

namespace {

using namespace liftsim;
namespace fs = std::filesystem;

// Stack files are self-describing: binary ones start with the GRDS magic.
GridStack load_stack_auto(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4] = {};
  in.read(magic, 4);
  const bool binary = in.gcount() == 4 && std::string_view(magic, 4) == "GRDS";
  return load_grid_stack(path, binary ? FileFormat::binary : FileFormat::csv_long);
}

struct Opts {
  std::string config;
  std::string in;
  std::string training;
  std::string sim;
  std::string holdout;
  std::string out;
  std::string format;
  std::string margins_from;
  std::uint64_t seed = 0;
  int threads = 1;
  bool inverse = false;
};

void add_common(CLI::App* sub, Opts& o, bool with_in) {
  sub->add_option("--config", o.config, "key=value run description file");
  sub->add_option("--seed", o.seed, "master seed (overrides the config)");
  sub->add_option("--out", o.out, "output directory (overrides the config)");
  sub->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"binary", "csv-long"}));
  sub->add_option("--threads", o.threads, "worker threads, 0 = all cores");
  if (with_in) sub->add_option("--in", o.in, "input stack (overrides input_path)");
}

PipelineConfig effective_config(const Opts& o, const CLI::App* sub) {
  PipelineConfig cfg = o.config.empty() ? PipelineConfig{} : load_config(o.config);
  if (sub->count("--seed")) cfg.seed = o.seed;
  if (sub->count("--out")) cfg.output_dir = o.out;
  if (sub->count("--format")) cfg.output_format = parse_file_format(o.format);
  if (sub->count("--threads")) cfg.threads = o.threads;
  if (const CLI::Option* in = sub->get_option_no_throw("--in"); in && in->count())
    cfg.input_path = o.in;
  return cfg;
}

GridStack input_stack(const PipelineConfig& cfg) {
  if (!cfg.input_path.empty()) return load_stack_auto(cfg.input_path);
  return synthesize_input(cfg);
}

std::string stack_name(const char* base, FileFormat format) {
  return std::string(base) + (format == FileFormat::binary ? ".grds" : ".csv");
}

fs::path out_dir(const PipelineConfig& cfg) {
  fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  return dir;
}

void save_named(const PipelineConfig& cfg, const char* base, const GridStack& stack) {
  const fs::path path = out_dir(cfg) / stack_name(base, cfg.output_format);
  save_grid_stack(stack, path, cfg.output_format);
  std::cout << path.string() << '\n';
}

int cmd_fit_margins(const PipelineConfig& cfg) {
  const GridStack stack = input_stack(cfg);
  const auto models = fit_margins(stack, cfg);
  const fs::path path = out_dir(cfg) / "margins.csv";
  write_margin_params_csv(path, models, stack.grid);
  std::cout << path.string() << " (" << models.size() << " models)\n";
  return 0;
}

int cmd_transform(const PipelineConfig& cfg, const Opts& o) {
  const GridStack stack = input_stack(cfg);
  std::vector<MarginalModel> models;
  if (o.margins_from.empty()) {
    models = fit_margins(stack, cfg);
  } else {
    const GridStack source = load_stack_auto(o.margins_from);
    models = fit_margins(source, cfg);
  }
  if (o.inverse) {
    save_named(cfg, "backtransformed", back_transform(stack, models, cfg.threads));
  } else {
    save_named(cfg, "uniform", standardize(stack, models, cfg.threads));
  }
  return 0;
}

int cmd_extract_events(const PipelineConfig& cfg) {
  const GridStack stack = input_stack(cfg);
  const auto models = fit_margins(stack, cfg);
  const GridStack uniform = standardize(stack, models, cfg.threads);
  const EventSelection sel = select_events(uniform, cfg);
  const fs::path dir = out_dir(cfg);
  write_summary_series_csv(dir / "summary_series.csv", sel.series);
  std::ofstream events(dir / "events.csv");
  events << "event,replicate,v\n";
  for (std::size_t i = 0; i < sel.events.size(); ++i)
    events << i << ',' << sel.events[i].replicate << ',' << sel.events[i].v << '\n';
  std::cout << sel.events.size() << " events, " << sel.holdout.size() << " holdout\n";
  return 0;
}

int cmd_lift(const PipelineConfig& cfg) {
  const GridStack stack = input_stack(cfg);
  const auto models = fit_margins(stack, cfg);
  const GridStack uniform = standardize(stack, models, cfg.threads);
  const EventSelection sel = select_events(uniform, cfg);
  const LiftBounds bounds = resolve_lift_bounds(sel, cfg);
  std::size_t m_target = cfg.lift_count != 0 ? cfg.lift_count : cfg.realization_count;
  if (!std::isnan(cfg.lift_v1) && cfg.lift_v1 == cfg.lift_v2) m_target = sel.events.size();
  const LiftSpec spec{bounds.v1, bounds.v2, bounds.u_marg, cfg.seed};
  const auto lifted = lift_batch(sel.events, spec, m_target);
  save_named(cfg, "lifted", lifted_stack(lifted, stack.grid));
  write_lift_manifest_csv(out_dir(cfg) / "lift_manifest.csv", lifted);
  std::cout << lifted.size() << " lifted events on [" << bounds.v1 << ", " << bounds.v2
            << "]\n";
  return 0;
}

int cmd_resample(const PipelineConfig& cfg, const Opts& o) {
  const GridStack training = load_stack_auto(o.training);
  DsParams params = ds_params_from(cfg);
  DsStats stats;
  const GridStack out = ds_simulate(training, training.grid, params, {},
                                    cfg.realization_count, cfg.threads, &stats);
  save_named(cfg, "realizations_uniform", out);
  std::cout << out.m << " realizations, mean paste distance " << stats.mean_paste_distance
            << '\n';
  return 0;
}

int cmd_synth(const PipelineConfig& cfg) {
  save_named(cfg, "synth", synthesize_input(cfg));
  return 0;
}

int cmd_validate(const PipelineConfig& cfg, const Opts& o) {
  const GridStack sim = load_stack_auto(o.sim);
  const GridStack holdout = load_stack_auto(o.holdout);
  const ValidationReport report = validate_stacks(sim, holdout);
  write_validation_csv(out_dir(cfg), report);
  std::cout << "coverage fraction " << report.coverage_fraction << '\n';
  return 0;
}

int cmd_run(const PipelineConfig& cfg) {
  const RunResult result = run_pipeline(cfg);
  std::cout << result.event_count << " events, " << result.lifted_count << " lifted, bounds ["
            << result.bounds.v1 << ", " << result.bounds.v2 << "]\n";
  if (!result.validation.holdout.empty())
    std::cout << "coverage fraction " << result.validation.coverage_fraction << '\n';
  std::cout << "outputs in " << result.output_dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"enrich replicated gridded datasets with resampled extreme episodes"};
  app.require_subcommand(1);

  Opts o;
  CLI::App* fit = app.add_subcommand("fit-margins", "fit spliced kernel/GPD margins");
  add_common(fit, o, true);

  CLI::App* transform =
      app.add_subcommand("transform", "map a stack onto the uniform scale (or back)");
  add_common(transform, o, true);
  transform->add_flag("--inverse", o.inverse, "apply the inverse transform");
  transform->add_option("--margins-from", o.margins_from,
                        "fit the margins on this stack instead of the input");

  CLI::App* extract =
      app.add_subcommand("extract-events", "summary series and declustered extremes");
  add_common(extract, o, true);

  CLI::App* lift = app.add_subcommand("lift", "rescale extreme events to target levels");
  add_common(lift, o, true);

  CLI::App* resample =
      app.add_subcommand("resample", "Direct Sampling realizations from a training stack");
  add_common(resample, o, false);
  resample->add_option("--training", o.training, "uniform-scale training stack")->required();

  CLI::App* synth = app.add_subcommand("synth", "simulate a synthetic input stack");
  add_common(synth, o, false);

  CLI::App* validate =
      app.add_subcommand("validate", "coverage of holdout summaries by simulations");
  add_common(validate, o, false);
  validate->add_option("--sim", o.sim, "simulated stack")->required();
  validate->add_option("--holdout", o.holdout, "holdout stack")->required();

  CLI::App* run = app.add_subcommand("run", "full enrichment pipeline");
  add_common(run, o, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(fit)) return cmd_fit_margins(effective_config(o, fit));
    if (app.got_subcommand(transform)) return cmd_transform(effective_config(o, transform), o);
    if (app.got_subcommand(extract)) return cmd_extract_events(effective_config(o, extract));
    if (app.got_subcommand(lift)) return cmd_lift(effective_config(o, lift));
    if (app.got_subcommand(resample)) return cmd_resample(effective_config(o, resample), o);
    if (app.got_subcommand(synth)) return cmd_synth(effective_config(o, synth));
    if (app.got_subcommand(validate)) return cmd_validate(effective_config(o, validate), o);
    if (app.got_subcommand(run)) return cmd_run(effective_config(o, run));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
