#include "liftsim/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace liftsim {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

double parse_double(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end != value.c_str() + value.size() || value.empty() || errno == ERANGE)
    throw std::invalid_argument("config: bad number for " + key + ": " + value);
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (end != value.c_str() + value.size() || value.empty() || errno == ERANGE ||
      value.front() == '-')
    throw std::invalid_argument("config: bad integer for " + key + ": " + value);
  return v;
}

int parse_int(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(value.c_str(), &end, 10);
  if (end != value.c_str() + value.size() || value.empty() || errno == ERANGE ||
      v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw std::invalid_argument("config: bad integer for " + key + ": " + value);
  return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("config: bad flag for " + key + ": " + value);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_config(const PipelineConfig& c) {
  if (!(c.p_u > 0.0 && c.p_u < 1.0))
    throw std::invalid_argument("config: p_u outside (0,1)");
  if (!(c.theta_threshold_quantile > 0.0 && c.theta_threshold_quantile < 1.0))
    throw std::invalid_argument("config: theta_threshold_quantile outside (0,1)");
  if (c.realization_count == 0)
    throw std::invalid_argument("config: realization_count must be positive");
  if (std::isnan(c.event_threshold) && c.event_top_k == 0)
    throw std::invalid_argument("config: event_top_k required when event_threshold is unset");
  if (c.threads < 0) throw std::invalid_argument("config: threads must be >= 0");
}

}  // namespace

MarginPooling parse_margin_pooling(std::string_view name) {
  if (name == "auto") return MarginPooling::automatic;
  if (name == "pooled") return MarginPooling::pooled;
  if (name == "per-cell") return MarginPooling::per_cell;
  throw std::invalid_argument("unknown margin pooling: " + std::string(name));
}

std::string_view margin_pooling_name(MarginPooling pooling) {
  switch (pooling) {
    case MarginPooling::automatic: return "auto";
    case MarginPooling::pooled: return "pooled";
    case MarginPooling::per_cell: return "per-cell";
  }
  throw std::logic_error("margin_pooling_name: bad enum");
}

PipelineConfig parse_config(const std::string& text) {
  std::map<std::string, std::string> entries;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  " is not key=value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty())
      throw std::invalid_argument("config: empty key on line " + std::to_string(line_no));
    if (!entries.emplace(key, value).second)
      throw std::invalid_argument("config: repeated key " + key);
  }

  PipelineConfig c;
  auto take = [&](const char* key) -> const std::string* {
    const auto it = entries.find(key);
    if (it == entries.end()) return nullptr;
    return &it->second;
  };
  auto set_double = [&](const char* key, double& field) {
    if (const std::string* v = take(key)) field = parse_double(key, *v);
  };
  auto set_size = [&](const char* key, std::size_t& field) {
    if (const std::string* v = take(key)) field = parse_u64(key, *v);
  };

  if (const std::string* v = take("input_path")) c.input_path = *v;
  if (const std::string* v = take("input_format")) c.input_format = parse_file_format(*v);
  if (const std::string* v = take("output_dir")) c.output_dir = *v;
  if (const std::string* v = take("output_format")) c.output_format = parse_file_format(*v);
  if (const std::string* v = take("seed")) c.seed = parse_u64("seed", *v);
  if (const std::string* v = take("threads")) c.threads = parse_int("threads", *v);

  set_double("p_u", c.p_u);
  if (const std::string* v = take("shape_method")) c.shape_method = parse_shape_method(*v);
  if (const std::string* v = take("margin_pooling"))
    c.margin_pooling = parse_margin_pooling(*v);
  set_size("pooled_sample_cap", c.pooled_sample_cap);

  if (const std::string* v = take("risk_kind")) c.risk_kind = parse_risk_kind(*v);
  set_size("risk_index", c.risk_index);

  set_double("event_threshold", c.event_threshold);
  set_size("event_top_k", c.event_top_k);
  set_size("min_separation", c.min_separation);
  set_size("holdout_top_k", c.holdout_top_k);

  set_double("lift_v1", c.lift_v1);
  set_double("lift_v2", c.lift_v2);
  set_double("lift_u_marg", c.lift_u_marg);
  set_double("return_period", c.return_period);
  set_double("theta_threshold_quantile", c.theta_threshold_quantile);
  if (const std::string* v = take("return_level_rule"))
    c.return_level_rule = parse_return_level_rule(*v);
  set_size("lift_count", c.lift_count);
  set_size("realization_count", c.realization_count);

  if (const std::string* v = take("ds_neighbors"))
    c.ds_neighbors = parse_int("ds_neighbors", *v);
  set_double("ds_threshold", c.ds_threshold);
  set_double("ds_scan_fraction", c.ds_scan_fraction);
  set_double("ds_coord_weight", c.ds_coord_weight);

  if (const std::string* v = take("include_bulk_replicates"))
    c.include_bulk_replicates = parse_bool("include_bulk_replicates", *v);

  if (const std::string* v = take("synth_nx"))
    c.synth_nx = static_cast<std::uint32_t>(parse_u64("synth_nx", *v));
  if (const std::string* v = take("synth_ny"))
    c.synth_ny = static_cast<std::uint32_t>(parse_u64("synth_ny", *v));
  set_size("synth_m", c.synth_m);
  if (const std::string* v = take("synth_family"))
    c.synth_family = synth::parse_field_family(*v);
  set_double("synth_nu", c.synth_nu);
  set_double("synth_range", c.synth_range);
  set_double("synth_variance", c.synth_variance);
  if (const std::string* v = take("synth_margin"))
    c.synth_margin = synth::parse_margin_transform(*v);

  std::vector<std::string> consumed = {
      "input_path", "input_format", "output_dir", "output_format", "seed", "threads",
      "p_u", "shape_method", "margin_pooling", "pooled_sample_cap", "risk_kind", "risk_index",
      "event_threshold", "event_top_k", "min_separation", "holdout_top_k",
      "lift_v1", "lift_v2", "lift_u_marg", "return_period", "theta_threshold_quantile",
      "return_level_rule", "lift_count", "realization_count",
      "ds_neighbors", "ds_threshold", "ds_scan_fraction", "ds_coord_weight",
      "include_bulk_replicates",
      "synth_nx", "synth_ny", "synth_m", "synth_family", "synth_nu", "synth_range",
      "synth_variance", "synth_margin"};
  for (const auto& [key, value] : entries) {
    if (std::find(consumed.begin(), consumed.end(), key) == consumed.end())
      throw std::invalid_argument("config: unknown key " + key);
  }

  check_config(c);
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string canonical_text(const PipelineConfig& c) {
  std::ostringstream out;
  out << "ds_coord_weight=" << format_double(c.ds_coord_weight) << '\n'
      << "ds_neighbors=" << c.ds_neighbors << '\n'
      << "ds_scan_fraction=" << format_double(c.ds_scan_fraction) << '\n'
      << "ds_threshold=" << format_double(c.ds_threshold) << '\n'
      << "event_threshold=" << format_double(c.event_threshold) << '\n'
      << "event_top_k=" << c.event_top_k << '\n'
      << "holdout_top_k=" << c.holdout_top_k << '\n'
      << "include_bulk_replicates=" << (c.include_bulk_replicates ? "true" : "false") << '\n'
      << "input_format=" << file_format_name(c.input_format) << '\n'
      << "input_path=" << c.input_path << '\n'
      << "lift_count=" << c.lift_count << '\n'
      << "lift_u_marg=" << format_double(c.lift_u_marg) << '\n'
      << "lift_v1=" << format_double(c.lift_v1) << '\n'
      << "lift_v2=" << format_double(c.lift_v2) << '\n'
      << "margin_pooling=" << margin_pooling_name(c.margin_pooling) << '\n'
      << "min_separation=" << c.min_separation << '\n'
      << "output_dir=" << c.output_dir << '\n'
      << "output_format=" << file_format_name(c.output_format) << '\n'
      << "p_u=" << format_double(c.p_u) << '\n'
      << "pooled_sample_cap=" << c.pooled_sample_cap << '\n'
      << "realization_count=" << c.realization_count << '\n'
      << "return_level_rule=" << return_level_rule_name(c.return_level_rule) << '\n'
      << "return_period=" << format_double(c.return_period) << '\n'
      << "risk_index=" << c.risk_index << '\n'
      << "risk_kind=" << risk_kind_name(c.risk_kind) << '\n'
      << "seed=" << c.seed << '\n'
      << "shape_method=" << shape_method_name(c.shape_method) << '\n'
      << "synth_family=" << synth::field_family_name(c.synth_family) << '\n'
      << "synth_m=" << c.synth_m << '\n'
      << "synth_margin=" << synth::margin_transform_name(c.synth_margin) << '\n'
      << "synth_nu=" << format_double(c.synth_nu) << '\n'
      << "synth_nx=" << c.synth_nx << '\n'
      << "synth_ny=" << c.synth_ny << '\n'
      << "synth_range=" << format_double(c.synth_range) << '\n'
      << "synth_variance=" << format_double(c.synth_variance) << '\n'
      << "theta_threshold_quantile=" << format_double(c.theta_threshold_quantile) << '\n'
      << "threads=" << c.threads << '\n';
  return out.str();
}

std::uint64_t config_hash(const PipelineConfig& c) {
  const std::string text = canonical_text(c);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char byte : text) {
    h ^= byte;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace liftsim
