#include "liftsim/lifting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "liftsim/rng.hpp"

namespace liftsim {

namespace {

void check_lift_spec(const LiftSpec& spec) {
  if (!(spec.v1 > -1.0 && spec.v1 < 0.0))
    throw std::invalid_argument("lift: v1 must lie in (-1, 0)");
  if (!(spec.v1 <= spec.v2 && spec.v2 <= 0.0))
    throw std::invalid_argument("lift: need v1 <= v2 <= 0");
}

void check_u_marg(double u_marg) {
  if (!(u_marg > -1.0 && u_marg < 0.0))
    throw std::invalid_argument("lift: u_marg must lie in (-1, 0)");
}

}  // namespace

std::vector<ExtremeEvent> extract_events(const GridStack& uniform, const SummarySeries& series,
                                         double threshold, std::size_t min_separation,
                                         std::size_t max_events) {
  if (series.v.size() != uniform.m)
    throw std::invalid_argument("extract_events: series length does not match stack");

  std::vector<std::size_t> candidates;
  for (std::size_t j = 0; j < series.v.size(); ++j) {
    if (series.v[j] > threshold) candidates.push_back(j);
  }
  std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
    if (series.v[a] != series.v[b]) return series.v[a] > series.v[b];
    return a < b;
  });

  std::vector<std::size_t> kept;
  for (std::size_t j : candidates) {
    if (max_events != 0 && kept.size() >= max_events) break;
    bool blocked = false;
    for (std::size_t k : kept) {
      const std::size_t gap = j > k ? j - k : k - j;
      if (gap < min_separation) {
        blocked = true;
        break;
      }
    }
    if (!blocked) kept.push_back(j);
  }

  std::vector<ExtremeEvent> events;
  events.reserve(kept.size());
  for (std::size_t j : kept) events.push_back({j, series.v[j], uniform.field(j)});
  return events;
}

double sample_scale_target(const LiftSpec& spec, std::mt19937_64& rng) {
  check_lift_spec(spec);
  if (spec.v1 == spec.v2) return spec.v1;
  return std::uniform_real_distribution<double>(spec.v1, spec.v2)(rng);
}

Field lift_event(const ExtremeEvent& event, double v_new) {
  if (!(v_new < 0.0)) throw std::invalid_argument("lift_event: target level must be negative");
  if (!(event.v < 0.0)) throw std::invalid_argument("lift_event: event level must be negative");
  const double s = v_new / event.v;
  Field out = event.uniform_field;
  for (double& x : out.values) x *= s;
  return out;
}

LiftedEvent lift_event_postprocessed(const ExtremeEvent& event, double v_new, double u_marg) {
  check_u_marg(u_marg);
  if (!(v_new < 0.0 && event.v < 0.0))
    throw std::invalid_argument("lift: levels must be negative");
  const double s = v_new / event.v;
  if (s >= -1.0 / u_marg)
    throw std::runtime_error("lift: scale factor too large for u_marg (tail would leave (-1,0))");

  LiftedEvent out;
  out.source_replicate = event.replicate;
  out.v_source = event.v;
  out.v_new = v_new;
  out.s = s;
  out.uniform_field = event.uniform_field;
  const double bulk_slope = (1.0 + s * u_marg) / (1.0 + u_marg);
  for (double& x : out.uniform_field.values) {
    x = x > u_marg ? s * x : -1.0 + bulk_slope * (1.0 + x);
  }
  return out;
}

std::vector<LiftedEvent> lift_batch(const std::vector<ExtremeEvent>& events,
                                    const LiftSpec& spec, std::size_t m_target) {
  if (events.empty()) throw std::invalid_argument("lift_batch: no events");
  if (m_target == 0) throw std::invalid_argument("lift_batch: m_target must be positive");
  check_lift_spec(spec);
  check_u_marg(spec.u_marg);
  if (spec.v1 == spec.v2 && m_target != events.size())
    throw std::invalid_argument("lift_batch: m_target must equal the event count when v1 = v2");

  std::vector<const ExtremeEvent*> order;
  order.reserve(events.size());
  for (const auto& e : events) order.push_back(&e);
  std::stable_sort(order.begin(), order.end(),
                   [](const ExtremeEvent* a, const ExtremeEvent* b) { return a->v > b->v; });

  std::vector<LiftedEvent> lifted;
  lifted.reserve(m_target);
  for (std::size_t k = 0; k < m_target; ++k) {
    auto engine = rng::engine(spec.seed, k);
    const double v_new = sample_scale_target(spec, engine);
    lifted.push_back(
        lift_event_postprocessed(*order[k % order.size()], v_new, spec.u_marg));
  }
  return lifted;
}

GridStack lifted_stack(const std::vector<LiftedEvent>& lifted, const Grid& grid) {
  GridStack stack{grid, lifted.size(), {}};
  stack.values.reserve(lifted.size() * grid.cells());
  for (const auto& e : lifted) {
    if (!(e.uniform_field.grid == grid))
      throw std::invalid_argument("lifted_stack: grid mismatch");
    stack.values.insert(stack.values.end(), e.uniform_field.values.begin(),
                        e.uniform_field.values.end());
  }
  return stack;
}

void write_lift_manifest_csv(const std::filesystem::path& path,
                             const std::vector<LiftedEvent>& lifted) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << "output_index,source_replicate,v_source,v_new,s\n";
  char line[128];
  for (std::size_t k = 0; k < lifted.size(); ++k) {
    const auto& e = lifted[k];
    std::snprintf(line, sizeof(line), "%zu,%zu,%.17g,%.17g,%.17g\n", k, e.source_replicate,
                  e.v_source, e.v_new, e.s);
    out << line;
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace liftsim
