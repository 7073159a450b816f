#include "liftsim/direct_sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "liftsim/parallel.hpp"
#include "liftsim/rng.hpp"

namespace liftsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Offset {
  int dr, dc;
};

// Neighbor visiting order around any cell: distance, then angle, then lag.
std::vector<Offset> sorted_offsets(const Grid& g) {
  struct Keyed {
    double d2, angle;
    int dr, dc;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(std::size_t(2 * g.ny - 1) * std::size_t(2 * g.nx - 1) - 1);
  for (int dr = -int(g.ny) + 1; dr < int(g.ny); ++dr) {
    for (int dc = -int(g.nx) + 1; dc < int(g.nx); ++dc) {
      if (dr == 0 && dc == 0) continue;
      const double py = dr * g.dy;
      const double px = dc * g.dx;
      double angle = std::atan2(py, px);
      if (angle < 0.0) angle += 2.0 * std::numbers::pi;
      keyed.push_back({px * px + py * py, angle, dr, dc});
    }
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    if (a.angle != b.angle) return a.angle < b.angle;
    if (a.dr != b.dr) return a.dr < b.dr;
    return a.dc < b.dc;
  });
  std::vector<Offset> out;
  out.reserve(keyed.size());
  for (const auto& k : keyed) out.push_back({k.dr, k.dc});
  return out;
}

void check_params(const DsParams& p) {
  if (p.n_neighbors < 1) throw std::invalid_argument("ds: n_neighbors must be >= 1");
  if (!(p.dist_threshold >= 0.0 && p.dist_threshold <= 1.0))
    throw std::invalid_argument("ds: dist_threshold outside [0,1]");
  if (!(p.scan_fraction > 0.0 && p.scan_fraction <= 1.0))
    throw std::invalid_argument("ds: scan_fraction outside (0,1]");
  if (!(p.coord_weight >= 0.0 && p.coord_weight <= 1.0))
    throw std::invalid_argument("ds: coord_weight outside [0,1]");
}

struct NodeStats {
  double paste_distance_sum = 0.0;
  std::size_t nodes = 0;
  std::size_t threshold_accepts = 0;
};

class Simulator {
 public:
  Simulator(const GridStack& training, const Grid& target, const DsParams& params,
            const DsConditioning& conditioning)
      : training_(training), target_(target), params_(params), conditioning_(conditioning) {
    check_params(params);
    if (training.m == 0 || training.grid.cells() == 0)
      throw std::invalid_argument("ds: empty training stack");
    if (target.cells() == 0) throw std::invalid_argument("ds: empty target grid");
    if (has_missing(training.values))
      throw std::invalid_argument("ds: training stack has missing values");
    if (conditioning.cells.size() != conditioning.values.size())
      throw std::invalid_argument("ds: conditioning cells/values length mismatch");
    for (std::size_t cell : conditioning.cells) {
      if (cell >= target.cells())
        throw std::invalid_argument("ds: conditioning cell outside the target grid");
    }

    double lo = training.values[0], hi = training.values[0];
    for (double v : training.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    value_range_ = hi - lo;

    offsets_ = sorted_offsets(target);
    n_candidates_ = training.m * training.grid.cells();
    if (n_candidates_ > std::numeric_limits<std::uint32_t>::max())
      throw std::invalid_argument("ds: training stack too large");
  }

  void realize(std::uint64_t stream_seed, std::span<double> out, NodeStats& stats) const {
    const std::size_t n = target_.cells();
    auto engine = rng::engine(stream_seed);

    std::vector<std::uint32_t> candidates(n_candidates_);
    for (std::size_t i = 0; i < n_candidates_; ++i)
      candidates[i] = static_cast<std::uint32_t>(i);
    std::shuffle(candidates.begin(), candidates.end(), engine);

    std::vector<char> informed(n, 0);
    std::vector<std::uint32_t> informed_list;
    informed_list.reserve(n);
    for (std::size_t i = 0; i < conditioning_.cells.size(); ++i) {
      const std::size_t cell = conditioning_.cells[i];
      out[cell] = conditioning_.values[i];
      if (!informed[cell]) informed_list.push_back(static_cast<std::uint32_t>(cell));
      informed[cell] = 1;
    }

    std::vector<std::uint32_t> path;
    path.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!informed[i]) path.push_back(static_cast<std::uint32_t>(i));
    }
    std::shuffle(path.begin(), path.end(), engine);

    const std::size_t n_scan = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(params_.scan_fraction *
                                              static_cast<double>(n_candidates_))));
    std::uniform_int_distribution<std::size_t> phase(0, n_candidates_ - 1);

    std::vector<Offset> pat_offsets;
    std::vector<double> pat_values;
    for (std::uint32_t node : path) {
      gather_pattern(node, out, informed, informed_list, pat_offsets, pat_values);
      const std::size_t best =
          scan(node, pat_offsets, pat_values, candidates, phase(engine), n_scan, stats);
      out[node] = training_.values[best];
      informed[node] = 1;
      informed_list.push_back(node);
      ++stats.nodes;
    }
  }

 private:
  // Nearest informed cells around `node`. A direct scan of the informed list
  // wins while it is short; afterwards walking the precomputed offset order
  // finds n_neighbors quickly because informed cells are dense. Both produce
  // the same cells in the same order.
  void gather_pattern(std::uint32_t node, std::span<const double> values,
                      const std::vector<char>& informed,
                      const std::vector<std::uint32_t>& informed_list,
                      std::vector<Offset>& offsets, std::vector<double>& out_values) const {
    offsets.clear();
    out_values.clear();
    const auto k = static_cast<std::size_t>(params_.n_neighbors);
    const int r = static_cast<int>(node / target_.nx);
    const int c = static_cast<int>(node % target_.nx);

    if (informed_list.size() <= 64) {
      struct Keyed {
        double d2, angle;
        int dr, dc;
      };
      std::vector<Keyed> keyed;
      keyed.reserve(informed_list.size());
      for (std::uint32_t cell : informed_list) {
        const int dr = static_cast<int>(cell / target_.nx) - r;
        const int dc = static_cast<int>(cell % target_.nx) - c;
        const double py = dr * target_.dy;
        const double px = dc * target_.dx;
        double angle = std::atan2(py, px);
        if (angle < 0.0) angle += 2.0 * std::numbers::pi;
        keyed.push_back({px * px + py * py, angle, dr, dc});
      }
      std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
        if (a.d2 != b.d2) return a.d2 < b.d2;
        if (a.angle != b.angle) return a.angle < b.angle;
        if (a.dr != b.dr) return a.dr < b.dr;
        return a.dc < b.dc;
      });
      const std::size_t take = std::min(k, keyed.size());
      for (std::size_t i = 0; i < take; ++i) {
        offsets.push_back({keyed[i].dr, keyed[i].dc});
        const std::size_t cell =
            std::size_t(r + keyed[i].dr) * target_.nx + std::size_t(c + keyed[i].dc);
        out_values.push_back(values[cell]);
      }
      return;
    }

    for (const Offset& o : offsets_) {
      const int rr = r + o.dr;
      const int cc = c + o.dc;
      if (rr < 0 || cc < 0 || rr >= static_cast<int>(target_.ny) ||
          cc >= static_cast<int>(target_.nx))
        continue;
      const std::size_t cell = std::size_t(rr) * target_.nx + std::size_t(cc);
      if (!informed[cell]) continue;
      offsets.push_back(o);
      out_values.push_back(values[cell]);
      if (offsets.size() == k) break;
    }
  }

  std::size_t scan(std::uint32_t node, const std::vector<Offset>& offsets,
                   const std::vector<double>& pat_values,
                   const std::vector<std::uint32_t>& candidates, std::size_t start,
                   std::size_t n_scan, NodeStats& stats) const {
    const Grid& tg = training_.grid;
    const std::size_t t_cells = tg.cells();
    const double w = params_.coord_weight;
    const double threshold = params_.dist_threshold;
    const double node_ax =
        (static_cast<double>(node % target_.nx) + 0.5) / static_cast<double>(target_.nx);
    const double node_ay =
        (static_cast<double>(node / target_.nx) + 0.5) / static_cast<double>(target_.ny);

    int min_dr = 0, max_dr = 0, min_dc = 0, max_dc = 0;
    for (const Offset& o : offsets) {
      min_dr = std::min(min_dr, o.dr);
      max_dr = std::max(max_dr, o.dr);
      min_dc = std::min(min_dc, o.dc);
      max_dc = std::max(max_dc, o.dc);
    }
    const std::size_t npat = offsets.size();
    const double val_scale =
        npat == 0 || value_range_ == 0.0
            ? 0.0
            : (1.0 - w) / (value_range_ * static_cast<double>(npat));

    double best_d = kInf;
    std::size_t best = std::size_t(-1);
    for (std::size_t t = 0; t < n_candidates_; ++t) {
      if (t >= n_scan && best != std::size_t(-1)) break;
      std::size_t pos = start + t;
      if (pos >= n_candidates_) pos -= n_candidates_;
      const std::uint32_t cand = candidates[pos];
      const std::size_t cell = cand % t_cells;
      const int r = static_cast<int>(cell / tg.nx);
      const int c = static_cast<int>(cell % tg.nx);
      if (r + min_dr < 0 || c + min_dc < 0 || r + max_dr >= static_cast<int>(tg.ny) ||
          c + max_dc >= static_cast<int>(tg.nx))
        continue;  // pattern would leave the training grid

      const double ax = (c + 0.5) / static_cast<double>(tg.nx);
      const double ay = (r + 0.5) / static_cast<double>(tg.ny);
      const double dxa = ax - node_ax;
      const double dya = ay - node_ay;
      double d = w * (std::sqrt(dxa * dxa + dya * dya) / std::numbers::sqrt2);
      if (d >= best_d) continue;

      if (val_scale > 0.0) {
        const std::size_t rep_base = cand - cell;
        double sum = 0.0;
        const double limit = (best_d - d) / val_scale;
        bool aborted = false;
        for (std::size_t i = 0; i < npat; ++i) {
          const std::size_t off =
              std::size_t(r + offsets[i].dr) * tg.nx + std::size_t(c + offsets[i].dc);
          sum += std::fabs(training_.values[rep_base + off] - pat_values[i]);
          if (sum >= limit) {
            aborted = true;
            break;
          }
        }
        if (aborted) continue;
        d += sum * val_scale;
      }

      if (d < best_d) {
        best_d = d;
        best = pos;
        if (d <= threshold) {
          ++stats.threshold_accepts;
          break;
        }
      }
    }
    if (best == std::size_t(-1))
      throw std::runtime_error("ds: no usable candidate (pattern exceeds the training grid)");
    stats.paste_distance_sum += best_d;
    return candidates[best];
  }

  const GridStack& training_;
  Grid target_;
  DsParams params_;
  DsConditioning conditioning_;
  double value_range_ = 0.0;
  std::vector<Offset> offsets_;
  std::size_t n_candidates_ = 0;
};

}  // namespace

double pattern_distance(const DsPattern& a, const DsPattern& b, double coord_weight,
                        double value_range) {
  if (a.values.size() != b.values.size())
    throw std::invalid_argument("pattern_distance: pattern sizes differ");
  if (!(coord_weight >= 0.0 && coord_weight <= 1.0))
    throw std::invalid_argument("pattern_distance: coord_weight outside [0,1]");
  double d_val = 0.0;
  if (!a.values.empty() && value_range > 0.0) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
      sum += std::fabs(a.values[i] - b.values[i]);
    d_val = sum / (value_range * static_cast<double>(a.values.size()));
  }
  const double dxa = a.anchor_x - b.anchor_x;
  const double dya = a.anchor_y - b.anchor_y;
  const double d_coord = std::sqrt(dxa * dxa + dya * dya) / std::numbers::sqrt2;
  return (1.0 - coord_weight) * d_val + coord_weight * d_coord;
}

GridStack ds_simulate(const GridStack& training, const Grid& target, const DsParams& params,
                      const DsConditioning& conditioning, std::size_t count, int threads,
                      DsStats* stats) {
  if (count == 0) throw std::invalid_argument("ds_simulate: count must be positive");
  Simulator sim(training, target, params, conditioning);

  GridStack out{target, count, std::vector<double>(count * target.cells())};
  std::vector<NodeStats> per_realization(count);
  parallel_for(count, threads, [&](std::size_t k) {
    sim.realize(rng::derive(params.seed, k), out.replicate(k), per_realization[k]);
  });

  if (stats) {
    DsStats total;
    double dist_sum = 0.0;
    for (const NodeStats& ns : per_realization) {
      total.nodes += ns.nodes;
      total.threshold_accepts += ns.threshold_accepts;
      dist_sum += ns.paste_distance_sum;
    }
    total.mean_paste_distance =
        total.nodes == 0 ? 0.0 : dist_sum / static_cast<double>(total.nodes);
    *stats = total;
  }
  return out;
}

}  // namespace liftsim
