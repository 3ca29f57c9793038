#pragma once

// Attachment planning over the coverage graph: fewest handovers first, then
// the widest bottleneck residual bandwidth, then the strongest mean RSS, then
// the lowest AP id sequence.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hetsim/topology.hpp"

namespace hetsim {

class CoverageGapError : public std::runtime_error {
 public:
  CoverageGapError(double gap_start, double gap_end)
      : std::runtime_error(message(gap_start, gap_end)), gap_start_(gap_start), gap_end_(gap_end) {}

  double gap_start() const { return gap_start_; }
  double gap_end() const { return gap_end_; }

 private:
  static std::string message(double a, double b) {
    std::ostringstream os;
    if (a < b)
      os << "coverage gap: no attachment covers (" << a << ", " << b << ") m";
    else
      os << "coverage gap: overlap too short to hand over near " << a << " m";
    return os.str();
  }
  double gap_start_;
  double gap_end_;
};

// Largest uncovered stretch of [0, L] given the intervals. Returns (f, f) at
// the reachable frontier when the union is gap-free but no chain exists.
inline std::pair<double, double> largest_gap(std::span<const CoverageInterval> intervals, double length,
                                             double frontier) {
  std::vector<CoverageInterval> sorted(intervals.begin(), intervals.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
  double best_a = 0.0;
  double best_b = 0.0;
  double reach = 0.0;
  bool have_any = false;
  for (const auto& iv : sorted) {
    const double gap_start = have_any ? reach : 0.0;
    if (iv.start > gap_start && iv.start - gap_start > best_b - best_a) {
      best_a = gap_start;
      best_b = iv.start;
    }
    reach = have_any ? std::max(reach, iv.end) : iv.end;
    have_any = true;
  }
  const double tail_start = have_any ? reach : 0.0;
  if (length > tail_start && length - tail_start > best_b - best_a) {
    best_a = tail_start;
    best_b = length;
  }
  if (best_b > best_a) return {best_a, best_b};
  return {frontier, frontier};
}

struct PlanSegment {
  double start;
  double end;
  std::string ap_id;
  std::size_t node;  // graph node index
  friend bool operator==(const PlanSegment&, const PlanSegment&) = default;
};

struct OverlapWindow {
  double start;
  double end;
  bool contains(double s) const { return start <= s && s <= end; }
  friend bool operator==(const OverlapWindow&, const OverlapWindow&) = default;
};

struct AttachmentPlan {
  std::vector<PlanSegment> segments;
  std::vector<double> handoff_points;   // one per adjacent segment pair
  std::vector<OverlapWindow> windows;   // overlap window of each handoff
  double min_residual_bw_kbps{0.0};
  double mean_rss_dbm{0.0};

  std::size_t handover_count() const { return segments.empty() ? 0 : segments.size() - 1; }
  bool empty() const { return segments.empty(); }
  friend bool operator==(const AttachmentPlan&, const AttachmentPlan&) = default;
};

namespace detail {

inline constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();

// Fewest interval nodes from S to each node, restricted to nodes passing keep.
template <typename Keep>
std::vector<std::size_t> hop_counts(const CoverageGraph& g, Keep keep) {
  std::vector<std::size_t> hops(g.node_count(), kUnreached);
  hops[g.source()] = 0;
  // Node indices are already a topological order.
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    if (hops[v] == kUnreached) continue;
    for (auto e : g.out_edges(v)) {
      const auto w = g.edge(e).to;
      if (g.is_interval(w) && !keep(w)) continue;
      const std::size_t add = g.is_interval(w) ? 1 : 0;
      hops[w] = std::min(hops[w], hops[v] + add);
    }
  }
  return hops;
}

inline double reach_frontier(const CoverageGraph& g) {
  const auto hops = hop_counts(g, [](std::size_t) { return true; });
  double frontier = 0.0;
  for (std::size_t v = 1; v + 1 < g.node_count(); ++v)
    if (hops[v] != kUnreached) frontier = std::max(frontier, g.interval(v).end);
  return frontier;
}

}  // namespace detail

inline AttachmentPlan plan(const CoverageGraph& g) {
  using detail::kUnreached;
  const auto all = detail::hop_counts(g, [](std::size_t) { return true; });
  const std::size_t k = all[g.sink()];
  if (k == kUnreached) {
    const auto [a, b] = largest_gap(g.intervals(), g.route_length(), detail::reach_frontier(g));
    throw CoverageGapError(a, b);
  }

  // Widest bottleneck that still admits a k-node path.
  std::vector<double> levels;
  for (std::size_t v = 1; v + 1 < g.node_count(); ++v) levels.push_back(g.annotation(v).residual_bw_kbps);
  std::sort(levels.begin(), levels.end(), std::greater<>());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  double bottleneck = levels.empty() ? 0.0 : levels.back();
  for (double level : levels) {
    const auto hops = detail::hop_counts(g, [&](std::size_t v) { return g.annotation(v).residual_bw_kbps >= level; });
    if (hops[g.sink()] == k) {
      bottleneck = level;
      break;
    }
  }
  auto keep = [&](std::size_t v) { return g.annotation(v).residual_bw_kbps >= bottleneck; };

  // best[v][h]: largest RSS sum over paths v -> D using exactly h interval
  // nodes (v included).
  constexpr double kNone = -std::numeric_limits<double>::infinity();
  const std::size_t n = g.node_count();
  std::vector<std::vector<double>> best(n, std::vector<double>(k + 1, kNone));
  for (std::size_t v = n - 1; v-- > 1;) {
    if (!keep(v)) continue;
    const double rss = g.annotation(v).mean_rss_dbm;
    for (auto e : g.out_edges(v)) {
      const auto w = g.edge(e).to;
      if (w == g.sink()) {
        best[v][1] = std::max(best[v][1], rss);
        continue;
      }
      if (!keep(w)) continue;
      for (std::size_t h = 2; h <= k; ++h)
        if (best[w][h - 1] != kNone) best[v][h] = std::max(best[v][h], rss + best[w][h - 1]);
    }
  }

  auto tol = [](double x) { return 1e-9 * std::max(1.0, std::abs(x)); };
  double optimum = kNone;
  for (auto e : g.out_edges(g.source())) {
    const auto v = g.edge(e).to;
    if (g.is_interval(v) && keep(v)) optimum = std::max(optimum, best[v][k]);
  }

  // Forward walk over the lowest AP-id sequence among optimal paths. Several
  // intervals of one AP can share a prefix, so the frontier is a set.
  struct Step {
    std::size_t node;
    double prefix;
    std::size_t parent;  // index into the previous layer
    OverlapWindow window;
  };
  std::vector<std::vector<Step>> layers{{Step{g.source(), 0.0, 0, {}}}};
  for (std::size_t remaining = k; remaining > 0; --remaining) {
    const auto& frontier = layers.back();
    std::optional<std::string_view> best_id;
    std::vector<Step> next;
    for (std::size_t fi = 0; fi < frontier.size(); ++fi) {
      for (auto e : g.out_edges(frontier[fi].node)) {
        const auto& edge = g.edge(e);
        const auto w = edge.to;
        if (!g.is_interval(w) || !keep(w) || best[w][remaining] == kNone) continue;
        if (frontier[fi].prefix + best[w][remaining] < optimum - tol(optimum)) continue;
        const std::string_view id = g.interval(w).ap_id;
        if (best_id && id > *best_id) continue;
        if (!best_id || id < *best_id) {
          best_id = id;
          next.clear();
        }
        const Step st{w, frontier[fi].prefix + g.annotation(w).mean_rss_dbm, fi, {edge.overlap_start, edge.overlap_end}};
        auto same = std::find_if(next.begin(), next.end(), [&](const Step& x) { return x.node == w; });
        if (same == next.end())
          next.push_back(st);
        else if (st.prefix > same->prefix)
          *same = st;
      }
    }
    if (next.empty()) throw std::logic_error("planner walk lost the optimal path");
    std::sort(next.begin(), next.end(), [](const Step& a, const Step& b) { return a.node < b.node; });
    layers.push_back(std::move(next));
  }

  // Any survivor of the last layer completes an optimal path; take the
  // lowest node index and trace parents back.
  std::vector<std::size_t> path(k);
  std::vector<OverlapWindow> windows(k > 0 ? k - 1 : 0);
  std::size_t idx = 0;
  for (std::size_t layer = k; layer >= 1; --layer) {
    const auto& st = layers[layer][idx];
    path[layer - 1] = st.node;
    if (layer >= 2) windows[layer - 2] = st.window;
    idx = st.parent;
  }

  AttachmentPlan p;
  p.windows = windows;
  for (const auto& w : windows) p.handoff_points.push_back(0.5 * (w.start + w.end));
  double min_bw = std::numeric_limits<double>::infinity();
  double rss_sum = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double a = i == 0 ? 0.0 : p.handoff_points[i - 1];
    const double b = i + 1 == path.size() ? g.route_length() : p.handoff_points[i];
    p.segments.push_back({a, b, g.interval(path[i]).ap_id, path[i]});
    min_bw = std::min(min_bw, g.annotation(path[i]).residual_bw_kbps);
    rss_sum += g.annotation(path[i]).mean_rss_dbm;
  }
  p.min_residual_bw_kbps = min_bw;
  p.mean_rss_dbm = rss_sum / static_cast<double>(path.size());
  return p;
}

// Index of the segment containing arclength s (the later one at a boundary).
inline std::optional<std::size_t> segment_at(const AttachmentPlan& p, double s) {
  for (std::size_t i = p.segments.size(); i-- > 0;)
    if (p.segments[i].start <= s && s <= p.segments[i].end) return i;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Verification oracles for the minimum handover count. Both treat a chain of
// intervals as valid under the same rule the coverage graph uses: each next
// interval starts strictly after and inside the previous one, overlapping it by
// at least min_overlap; the first starts at 0 and the last reaches L.

enum class OracleMode { Exhaustive, Greedy };

namespace detail {

inline bool chains(const CoverageInterval& u, const CoverageInterval& v, double min_overlap) {
  return u.start < v.start && u.end > v.start && std::min(u.end, v.end) - v.start >= min_overlap;
}

}  // namespace detail

inline std::size_t oracle_exhaustive(std::span<const CoverageInterval> intervals, double length, double min_overlap) {
  if (intervals.size() > 20) throw std::invalid_argument("exhaustive oracle limited to 20 intervals");
  std::vector<CoverageInterval> sorted(intervals.begin(), intervals.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
  const std::size_t n = sorted.size();
  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const auto count = static_cast<std::size_t>(std::popcount(mask));
    if (count >= best) continue;
    const CoverageInterval* prev = nullptr;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!(mask & (1u << i))) continue;
      if (!prev) ok = sorted[i].start <= 0.0;
      else ok = detail::chains(*prev, sorted[i], min_overlap);
      prev = &sorted[i];
    }
    if (ok && prev && prev->end >= length) best = count;
  }
  if (best == std::numeric_limits<std::size_t>::max()) {
    const auto [a, b] = largest_gap(intervals, length, 0.0);
    throw CoverageGapError(a, b);
  }
  return best;
}

// Classical sweep: from the current interval always jump to the chained
// interval reaching farthest.
inline std::size_t oracle_greedy(std::span<const CoverageInterval> intervals, double length, double min_overlap) {
  const CoverageInterval* cur = nullptr;
  for (const auto& iv : intervals)
    if (iv.start <= 0.0 && (!cur || iv.end > cur->end)) cur = &iv;
  if (!cur) {
    const auto [a, b] = largest_gap(intervals, length, 0.0);
    throw CoverageGapError(a, b);
  }
  std::size_t count = 1;
  while (cur->end < length) {
    const CoverageInterval* next = nullptr;
    for (const auto& iv : intervals)
      if (detail::chains(*cur, iv, min_overlap) && iv.end > cur->end && (!next || iv.end > next->end)) next = &iv;
    if (!next) {
      const auto [a, b] = largest_gap(intervals, length, cur->end);
      throw CoverageGapError(a, b);
    }
    cur = next;
    ++count;
  }
  return count;
}

// Minimum number of segments covering [0, L].
inline std::size_t oracle_plan(std::span<const CoverageInterval> intervals, double length, double min_overlap = 0.0,
                               OracleMode mode = OracleMode::Exhaustive) {
  return mode == OracleMode::Exhaustive ? oracle_exhaustive(intervals, length, min_overlap)
                                        : oracle_greedy(intervals, length, min_overlap);
}

inline void print_plan(std::ostream& os, const AttachmentPlan& p, std::span<const AccessPoint> aps) {
  for (const auto& seg : p.segments) {
    auto it = std::find_if(aps.begin(), aps.end(), [&](const auto& a) { return a.id == seg.ap_id; });
    os << seg.start << ' ' << seg.end << ' ' << seg.ap_id << ' ' << (it != aps.end() ? to_string(it->tech) : "?")
       << '\n';
  }
  os << "handovers=" << p.handover_count() << '\n';
}

}  // namespace hetsim
