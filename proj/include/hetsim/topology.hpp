#pragma once

// Coverage intervals along the route and the acyclic coverage graph between
// source S (arclength 0) and destination D (arclength L).

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetsim/environment.hpp"

namespace hetsim {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CoverageInterval {
  std::string ap_id;
  double start{0.0};
  double end{0.0};

  double length() const { return end - start; }
  bool contains(double s) const { return start <= s && s <= end; }
  friend bool operator==(const CoverageInterval&, const CoverageInterval&) = default;
};

// Discretization points 0, step, 2*step, ... plus L itself.
inline std::vector<double> discretize(double length, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("step must be > 0");
  std::vector<double> pts;
  const auto n = static_cast<std::size_t>(std::floor(length / step + 1e-9));
  pts.reserve(n + 2);
  for (std::size_t i = 0; i <= n; ++i) pts.push_back(std::min(static_cast<double>(i) * step, length));
  if (pts.back() < length) pts.push_back(length);
  return pts;
}

// Maximal runs of covered discretization points, per AP in input order.
// Isolated single covered points produce no interval (zero length).
inline std::vector<CoverageInterval> coverage_intervals(const Route& route, std::span<const AccessPoint> aps,
                                                        std::span<const Obstacle> obstacles, double step) {
  const auto pts = discretize(route.length(), step);
  std::vector<Point> xy;
  xy.reserve(pts.size());
  for (double s : pts) xy.push_back(route.point_at_arclength(s));

  std::vector<CoverageInterval> out;
  for (const auto& ap : aps) {
    std::size_t run_begin = 0;
    bool in_run = false;
    for (std::size_t i = 0; i <= pts.size(); ++i) {
      const bool covered = i < pts.size() && in_coverage(ap, xy[i], obstacles);
      if (covered && !in_run) {
        run_begin = i;
        in_run = true;
      } else if (!covered && in_run) {
        in_run = false;
        if (i - 1 > run_begin) out.push_back({ap.id, pts[run_begin], pts[i - 1]});
      }
    }
  }
  return out;
}

struct NodeAnnotation {
  double load{0.0};
  double residual_bw_kbps{0.0};
  double mean_rss_dbm{0.0};
  double capacity_bw_kbps{0.0};
};

struct GraphEdge {
  std::size_t from;  // node index; 0 is S
  std::size_t to;    // node index; size()-1 is D
  double overlap_start;
  double overlap_end;
};

// Nodes: index 0 = S, 1..n = intervals ordered by (start, ap_id), n+1 = D.
class CoverageGraph {
 public:
  CoverageGraph() = default;
  CoverageGraph(double route_length, double min_overlap, std::vector<CoverageInterval> intervals)
      : length_(route_length), min_overlap_(min_overlap), intervals_(std::move(intervals)) {
    std::stable_sort(intervals_.begin(), intervals_.end(), [](const auto& a, const auto& b) {
      if (a.start != b.start) return a.start < b.start;
      if (a.ap_id != b.ap_id) return a.ap_id < b.ap_id;
      return a.end < b.end;
    });
    annotations_.resize(intervals_.size());
    const std::size_t n = intervals_.size();
    out_.resize(n + 2);
    in_.resize(n + 2);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& u = intervals_[i];
      if (u.start <= 0.0) add_edge(0, i + 1, 0.0, 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        const auto& v = intervals_[j];
        if (!(u.start < v.start && u.end > v.start)) continue;
        const double ov_end = std::min(u.end, v.end);
        if (ov_end - v.start >= min_overlap_) add_edge(i + 1, j + 1, v.start, ov_end);
      }
      if (u.end >= length_) add_edge(i + 1, n + 1, length_, length_);
    }
  }

  double route_length() const { return length_; }
  double min_overlap() const { return min_overlap_; }
  std::size_t node_count() const { return intervals_.size() + 2; }
  std::size_t source() const { return 0; }
  std::size_t sink() const { return intervals_.size() + 1; }
  bool is_interval(std::size_t node) const { return node >= 1 && node <= intervals_.size(); }

  const std::vector<CoverageInterval>& intervals() const { return intervals_; }
  const CoverageInterval& interval(std::size_t node) const { return intervals_.at(node - 1); }
  const NodeAnnotation& annotation(std::size_t node) const { return annotations_.at(node - 1); }
  NodeAnnotation& annotation(std::size_t node) { return annotations_.at(node - 1); }

  const std::vector<GraphEdge>& edges() const { return edges_; }
  const std::vector<std::size_t>& out_edges(std::size_t node) const { return out_.at(node); }
  const std::vector<std::size_t>& in_edges(std::size_t node) const { return in_.at(node); }
  const GraphEdge& edge(std::size_t e) const { return edges_.at(e); }

  std::string_view ap_of(std::size_t node) const {
    if (node == source()) return "S";
    if (node == sink()) return "D";
    return interval(node).ap_id;
  }

  // Plain-text adjacency listing, one edge per line.
  void dump(std::ostream& os) const {
    for (const auto& e : edges_)
      os << ap_of(e.from) << ' ' << ap_of(e.to) << ' ' << e.overlap_start << ' ' << e.overlap_end << '\n';
  }

 private:
  void add_edge(std::size_t from, std::size_t to, double a, double b) {
    out_[from].push_back(edges_.size());
    in_[to].push_back(edges_.size());
    edges_.push_back({from, to, a, b});
  }

  double length_{0.0};
  double min_overlap_{0.0};
  std::vector<CoverageInterval> intervals_;
  std::vector<NodeAnnotation> annotations_;
  std::vector<GraphEdge> edges_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
};

inline CoverageGraph build_graph(std::vector<CoverageInterval> intervals, double route_length,
                                 double min_overlap) {
  if (!(min_overlap >= 0.0)) throw std::invalid_argument("min_overlap must be >= 0");
  return CoverageGraph(route_length, min_overlap, std::move(intervals));
}

// Kahn's algorithm; true when the graph has no directed cycle.
inline bool is_acyclic(const CoverageGraph& g) {
  std::vector<std::size_t> indeg(g.node_count(), 0);
  for (const auto& e : g.edges()) ++indeg[e.to];
  std::vector<std::size_t> ready;
  for (std::size_t v = 0; v < indeg.size(); ++v)
    if (indeg[v] == 0) ready.push_back(v);
  std::size_t seen = 0;
  while (!ready.empty()) {
    const auto v = ready.back();
    ready.pop_back();
    ++seen;
    for (auto e : g.out_edges(v))
      if (--indeg[g.edge(e).to] == 0) ready.push_back(g.edge(e).to);
  }
  return seen == g.node_count();
}

// Per-AP load snapshot (normalized [0,1]) keyed by AP id.
using LoadSnapshot = std::map<std::string, double, std::less<>>;

// Fills load, residual bandwidth and mean RSS for every interval node. Mean RSS
// is sampled at the interval's discretization points.
inline CoverageGraph annotate(CoverageGraph graph, const LoadSnapshot& loads, const Route& route,
                              std::span<const AccessPoint> aps, std::span<const Obstacle> obstacles,
                              double step) {
  for (std::size_t node = 1; node + 1 < graph.node_count(); ++node) {
    const auto& iv = graph.interval(node);
    const auto lit = loads.find(iv.ap_id);
    if (lit == loads.end()) throw ConfigError("missing load entry for AP '" + iv.ap_id + "'");
    const auto ait = std::find_if(aps.begin(), aps.end(), [&](const auto& a) { return a.id == iv.ap_id; });
    if (ait == aps.end()) throw ConfigError("unknown AP '" + iv.ap_id + "' in coverage graph");
    const double load = std::clamp(lit->second, 0.0, 1.0);
    double sum = 0.0;
    std::size_t count = 0;
    for (double s = iv.start; s <= iv.end + 1e-9; s += step) {
      sum += mean_rss(*ait, route.point_at_arclength(std::min(s, iv.end)), obstacles);
      ++count;
    }
    auto& a = graph.annotation(node);
    a.load = load;
    a.capacity_bw_kbps = ait->capacity_bw_kbps;
    a.residual_bw_kbps = ait->capacity_bw_kbps * (1.0 - load);
    a.mean_rss_dbm = count ? sum / static_cast<double>(count) : mean_rss(*ait, route.point_at_arclength(iv.start), obstacles);
  }
  return graph;
}

}  // namespace hetsim
