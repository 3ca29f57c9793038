#include <gtest/gtest.h>

#include "support.hpp"

using namespace hetsim;
using testsupport::wlan;

namespace {

// Coverage endpoints from a scan at resolution step/10, no interval logic.
std::vector<std::pair<double, double>> brute_runs(const Route& route, const AccessPoint& ap,
                                                  std::span<const Obstacle> obs, double step) {
  std::vector<std::pair<double, double>> runs;
  const double fine = step / 10;
  bool in = false;
  double start = 0, last = 0;
  for (double s = 0; s <= route.length() + 1e-9; s += fine) {
    const double ss = std::min(s, route.length());
    const bool c = in_coverage(ap, route.point_at_arclength(ss), obs);
    if (c && !in) start = ss;
    if (!c && in) runs.push_back({start, last});
    if (c) last = ss;
    in = c;
  }
  if (in) runs.push_back({start, last});
  return runs;
}

}  // namespace

TEST(Discretize, IncludesEnd) {
  EXPECT_EQ(discretize(10, 4), (std::vector<double>{0, 4, 8, 10}));
  EXPECT_EQ(discretize(8, 4), (std::vector<double>{0, 4, 8}));
  EXPECT_THROW(discretize(8, 0), std::invalid_argument);
}

TEST(CoverageIntervals, CentredApMatchesCircleChord) {
  Route route({{0, 0}, {1000, 0}}, 10);
  std::vector<AccessPoint> aps{wlan("a", {500, 0})};
  const auto iv = coverage_intervals(route, aps, {}, 1.0);
  ASSERT_EQ(iv.size(), 1u);
  const double r = aps[0].edge_radius_m();
  EXPECT_NEAR(iv[0].start, 500 - r, 1.0);
  EXPECT_NEAR(iv[0].end, 500 + r, 1.0);
  EXPECT_NEAR(iv[0].start, 428, 1.0);
  EXPECT_NEAR(iv[0].end, 572, 1.0);
}

TEST(CoverageIntervals, OffsetApChord) {
  Route route({{0, 0}, {1000, 0}}, 10);
  std::vector<AccessPoint> aps{wlan("a", {300, 40})};
  const double r = aps[0].edge_radius_m();
  const double half = std::sqrt(r * r - 40.0 * 40.0);
  const auto iv = coverage_intervals(route, aps, {}, 1.0);
  ASSERT_EQ(iv.size(), 1u);
  EXPECT_NEAR(iv[0].start, 300 - half, 1.0);
  EXPECT_NEAR(iv[0].end, 300 + half, 1.0);
}

TEST(CoverageIntervals, FarApGivesNothing) {
  Route route({{0, 0}, {1000, 0}}, 10);
  std::vector<AccessPoint> aps{wlan("a", {500, 200})};
  EXPECT_TRUE(coverage_intervals(route, aps, {}, 1.0).empty());
}

TEST(CoverageIntervals, ObstacleSplitsFootprint) {
  Route route({{0, 0}, {1000, 0}}, 10);
  std::vector<AccessPoint> aps{wlan("a", {500, 30})};
  // a building between the AP and the middle of the road
  std::vector<Obstacle> obs{{Polygon{{{490, 5}, {510, 5}, {510, 15}, {490, 15}}}, 25.0}};
  const auto iv = coverage_intervals(route, aps, obs, 1.0);
  ASSERT_EQ(iv.size(), 2u);
  const auto runs = brute_runs(route, aps[0], obs, 1.0);
  ASSERT_EQ(runs.size(), 2u);
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(iv[i].start, runs[i].first, 1.0);
    EXPECT_NEAR(iv[i].end, runs[i].second, 1.0);
  }
  EXPECT_LT(iv[0].end, 500);
  EXPECT_GT(iv[1].start, 500);
}

TEST(CoverageIntervals, RandomScenariosAgreeWithFineScan) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 30; ++trial) {
    auto c = testsupport::random_scenario(rng);
    Route route = c.route();
    std::uniform_real_distribution<double> u(0, 1);
    if (u(rng) < 0.5) {
      const Point p = route.point_at_arclength(route.length() * u(rng));
      c.obstacles.push_back({Segment{{p.x - 5, p.y + 3}, {p.x + 5, p.y + 3}}, 15.0});
    }
    const auto iv = coverage_intervals(route, c.aps, c.obstacles, 1.0);
    for (const auto& ap : c.aps) {
      std::vector<CoverageInterval> mine;
      for (const auto& x : iv)
        if (x.ap_id == ap.id) mine.push_back(x);
      auto runs = brute_runs(route, ap, c.obstacles, 1.0);
      // runs shorter than one step may fall between sample points
      std::erase_if(runs, [](const auto& r) { return r.second - r.first < 2.0; });
      std::erase_if(mine, [](const auto& r) { return r.end - r.start < 2.0; });
      ASSERT_EQ(mine.size(), runs.size()) << "trial " << trial << " ap " << ap.id;
      for (std::size_t i = 0; i < runs.size(); ++i) {
        EXPECT_NEAR(mine[i].start, runs[i].first, 1.0);
        EXPECT_NEAR(mine[i].end, runs[i].second, 1.0);
      }
    }
  }
}

TEST(Graph, OverlapEdgeAndTerminals) {
  auto g = build_graph({{"a", 0, 60}, {"b", 40, 100}}, 100, 10);
  ASSERT_EQ(g.node_count(), 4u);
  bool s_a = false, a_b = false, b_d = false;
  for (const auto& e : g.edges()) {
    if (e.from == 0 && g.ap_of(e.to) == "a") s_a = true;
    if (g.ap_of(e.from) == "a" && g.ap_of(e.to) == "b") {
      a_b = true;
      EXPECT_DOUBLE_EQ(e.overlap_start, 40);
      EXPECT_DOUBLE_EQ(e.overlap_end, 60);
    }
    if (g.ap_of(e.from) == "b" && e.to == g.sink()) b_d = true;
  }
  EXPECT_TRUE(s_a && a_b && b_d);
  EXPECT_EQ(g.edges().size(), 3u);
  EXPECT_TRUE(is_acyclic(g));
}

TEST(Graph, MinOverlapPrunesEdge) {
  auto g = build_graph({{"a", 0, 60}, {"b", 55, 100}}, 100, 10);
  for (const auto& e : g.edges()) EXPECT_FALSE(g.ap_of(e.from) == "a" && g.ap_of(e.to) == "b");
}

TEST(Graph, DisjointIntervalsHaveNoEdge) {
  auto g = build_graph({{"a", 0, 40}, {"b", 60, 100}}, 100, 0);
  for (const auto& e : g.edges()) EXPECT_FALSE(g.is_interval(e.from) && g.is_interval(e.to));
}

TEST(Graph, DuplicatesShareNeighbours) {
  auto g = build_graph({{"a", 0, 60}, {"b", 40, 100}, {"c", 40, 100}}, 100, 0);
  int between = 0, from_a = 0, to_d = 0;
  for (const auto& e : g.edges()) {
    if (g.ap_of(e.from) != "S" && g.ap_of(e.from) != "a" && g.is_interval(e.to)) ++between;
    if (g.ap_of(e.from) == "a" && g.is_interval(e.to)) ++from_a;
    if (e.to == g.sink()) ++to_d;
  }
  EXPECT_EQ(between, 0);
  EXPECT_EQ(from_a, 2);
  EXPECT_EQ(to_d, 2);
}

TEST(Graph, AlwaysAcyclicAndOrdered) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1000);
  for (int t = 0; t < 200; ++t) {
    std::vector<CoverageInterval> iv;
    for (int i = 0; i < 12; ++i) {
      double a = u(rng), b = u(rng);
      if (a > b) std::swap(a, b);
      iv.push_back({"x" + std::to_string(i % 5), a, b});
    }
    auto g = build_graph(iv, 1000, 3);
    EXPECT_TRUE(is_acyclic(g));
    for (const auto& e : g.edges()) EXPECT_LT(e.from, e.to);
  }
}

TEST(Annotate, ResidualFromLoad) {
  Route route({{0, 0}, {100, 0}}, 1);
  auto a = wlan("a", {20, 0});
  a.capacity_bw_kbps = 1000;
  auto b = wlan("b", {80, 0});
  auto c = wlan("c", {50, 0});
  std::vector<AccessPoint> aps{a, b, c};
  auto g = build_graph(coverage_intervals(route, aps, {}, 1.0), 100, 0);
  g = annotate(std::move(g), {{"a", 0.8}, {"b", 0.0}, {"c", 1.0}}, route, aps, {}, 1.0);
  for (std::size_t v = 1; v + 1 < g.node_count(); ++v) {
    const auto& n = g.annotation(v);
    if (g.ap_of(v) == "a") { EXPECT_NEAR(n.residual_bw_kbps, 200, 1e-9); }
    if (g.ap_of(v) == "b") { EXPECT_DOUBLE_EQ(n.residual_bw_kbps, b.capacity_bw_kbps); }
    if (g.ap_of(v) == "c") { EXPECT_DOUBLE_EQ(n.residual_bw_kbps, 0); }
    EXPECT_GT(n.mean_rss_dbm, -85.0);
  }
  EXPECT_THROW(annotate(g, {{"a", 0.1}}, route, aps, {}, 1.0), ConfigError);
}
