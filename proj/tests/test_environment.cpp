#include <gtest/gtest.h>

#include "support.hpp"

using namespace hetsim;
using testsupport::wlan;

TEST(Route, EndpointsAndMidpoint) {
  Route r({{0, 0}, {100, 0}}, 10);
  EXPECT_EQ(position_at(r, 0), (Point{0, 0}));
  EXPECT_EQ(position_at(r, r.duration_s()), (Point{100, 0}));
  const auto mid = position_at(r, 5);
  EXPECT_DOUBLE_EQ(mid.x, 50);
  EXPECT_DOUBLE_EQ(mid.y, 0);
}

TEST(Route, PolylineArclength) {
  Route r({{0, 0}, {30, 0}, {30, 40}}, 2);
  EXPECT_DOUBLE_EQ(r.length(), 70);
  EXPECT_DOUBLE_EQ(r.duration_s(), 35);
  const auto p = r.point_at_arclength(50);
  EXPECT_DOUBLE_EQ(p.x, 30);
  EXPECT_DOUBLE_EQ(p.y, 20);
  EXPECT_THROW(r.point_at_arclength(70.5), std::out_of_range);
  EXPECT_THROW(position_at(r, -1), std::out_of_range);
}

TEST(Route, RejectsBadInput) {
  EXPECT_THROW(Route({{0, 0}}, 1), std::invalid_argument);
  EXPECT_THROW(Route({{0, 0}, {1, 0}}, 0), std::invalid_argument);
}

TEST(Rss, ReferenceDistance) {
  const auto ap = wlan("a", {0, 0});
  EXPECT_DOUBLE_EQ(rss_at(ap, {1, 0}, {}), ap.tx_power_dbm - ap.ref_loss_db);
}

TEST(Rss, DoublingDistanceCostsTenNLog2) {
  const auto ap = wlan("a", {0, 0});
  // recomputed by hand: 10 * 3.5 * log10(2)
  const double expected = -35.0 * 0.30102999566398120;
  for (double d : {3.0, 17.0, 40.0}) EXPECT_NEAR(rss_at(ap, {2 * d, 0}, {}) - rss_at(ap, {d, 0}, {}), expected, 1e-9);
  EXPECT_NEAR(expected, -10.536, 1e-3);
}

TEST(Rss, ObstacleLossIsAdditive) {
  const auto ap = wlan("a", {0, 0});
  std::vector<Obstacle> wall{{Segment{{10, -5}, {10, 5}}, 20.0}};
  EXPECT_NEAR(rss_at(ap, {20, 0}, wall), rss_at(ap, {20, 0}, {}) - 20.0, 1e-12);
  // out of the way: no effect
  EXPECT_DOUBLE_EQ(rss_at(ap, {20, 30}, wall), rss_at(ap, {20, 30}, {}));
  std::vector<Obstacle> box{{Polygon{{{8, -2}, {12, -2}, {12, 2}, {8, 2}}}, 7.5}};
  EXPECT_NEAR(rss_at(ap, {20, 0}, box), rss_at(ap, {20, 0}, {}) - 7.5, 1e-12);
  // endpoint inside the polygon counts as blocked
  EXPECT_NEAR(rss_at(ap, {10, 0}, box), rss_at(ap, {10, 0}, {}) - 7.5, 1e-12);
}

TEST(Coverage, EdgeRadiusClosedForm) {
  const auto ap = wlan("a", {0, 0});
  const double r = std::pow(10.0, 65.0 / 35.0);
  EXPECT_NEAR(r, 71.97, 0.01);
  EXPECT_NEAR(ap.edge_radius_m(), r, 1e-9);
  // numeric root of the RSS curve, independent of edge_radius_m
  double lo = 1, hi = 1000;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (rss_at(ap, {mid, 0}, {}) >= ap.sensitivity_dbm ? lo : hi) = mid;
  }
  EXPECT_NEAR(lo, r, 1e-6);
  EXPECT_TRUE(in_coverage(ap, {71, 0}, {}));
  EXPECT_FALSE(in_coverage(ap, {73, 0}, {}));
  EXPECT_TRUE(in_coverage(ap, ap.position, {}));
}

TEST(Coverage, ObstacleCanRemoveCoverage) {
  const auto ap = wlan("a", {0, 0});
  std::vector<Obstacle> wall{{Segment{{5, -5}, {5, 5}}, 30.0}};
  EXPECT_TRUE(in_coverage(ap, {40, 0}, {}));
  EXPECT_FALSE(in_coverage(ap, {40, 0}, wall));
}

TEST(Shadowing, SeededAndClipped) {
  Shadowing a(3, 3, 99), b(3, 3, 99), c(3, 3, 100);
  bool differs = false;
  double sum = 0, sq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = a.draw();
    EXPECT_EQ(x, b.draw());
    differs |= x != c.draw();
    EXPECT_LE(std::abs(x), 3.0);
    sum += x;
    sq += x * x;
  }
  EXPECT_TRUE(differs);
  EXPECT_NEAR(sum / n, 0.0, 0.1);
  // clipping at one sigma shrinks the spread below sigma
  EXPECT_LT(std::sqrt(sq / n), 3.0);
  EXPECT_GT(std::sqrt(sq / n), 2.0);
  Shadowing off;
  EXPECT_EQ(off.draw(), 0.0);
}

TEST(Shadowing, UnclippedMatchesSigma) {
  Shadowing s(4, 0, 5);
  double sq = 0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const double x = s.draw();
    sq += x * x;
  }
  EXPECT_NEAR(std::sqrt(sq / n), 4.0, 0.1);
}

TEST(AccessPointChecks, Invariants) {
  auto ap = wlan("a", {0, 0});
  EXPECT_EQ(check_access_point(ap), "");
  ap.capacity_users = 0;
  EXPECT_NE(check_access_point(ap), "");
  ap = wlan("a", {0, 0});
  ap.tx_power_dbm = ap.sensitivity_dbm + ap.ref_loss_db;
  EXPECT_NE(check_access_point(ap), "");
  ap = wlan("", {0, 0});
  EXPECT_NE(check_access_point(ap), "");
}

TEST(ObstacleChecks, Invariants) {
  EXPECT_EQ(check_obstacle({Segment{{0, 0}, {1, 0}}, 3}), "");
  EXPECT_NE(check_obstacle({Segment{{0, 0}, {0, 0}}, 3}), "");
  EXPECT_NE(check_obstacle({Segment{{0, 0}, {1, 0}}, -1}), "");
  EXPECT_NE(check_obstacle({Polygon{{{0, 0}, {1, 0}}}, 3}), "");
  EXPECT_NE(check_obstacle({Polygon{{{0, 0}, {2, 0}, {1, 0}}}, 3}), "");
  // non-convex arrowhead
  EXPECT_NE(check_obstacle({Polygon{{{0, 0}, {4, 0}, {1, 1}, {0, 4}}}, 3}), "");
}

TEST(Tech, Names) {
  for (auto t : kAllTechs) EXPECT_EQ(tech_from_string(to_string(t)), t);
  EXPECT_FALSE(tech_from_string("LTE"));
}
