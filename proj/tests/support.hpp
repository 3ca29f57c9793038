#pragma once

// Scenario builders and random generators shared by the test binaries.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "hetsim/hetsim.hpp"

namespace testsupport {

using namespace hetsim;

// Transmit power giving an unobstructed edge radius of r metres.
inline double tx_for_radius(const AccessPoint& ap, double r) {
  return ap.sensitivity_dbm + ap.ref_loss_db + 10.0 * ap.path_loss_exponent * std::log10(r);
}

inline AccessPoint wlan(std::string id, Point p, std::optional<double> radius = std::nullopt) {
  auto ap = AccessPoint::with_defaults(std::move(id), Tech::WLAN, p);
  if (radius) ap.tx_power_dbm = tx_for_radius(ap, *radius);
  return ap;
}

inline AccessPoint umts(std::string id, Point p) { return AccessPoint::with_defaults(std::move(id), Tech::UMTS, p); }

inline ScenarioConfig straight(double length, double speed) {
  ScenarioConfig c;
  c.waypoints = {{0, 0}, {length, 0}};
  c.speed_mps = speed;
  return c;
}

// Two UMTS cells whose mean RSS crosses mid-route; seeded shadowing of
// sigma 3 dB clipped at 3 dB, no dwell, single-beacon triggering.
inline ScenarioConfig two_cell_noisy(double hysteresis, std::uint64_t seed = 42) {
  ScenarioConfig c;
  c.name = "two_cell_noisy";
  c.waypoints = {{500, 0}, {1500, 0}};
  c.speed_mps = 10;
  c.aps = {umts("cellA", {0, 0}), umts("cellB", {2000, 0})};
  c.shadowing = {3.0, 3.0};
  c.policy.hysteresis_db = hysteresis;
  c.policy.dwell_ms = 0;
  c.policy.beacons_realtime = 1;
  c.policy.beacons_nonrealtime = 1;
  c.sim.seed = seed;
  return c;
}

// One WLAN AP covering a 100 m walk; periodic single-radio scanning.
inline ScenarioConfig scan_scenario(double buffer_target_ms, std::uint64_t seed = 3) {
  auto c = straight(100, 1);
  c.name = "scan";
  c.aps = {wlan("w1", {50, 0})};
  c.exec.scan.period_ms = 5000;
  c.exec.buffer_target_ms = buffer_target_ms;
  c.sim.seed = seed;
  return c;
}

enum class Layers { Heterogeneous, WlanOnly, UmtsOnly };

// 2 km road, UMTS everywhere, four ~100 m radius hotspots (40% of the road).
inline ScenarioConfig reference_route(Layers layers, std::uint64_t seed = 7) {
  auto c = straight(2000, 10);
  c.sim.seed = seed;
  if (layers != Layers::WlanOnly) c.aps.push_back(umts("umts", {1000, 300}));
  if (layers != Layers::UmtsOnly)
    for (int i = 0; i < 4; ++i) {
      auto ap = wlan("hs" + std::to_string(i + 1), {200.0 + 500.0 * i, 0});
      ap.tx_power_dbm = 25;
      c.aps.push_back(ap);
    }
  c.name = layers == Layers::Heterogeneous ? "hetero" : layers == Layers::WlanOnly ? "wlan_only" : "umts_only";
  return c;
}

inline ScenarioConfig load_ramp_scenario() {
  auto c = straight(100, 1);
  c.name = "load_ramp";
  c.aps = {wlan("wlan", {50, 10}), umts("umts", {1000, 0})};
  c.policy.strategy = Strategy::MAHO;
  c.policy.load_ceiling = 0.9;
  c.load_ramps["wlan"] = {{0.0, 0.5}, {60.0, 1.0}};
  c.sim.seed = 11;
  return c;
}

inline ScenarioConfig crowded_cell(int background_users) {
  auto c = straight(200, 10);
  c.name = "crowded";
  c.aps = {umts("umts", {100, 0})};
  c.background_users["umts"] = background_users;
  c.sim.background_user_kbps = 12;
  return c;
}

// Random APs strung along a random polyline of at most 2 km. Radii are set via
// the transmit power so coverage is roughly contiguous but often has gaps.
inline ScenarioConfig random_scenario(std::mt19937_64& rng, int max_aps = 8) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  ScenarioConfig c;
  const double length = 200.0 + 1800.0 * u01(rng);
  const bool bend = u01(rng) < 0.3;
  if (bend) {
    const double a = length * (0.3 + 0.4 * u01(rng));
    c.waypoints = {{0, 0}, {a, 0}, {a, length - a}};
  } else {
    c.waypoints = {{0, 0}, {length, 0}};
  }
  c.speed_mps = 10;
  const Route route(c.waypoints, c.speed_mps);
  const int n = 2 + static_cast<int>(u01(rng) * (max_aps - 1));
  const double mean_radius = length / (1.3 * n);
  for (int i = 0; i < n; ++i) {
    const double s = length * u01(rng);
    const Point on = route.point_at_arclength(s);
    const double r = std::max(20.0, mean_radius * (0.6 + 1.2 * u01(rng)));
    const double off = r * 0.5 * (u01(rng) - 0.5);
    const Tech tech = u01(rng) < 0.7 ? Tech::WLAN : Tech::WIMAX;
    auto ap = AccessPoint::with_defaults("ap" + std::to_string(i), tech, {on.x + off, on.y - off});
    ap.tx_power_dbm = tx_for_radius(ap, r);
    c.aps.push_back(ap);
  }
  c.sim.step_m = 1.0;
  c.sim.min_overlap_m = u01(rng) < 0.5 ? 0.0 : 10.0 * u01(rng);
  return c;
}

}  // namespace testsupport
