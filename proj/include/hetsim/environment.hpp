#pragma once

// Geographic world: route, access points, obstacles and received signal
// strength along the route.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hetsim {

struct Point {
  double x{0.0};
  double y{0.0};

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(b.x - a.x, b.y - a.y); }

enum class Tech { WLAN, UMTS, WIMAX };

inline constexpr Tech kAllTechs[] = {Tech::WLAN, Tech::UMTS, Tech::WIMAX};

inline std::string_view to_string(Tech t) {
  switch (t) {
    case Tech::WLAN: return "WLAN";
    case Tech::UMTS: return "UMTS";
    case Tech::WIMAX: return "WIMAX";
  }
  return "?";
}

inline std::optional<Tech> tech_from_string(std::string_view s) {
  std::string up(s);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  if (up == "WLAN") return Tech::WLAN;
  if (up == "UMTS") return Tech::UMTS;
  if (up == "WIMAX") return Tech::WIMAX;
  return std::nullopt;
}

// Implementer defaults per technology; every value is overridable per AP.
struct TechnologyDefaults {
  double tx_power_dbm;
  double path_loss_exponent;
  double ref_loss_db;
  double sensitivity_dbm;
  int capacity_users;
  double capacity_bw_kbps;
  double rate_cap_kbps;  // per-user rate cap
  double base_latency_ms;
  double scan_min_ms;
  double scan_max_ms;
};

inline TechnologyDefaults defaults_for(Tech t) {
  switch (t) {
    case Tech::WLAN: return {20.0, 3.5, 40.0, -85.0, 30, 6000.0, 6000.0, 5.0, 200.0, 400.0};
    case Tech::UMTS: return {43.0, 3.0, 34.0, -110.0, 85, 2000.0, 384.0, 60.0, 200.0, 400.0};
    case Tech::WIMAX: return {43.0, 2.8, 34.0, -100.0, 100, 10000.0, 2000.0, 30.0, 200.0, 400.0};
  }
  throw std::invalid_argument("unknown technology");
}

struct AccessPoint {
  std::string id;
  Tech tech{Tech::WLAN};
  Point position;
  double tx_power_dbm{20.0};
  double path_loss_exponent{3.5};
  double ref_loss_db{40.0};
  double sensitivity_dbm{-85.0};
  int capacity_users{30};
  double capacity_bw_kbps{6000.0};
  double rate_cap_kbps{6000.0};
  double base_latency_ms{5.0};
  std::string provider{"default"};

  // AP populated with the technology defaults.
  static AccessPoint with_defaults(std::string id, Tech tech, Point pos) {
    const auto d = defaults_for(tech);
    AccessPoint ap;
    ap.id = std::move(id);
    ap.tech = tech;
    ap.position = pos;
    ap.tx_power_dbm = d.tx_power_dbm;
    ap.path_loss_exponent = d.path_loss_exponent;
    ap.ref_loss_db = d.ref_loss_db;
    ap.sensitivity_dbm = d.sensitivity_dbm;
    ap.capacity_users = d.capacity_users;
    ap.capacity_bw_kbps = d.capacity_bw_kbps;
    ap.rate_cap_kbps = d.rate_cap_kbps;
    ap.base_latency_ms = d.base_latency_ms;
    return ap;
  }

  // Distance at which the unobstructed mean RSS equals the sensitivity.
  double edge_radius_m() const {
    const double budget = tx_power_dbm - ref_loss_db - sensitivity_dbm;
    if (budget < 0.0) return 0.0;
    return std::pow(10.0, budget / (10.0 * path_loss_exponent));
  }
};

// Returns an empty string when valid, otherwise the violated constraint.
inline std::string check_access_point(const AccessPoint& ap) {
  if (ap.id.empty()) return "id must be non-empty";
  if (!(ap.tx_power_dbm > ap.sensitivity_dbm + ap.ref_loss_db))
    return "tx_power > sensitivity + ref_loss";
  if (ap.capacity_users < 1) return "capacity_users >= 1";
  if (!(ap.capacity_bw_kbps > 0.0)) return "capacity_bw > 0";
  if (!(ap.rate_cap_kbps > 0.0)) return "rate_cap > 0";
  if (!(ap.path_loss_exponent >= 1.5 && ap.path_loss_exponent <= 6.0))
    return "path_loss_exponent in [1.5, 6]";
  if (!(ap.base_latency_ms >= 0.0)) return "base_latency >= 0";
  return {};
}

struct Segment {
  Point a;
  Point b;
};

// Convex polygon, vertices in order (either orientation).
struct Polygon {
  std::vector<Point> vertices;
};

struct Obstacle {
  std::variant<Segment, Polygon> geometry;
  double penetration_loss_db{0.0};
};

namespace detail {

inline double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline bool on_segment(Point p, Point a, Point b) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

inline int sign(double v) { return (v > 0.0) - (v < 0.0); }

inline bool segments_intersect(Point p1, Point p2, Point q1, Point q2) {
  const int d1 = sign(cross(q1, q2, p1));
  const int d2 = sign(cross(q1, q2, p2));
  const int d3 = sign(cross(p1, p2, q1));
  const int d4 = sign(cross(p1, p2, q2));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  if (d1 == 0 && on_segment(p1, q1, q2)) return true;
  if (d2 == 0 && on_segment(p2, q1, q2)) return true;
  if (d3 == 0 && on_segment(q1, p1, p2)) return true;
  if (d4 == 0 && on_segment(q2, p1, p2)) return true;
  return false;
}

inline bool inside_convex(const Polygon& poly, Point p) {
  const auto& v = poly.vertices;
  int expected = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const int s = sign(cross(v[i], v[(i + 1) % v.size()], p));
    if (s == 0) continue;
    if (expected == 0) expected = s;
    else if (s != expected) return false;
  }
  return true;
}

}  // namespace detail

inline std::string check_obstacle(const Obstacle& o) {
  if (!(o.penetration_loss_db >= 0.0)) return "penetration_loss >= 0";
  if (const auto* seg = std::get_if<Segment>(&o.geometry)) {
    if (seg->a == seg->b) return "segment endpoints must differ";
  } else {
    const auto& poly = std::get<Polygon>(o.geometry);
    if (poly.vertices.size() < 3) return "polygon needs >= 3 vertices";
    double area2 = 0.0;
    for (std::size_t i = 0; i < poly.vertices.size(); ++i) {
      const auto& p = poly.vertices[i];
      const auto& q = poly.vertices[(i + 1) % poly.vertices.size()];
      area2 += p.x * q.y - q.x * p.y;
    }
    if (std::abs(area2) <= 0.0) return "polygon must have nonzero area";
    int orient = 0;
    const auto& v = poly.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const int s = detail::sign(detail::cross(v[i], v[(i + 1) % v.size()], v[(i + 2) % v.size()]));
      if (s == 0) continue;
      if (orient == 0) orient = s;
      else if (s != orient) return "polygon must be convex";
    }
  }
  return {};
}

// True when the straight path a->b touches the obstacle geometry.
inline bool blocks(const Obstacle& o, Point a, Point b) {
  if (const auto* seg = std::get_if<Segment>(&o.geometry))
    return detail::segments_intersect(a, b, seg->a, seg->b);
  const auto& poly = std::get<Polygon>(o.geometry);
  if (detail::inside_convex(poly, a) || detail::inside_convex(poly, b)) return true;
  const auto& v = poly.vertices;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (detail::segments_intersect(a, b, v[i], v[(i + 1) % v.size()])) return true;
  return false;
}

class Route {
 public:
  Route(std::vector<Point> waypoints, double speed_mps)
      : waypoints_(std::move(waypoints)), speed_(speed_mps) {
    if (waypoints_.size() < 2) throw std::invalid_argument("route needs >= 2 waypoints");
    if (!(speed_ > 0.0) || !std::isfinite(speed_)) throw std::invalid_argument("route speed must be > 0");
    cumulative_.reserve(waypoints_.size());
    cumulative_.push_back(0.0);
    for (std::size_t i = 1; i < waypoints_.size(); ++i) {
      const double d = distance(waypoints_[i - 1], waypoints_[i]);
      if (!(d > 0.0)) throw std::invalid_argument("consecutive route waypoints must be distinct");
      cumulative_.push_back(cumulative_.back() + d);
    }
  }

  const std::vector<Point>& waypoints() const { return waypoints_; }
  double speed() const { return speed_; }
  double length() const { return cumulative_.back(); }
  double duration_s() const { return length() / speed_; }

  Point point_at_arclength(double s) const {
    if (!(s >= 0.0 && s <= length())) throw std::out_of_range("arclength outside [0, L]");
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
    std::size_t i = static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
    if (i >= cumulative_.size()) return waypoints_.back();
    const std::size_t k = i - 1;
    const double seg = cumulative_[i] - cumulative_[k];
    const double f = (s - cumulative_[k]) / seg;
    const Point a = waypoints_[k];
    const Point b = waypoints_[i];
    return {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)};
  }

  friend bool operator==(const Route& a, const Route& b) {
    return a.waypoints_ == b.waypoints_ && a.speed_ == b.speed_;
  }

 private:
  std::vector<Point> waypoints_;
  double speed_;
  std::vector<double> cumulative_;
};

// Constant-speed traversal; t in seconds.
inline Point position_at(const Route& route, double t) {
  if (!(t >= 0.0 && t <= route.duration_s())) throw std::out_of_range("time outside [0, L/speed]");
  return route.point_at_arclength(std::min(route.speed() * t, route.length()));
}

struct RssSample {
  std::string ap_id;
  double time_s{0.0};
  double s_m{0.0};
  double rss_dbm{0.0};
};

// Seeded log-normal shadowing: Gaussian in dB with standard deviation sigma,
// optionally truncated to [-clip, clip]. sigma == 0 disables it.
class Shadowing {
 public:
  Shadowing() = default;
  Shadowing(double sigma_db, double clip_db, std::uint64_t seed)
      : sigma_(sigma_db), clip_(clip_db), engine_(seed) {}

  bool enabled() const { return sigma_ > 0.0; }
  double sigma() const { return sigma_; }

  double draw() {
    if (!enabled()) return 0.0;
    // Box-Muller on the engine's raw output keeps draws identical across
    // standard library implementations.
    constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
    double u1 = 0.0;
    do {
      u1 = static_cast<double>(engine_() >> 11) * scale;
    } while (u1 <= 0.0);
    const double u2 = static_cast<double>(engine_() >> 11) * scale;
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    double v = sigma_ * z;
    if (clip_ > 0.0) v = std::clamp(v, -clip_, clip_);
    return v;
  }

 private:
  double sigma_{0.0};
  double clip_{0.0};
  std::mt19937_64 engine_{0};
};

inline double obstacle_loss(const AccessPoint& ap, Point point, std::span<const Obstacle> obstacles) {
  double loss = 0.0;
  for (const auto& o : obstacles)
    if (blocks(o, ap.position, point)) loss += o.penetration_loss_db;
  return loss;
}

// Deterministic mean RSS (log-distance path loss, d0 = 1 m).
inline double mean_rss(const AccessPoint& ap, Point point, std::span<const Obstacle> obstacles) {
  const double d = std::max(distance(ap.position, point), 1.0);
  return ap.tx_power_dbm - ap.ref_loss_db - 10.0 * ap.path_loss_exponent * std::log10(d) -
         obstacle_loss(ap, point, obstacles);
}

inline double rss_at(const AccessPoint& ap, Point point, std::span<const Obstacle> obstacles,
                     Shadowing* shadowing = nullptr) {
  const double mean = mean_rss(ap, point, obstacles);
  // Shadowing is subtracted as an extra loss term.
  return shadowing ? mean - shadowing->draw() : mean;
}

// Coverage is defined on the deterministic mean only.
inline bool in_coverage(const AccessPoint& ap, Point point, std::span<const Obstacle> obstacles) {
  return mean_rss(ap, point, obstacles) >= ap.sensitivity_dbm;
}

}  // namespace hetsim
