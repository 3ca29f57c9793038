#pragma once

// Fixed-step simulation of one terminal moving along the route: sampling,
// scanning, handoff decisions and execution, admission, and the media flow
// through the tunnel and receive buffer.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetsim/environment.hpp"
#include "hetsim/execmodel.hpp"
#include "hetsim/handoff.hpp"
#include "hetsim/netres.hpp"
#include "hetsim/planner.hpp"
#include "hetsim/topology.hpp"

namespace hetsim {

struct LoadRampPoint {
  double time_s;
  double load;
  friend bool operator==(const LoadRampPoint&, const LoadRampPoint&) = default;
};

// Piecewise-linear in time, constant before the first and after the last point.
inline double ramp_value(std::span<const LoadRampPoint> ramp, double t) {
  if (ramp.empty()) return 0.0;
  if (t <= ramp.front().time_s) return ramp.front().load;
  for (std::size_t i = 1; i < ramp.size(); ++i) {
    if (t <= ramp[i].time_s) {
      const auto& a = ramp[i - 1];
      const auto& b = ramp[i];
      return a.load + (b.load - a.load) * (t - a.time_s) / (b.time_s - a.time_s);
    }
  }
  return ramp.back().load;
}

struct ShadowingConfig {
  double sigma_db{0.0};
  double clip_db{0.0};  // 0 = untruncated
};

struct ExecConfig {
  ExecLatencyModel latency;
  ScanSchedule scan;
  bool multi_interface{false};  // scanning does not interrupt traffic
  double buffer_target_ms{500.0};
  bool adaptive_buffer{false};
  double burst_multiplier{2.0};
  double max_queue_ms{2000.0};  // sender-side backlog before media is discarded
  double ch_to_ha_ms{40.0};
  double mh_to_ch_ms{60.0};
};

struct SimParams {
  std::int64_t tick_ms{10};
  std::uint64_t seed{1};
  double duration_cap_s{3600.0};
  std::int64_t sample_interval_ms{10};
  double ping_pong_window_s{5.0};
  double background_user_kbps{12.2};
  double step_m{1.0};
  double min_overlap_m{5.0};
};

struct ScenarioConfig {
  std::string name{"scenario"};
  std::vector<Point> waypoints;
  double speed_mps{10.0};
  std::vector<AccessPoint> aps;
  std::vector<Obstacle> obstacles;
  ShadowingConfig shadowing;
  HandoffPolicy policy;
  ServiceClass service;
  ExecConfig exec;
  std::map<std::string, double> initial_load;
  std::map<std::string, int> background_users;
  std::map<std::string, std::vector<LoadRampPoint>> load_ramps;
  SimParams sim;

  Route route() const { return Route(waypoints, speed_mps); }
};

class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string field, std::string constraint)
      : std::runtime_error(field + ": violates " + constraint), field_(std::move(field)),
        constraint_(std::move(constraint)) {}
  const std::string& field() const { return field_; }
  const std::string& constraint() const { return constraint_; }

 private:
  std::string field_;
  std::string constraint_;
};

inline void validate_scenario(const ScenarioConfig& c) {
  if (c.waypoints.size() < 2) throw ValidationError("environment.route", ">= 2 waypoints");
  for (std::size_t i = 1; i < c.waypoints.size(); ++i)
    if (c.waypoints[i] == c.waypoints[i - 1]) throw ValidationError("environment.route", "consecutive waypoints distinct");
  for (const auto& p : c.waypoints)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ValidationError("environment.route", "finite coordinates");
  if (!(c.speed_mps > 0.0) || !std::isfinite(c.speed_mps)) throw ValidationError("environment.speed", "speed > 0");
  if (c.aps.empty()) throw ValidationError("aps", ">= 1 access point");
  std::set<std::string> ids;
  for (const auto& ap : c.aps) {
    if (!ids.insert(ap.id).second) throw ValidationError("aps." + ap.id, "unique id");
    if (auto err = check_access_point(ap); !err.empty()) throw ValidationError("aps." + ap.id, err);
  }
  for (std::size_t i = 0; i < c.obstacles.size(); ++i)
    if (auto err = check_obstacle(c.obstacles[i]); !err.empty())
      throw ValidationError("obstacles[" + std::to_string(i) + "]", err);
  if (!(c.shadowing.sigma_db >= 0.0)) throw ValidationError("environment.shadowing_sigma", "shadowing_sigma >= 0");
  if (!(c.shadowing.clip_db >= 0.0)) throw ValidationError("environment.shadowing_clip", "shadowing_clip >= 0");
  if (auto err = check_policy(c.policy); !err.empty()) throw ValidationError("policy", err);
  if (!(c.service.required_bw_kbps > 0.0)) throw ValidationError("service.required_bw", "required_bw > 0");
  if (!(c.service.app_rate_kbps > 0.0)) throw ValidationError("service.app_rate", "app_rate > 0");
  if (!(c.service.payload_bytes > 0.0)) throw ValidationError("service.payload", "payload > 0");
  if (auto err = check_exec_model(c.exec.latency); !err.empty()) throw ValidationError("exec", err);
  if (auto err = check_scan_schedule(c.exec.scan); !err.empty()) throw ValidationError("exec", err);
  if (!(c.exec.buffer_target_ms >= 0.0)) throw ValidationError("exec.buffer_target", "buffer_target >= 0");
  if (!(c.exec.burst_multiplier > 1.0)) throw ValidationError("exec.burst_multiplier", "burst_multiplier > 1");
  if (!(c.exec.max_queue_ms >= 0.0)) throw ValidationError("exec.max_queue", "max_queue >= 0");
  if (!(c.exec.ch_to_ha_ms >= 0.0)) throw ValidationError("exec.ch_to_ha", "ch_to_ha >= 0");
  if (!(c.exec.mh_to_ch_ms >= 0.0)) throw ValidationError("exec.mh_to_ch", "mh_to_ch >= 0");
  if (c.sim.tick_ms <= 0) throw ValidationError("sim.tick", "tick > 0");
  if (c.sim.sample_interval_ms <= 0 || c.sim.sample_interval_ms % c.sim.tick_ms != 0)
    throw ValidationError("sim.sample_interval", "sample_interval a positive multiple of tick");
  if (!(c.sim.duration_cap_s > 0.0)) throw ValidationError("sim.duration", "duration > 0");
  if (!(c.sim.ping_pong_window_s > 0.0)) throw ValidationError("sim.ping_pong_window", "ping_pong_window > 0");
  if (!(c.sim.background_user_kbps >= 0.0))
    throw ValidationError("sim.background_user_kbps", "background_user_kbps >= 0");
  if (!(c.sim.step_m > 0.0)) throw ValidationError("sim.step", "step > 0");
  if (!(c.sim.min_overlap_m >= 0.0)) throw ValidationError("sim.min_overlap", "min_overlap >= 0");
  auto find_ap = [&](const std::string& id) -> const AccessPoint* {
    for (const auto& ap : c.aps)
      if (ap.id == id) return &ap;
    return nullptr;
  };
  for (const auto& [id, l] : c.initial_load) {
    if (!find_ap(id)) throw ValidationError("load." + id, "names a configured AP");
    if (!(l >= 0.0 && l <= 1.0)) throw ValidationError("load." + id, "load in [0, 1]");
  }
  for (const auto& [id, n] : c.background_users) {
    const auto* ap = find_ap(id);
    if (!ap) throw ValidationError("users." + id, "names a configured AP");
    if (n < 0 || n > ap->capacity_users) throw ValidationError("users." + id, "0 <= users <= capacity_users");
  }
  for (const auto& [id, ramp] : c.load_ramps) {
    if (!find_ap(id)) throw ValidationError("load_ramp." + id, "names a configured AP");
    if (ramp.empty()) throw ValidationError("load_ramp." + id, ">= 1 point");
    for (std::size_t i = 0; i < ramp.size(); ++i) {
      if (!(ramp[i].load >= 0.0 && ramp[i].load <= 1.0)) throw ValidationError("load_ramp." + id, "load in [0, 1]");
      if (i > 0 && !(ramp[i].time_s > ramp[i - 1].time_s))
        throw ValidationError("load_ramp." + id, "strictly increasing times");
    }
  }
}

enum class EventType { Attach, Detach, Handoff, ScanStart, ScanEnd, Underrun, AdmissionReject, EmergencyRebalance };

struct Event {
  std::int64_t time_ms{0};
  EventType type{EventType::Attach};
  std::string ap;  // Attach/Detach/AdmissionReject/EmergencyRebalance target; Handoff source
  std::string to;  // Handoff target
  HandoffKind kind{HandoffKind::Horizontal};
  Reason reason{Reason::Hold};
  double delay_ms{0.0};
  RejectReason reject{RejectReason::UserCapacity};
  bool success{false};

  std::string code() const {
    switch (type) {
      case EventType::Attach: return "ATTACH:" + ap;
      case EventType::Detach: return "DETACH:" + ap;
      case EventType::Handoff:
        return "HO:" + ap + "->" + to + ":" + std::string(to_string(kind)) + ":" + std::string(to_string(reason));
      case EventType::ScanStart: return "SCAN_START";
      case EventType::ScanEnd: return "SCAN_END";
      case EventType::Underrun: return "UNDERRUN";
      case EventType::AdmissionReject: return "REJECT:" + ap + ":" + std::string(to_string(reject));
      case EventType::EmergencyRebalance: return "EMERGENCY:" + ap + ":" + (success ? "ok" : "fail");
    }
    return "?";
  }
};

using EventLog = std::vector<Event>;

inline Event plain_event(std::int64_t time_ms, EventType type) {
  Event e;
  e.time_ms = time_ms;
  e.type = type;
  return e;
}

struct TraceRow {
  double t_s{0.0};
  double s_m{0.0};
  double x_m{0.0};
  double y_m{0.0};
  std::string attached_ap;  // empty during outage
  std::string tech;
  double rss_dbm{std::numeric_limits<double>::quiet_NaN()};
  double goodput_kbps{0.0};
  double buffer_ms{0.0};
  double load{std::numeric_limits<double>::quiet_NaN()};
  std::string event;
};

struct MetricsReport {
  double mean_goodput_kbps{0.0};
  double peak_goodput_kbps{0.0};
  std::uint64_t handoffs_horizontal{0};
  std::uint64_t handoffs_vertical{0};
  std::uint64_t ping_pong_count{0};
  double total_outage_ms{0.0};
  double total_scan_interruption_ms{0.0};
  double total_exec_interruption_ms{0.0};
  std::uint64_t buffer_underruns{0};
  std::vector<double> handoff_delays_ms;
  double coverage_fraction{0.0};
  std::uint64_t ticks{0};
  std::uint64_t outage_ticks{0};
  std::uint64_t admission_rejects{0};
  std::uint64_t emergency_rebalances{0};
  double media_generated_ms{0.0};
  double media_sent_ms{0.0};
  double media_discarded_ms{0.0};
  double media_played_ms{0.0};
  double final_buffer_ms{0.0};
  double final_buffer_target_ms{0.0};
  double mean_downlink_latency_ms{0.0};
  std::map<std::string, int> peak_attached_users;
  std::map<std::string, double> average_traffic;

  std::uint64_t handoff_count() const { return handoffs_horizontal + handoffs_vertical; }
};

// A -> B immediately followed by B -> A within the window.
inline std::uint64_t ping_pong_count(const EventLog& events, double window_s) {
  if (!(window_s > 0.0)) throw std::invalid_argument("window must be > 0");
  std::vector<const Event*> hos;
  for (const auto& e : events)
    if (e.type == EventType::Handoff) hos.push_back(&e);
  std::uint64_t n = 0;
  const auto window_ms = window_s * 1000.0;
  for (std::size_t i = 0; i + 1 < hos.size(); ++i) {
    const auto& a = *hos[i];
    const auto& b = *hos[i + 1];
    if (b.ap == a.to && b.to == a.ap && static_cast<double>(b.time_ms - a.time_ms) <= window_ms) ++n;
  }
  return n;
}

struct RunResult {
  MetricsReport metrics;
  EventLog events;
  std::vector<TraceRow> trace;
  AttachmentPlan plan;
  std::string plan_error;  // non-empty when no S->D plan exists
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline double prospective_load(const NetworkState& s, double extra_kbps) {
  const double users = static_cast<double>(s.attached_users() + 1) / static_cast<double>(s.capacity_users());
  const double bw = (s.offered_load_kbps() + extra_kbps) / s.capacity_bw_kbps();
  return std::clamp(std::max(users, bw), 0.0, 1.0);
}

}  // namespace detail

inline std::vector<NetworkState> initial_network_states(const ScenarioConfig& c) {
  std::vector<NetworkState> states;
  std::uint64_t next_flow = 1;
  for (const auto& ap : c.aps) {
    NetworkState s(ap.id, ap.capacity_users, ap.capacity_bw_kbps);
    if (auto it = c.initial_load.find(ap.id); it != c.initial_load.end())
      s.set_background_kbps(it->second * ap.capacity_bw_kbps);
    if (auto it = c.load_ramps.find(ap.id); it != c.load_ramps.end())
      s.set_background_kbps(ramp_value(it->second, 0.0) * ap.capacity_bw_kbps);
    if (auto it = c.background_users.find(ap.id); it != c.background_users.end())
      for (int i = 0; i < it->second; ++i) s.attach_unchecked({next_flow++, c.sim.background_user_kbps, false});
    states.push_back(std::move(s));
  }
  return states;
}

// Launch-time load snapshot used to annotate the coverage graph.
inline LoadSnapshot launch_loads(const ScenarioConfig& c) {
  LoadSnapshot loads;
  for (const auto& s : initial_network_states(c)) loads[s.ap_id()] = s.load();
  return loads;
}

inline CoverageGraph scenario_graph(const ScenarioConfig& c) {
  const Route route = c.route();
  auto intervals = coverage_intervals(route, c.aps, c.obstacles, c.sim.step_m);
  auto graph = build_graph(std::move(intervals), route.length(), c.sim.min_overlap_m);
  return annotate(std::move(graph), launch_loads(c), route, c.aps, c.obstacles, c.sim.step_m);
}

class Simulator {
 public:
  explicit Simulator(const ScenarioConfig& config) : c_(config), route_((validate_scenario(config), config.route())) {}

  RunResult run() {
    RunResult out;
    try {
      out.plan = plan(scenario_graph(c_));
    } catch (const CoverageGapError& e) {
      out.plan_error = e.what();
    }
    plan_ = &out.plan;
    init();

    const std::int64_t tick = c_.sim.tick_ms;
    const double horizon_s = std::min(route_.duration_s(), c_.sim.duration_cap_s);
    const auto last_tick = static_cast<std::int64_t>(std::floor(horizon_s * 1000.0 / static_cast<double>(tick) + 1e-9));
    out.trace.reserve(static_cast<std::size_t>(last_tick + 1));

    for (std::int64_t k = 0; k <= last_tick; ++k) step(k, out);
    finish(out);
    return out;
  }

 private:
  void init() {
    const std::size_t n = c_.aps.size();
    nets_ = initial_network_states(c_);
    obs_.assign(n, {});
    states_.assign(n, {});
    for (std::size_t i = 0; i < n; ++i) {
      obs_[i].sample.ap_id = c_.aps[i].id;
      obs_[i].tech = c_.aps[i].tech;
      obs_[i].sensitivity_dbm = c_.aps[i].sensitivity_dbm;
      obs_[i].sample.rss_dbm = -std::numeric_limits<double>::infinity();
    }
    shadowing_ = Shadowing(c_.shadowing.sigma_db, c_.shadowing.clip_db, detail::splitmix64(c_.sim.seed ^ 0x5348414430574eull));
    scans_.emplace(c_.exec.scan, detail::splitmix64(c_.sim.seed ^ 0x5343414e5343414eull));
    fraction_ = tunnel_goodput(c_.service.app_rate_kbps, c_.service.payload_bytes).fraction;
    buffer_ = BufferState{};
    buffer_.target_ms = c_.exec.adaptive_buffer ? adaptive_buffer_target(0.0) : c_.exec.buffer_target_ms;
    buffer_.playout_rate_kbps = c_.service.app_rate_kbps;
    next_scan_ms_ = static_cast<std::int64_t>(c_.exec.scan.period_ms);
    peak_users_.assign(n, 0);
  }

  static constexpr std::uint64_t kTerminalFlow = 0;

  Flow terminal_flow() const { return {kTerminalFlow, c_.service.required_bw_kbps, c_.service.emergency}; }

  void emit(RunResult& out, std::vector<std::string>& codes, Event e) {
    codes.push_back(e.code());
    out.events.push_back(std::move(e));
  }

  void reset_states() {
    for (auto& s : states_) s = CandidateState{};
  }

  void refresh_loads() {
    for (std::size_t i = 0; i < nets_.size(); ++i) {
      const bool serving = attached_ && *attached_ == i;
      obs_[i].load = serving ? nets_[i].load() : detail::prospective_load(nets_[i], c_.service.required_bw_kbps);
      obs_[i].residual_bw_kbps = nets_[i].residual_bw_kbps();
    }
  }

  // Admission including the emergency path. Logs rejections once per episode.
  bool try_admit(std::size_t idx, std::int64_t now, RunResult& out, std::vector<std::string>& codes) {
    auto result = admit(nets_[idx], terminal_flow());
    if (result) return true;
    if (c_.service.emergency) {
      std::vector<NetworkState> neighbors;
      std::vector<std::size_t> index;
      for (std::size_t j = 0; j < nets_.size(); ++j) {
        if (j == idx) continue;
        neighbors.push_back(nets_[j]);
        index.push_back(j);
      }
      const bool ok = request_emergency(c_.service, nets_[idx], neighbors);
      if (ok)
        for (std::size_t j = 0; j < index.size(); ++j) nets_[index[j]] = std::move(neighbors[j]);
      Event e;
      e.time_ms = now;
      e.type = EventType::EmergencyRebalance;
      e.ap = c_.aps[idx].id;
      e.success = ok;
      emit(out, codes, std::move(e));
      ++out.metrics.emergency_rebalances;
      if (ok && admit(nets_[idx], terminal_flow())) return true;
    }
    if (rejected_.insert(idx).second) {
      Event e;
      e.time_ms = now;
      e.type = EventType::AdmissionReject;
      e.ap = c_.aps[idx].id;
      e.reject = result.reason;
      emit(out, codes, std::move(e));
      ++out.metrics.admission_rejects;
    }
    return false;
  }

  void begin_execution(std::int64_t now, double delay_ms) {
    const auto tick = c_.sim.tick_ms;
    const auto ticks = static_cast<std::int64_t>(std::ceil(delay_ms / static_cast<double>(tick) - 1e-9));
    exec_until_ms_ = now + ticks * tick;
  }

  bool same_subnet(std::size_t a, std::size_t b) const {
    return c_.aps[a].tech == c_.aps[b].tech && c_.aps[a].provider == c_.aps[b].provider;
  }

  void try_attach(std::int64_t now, double s, bool launch, RunResult& out, std::vector<std::string>& codes) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < obs_.size(); ++i)
      if (obs_[i].in_range()) order.push_back(i);
    if (order.empty()) return;
    std::optional<std::size_t> planned;
    if (!plan_->empty())
      if (auto seg = segment_at(*plan_, s))
        for (auto i : order)
          if (c_.aps[i].id == plan_->segments[*seg].ap_id) planned = i;
    const bool network_aware = c_.policy.strategy != Strategy::MCHO;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (planned && (a == *planned) != (b == *planned)) return a == *planned;
      if (network_aware) {
        const bool la = obs_[a].load <= c_.policy.load_ceiling;
        const bool lb = obs_[b].load <= c_.policy.load_ceiling;
        if (la != lb) return la;
      }
      return detail::better_candidate(obs_[a], obs_[b]);
    });
    for (auto i : order) {
      if (!try_admit(i, now, out, codes)) continue;
      attached_ = i;
      rejected_.clear();
      reset_states();
      Event e;
      e.time_ms = now;
      e.type = EventType::Attach;
      e.ap = c_.aps[i].id;
      emit(out, codes, std::move(e));
      if (!launch && last_tech_) begin_execution(now, execution_delay(c_.exec.latency, *last_tech_, c_.aps[i].tech));
      return;
    }
  }

  void decide_and_execute(std::int64_t now, double s, RunResult& out, std::vector<std::string>& codes) {
    std::vector<std::size_t> excluded;
    for (std::size_t attempt = 0; attempt <= obs_.size(); ++attempt) {
      DecisionInput in{c_.policy, *attached_, obs_, states_, plan_, s, c_.service, excluded};
      const auto d = decide(in);
      if (d.outage) {
        const auto from = *attached_;
        nets_[from].release(kTerminalFlow);
        last_tech_ = c_.aps[from].tech;
        attached_.reset();
        reset_states();
        Event e;
        e.time_ms = now;
        e.type = EventType::Detach;
        e.ap = c_.aps[from].id;
        emit(out, codes, std::move(e));
        return;
      }
      if (!d.is_handoff()) return;
      const auto to = *d.target;
      if (!try_admit(to, now, out, codes)) {
        excluded.push_back(to);
        continue;
      }
      const auto from = *attached_;
      nets_[from].release(kTerminalFlow);
      attached_ = to;
      rejected_.clear();
      reset_states();
      const double delay = execution_delay(c_.exec.latency, c_.aps[from].tech, c_.aps[to].tech, same_subnet(from, to));
      begin_execution(now, delay);
      Event e;
      e.time_ms = now;
      e.type = EventType::Handoff;
      e.ap = c_.aps[from].id;
      e.to = c_.aps[to].id;
      e.kind = d.kind;
      e.reason = d.reason;
      e.delay_ms = delay;
      emit(out, codes, std::move(e));
      auto& m = out.metrics;
      (d.kind == HandoffKind::Horizontal ? m.handoffs_horizontal : m.handoffs_vertical)++;
      m.handoff_delays_ms.push_back(delay);
      return;
    }
  }

  void step(std::int64_t k, RunResult& out) {
    const std::int64_t tick = c_.sim.tick_ms;
    const std::int64_t now = k * tick;
    const double t = static_cast<double>(now) / 1000.0;
    const double s = std::min(route_.speed() * t, route_.length());
    const Point pt = route_.point_at_arclength(s);
    std::vector<std::string> codes;
    auto& m = out.metrics;

    for (std::size_t i = 0; i < nets_.size(); ++i)
      if (auto it = c_.load_ramps.find(c_.aps[i].id); it != c_.load_ramps.end())
        nets_[i].set_background_kbps(ramp_value(it->second, t) * c_.aps[i].capacity_bw_kbps);

    if (c_.exec.scan.enabled()) {
      if (scanning_ && now >= scan_end_ms_) {
        scanning_ = false;
        emit(out, codes, plain_event(now, EventType::ScanEnd));
      }
      if (!scanning_ && now >= next_scan_ms_) {
        const double dur = scans_->draw();
        const auto ticks = static_cast<std::int64_t>(std::ceil(dur / static_cast<double>(tick) - 1e-9));
        scanning_ = true;
        scan_end_ms_ = now + ticks * tick;
        next_scan_ms_ += static_cast<std::int64_t>(c_.exec.scan.period_ms);
        emit(out, codes, plain_event(now, EventType::ScanStart));
      }
    }

    if (now % c_.sim.sample_interval_ms == 0) {
      for (std::size_t i = 0; i < c_.aps.size(); ++i) {
        obs_[i].sample.time_s = t;
        obs_[i].sample.s_m = s;
        obs_[i].sample.rss_dbm = rss_at(c_.aps[i], pt, c_.obstacles, &shadowing_);
      }
      const double current = attached_ ? obs_[*attached_].sample.rss_dbm : -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < c_.aps.size(); ++i)
        if (!attached_ || *attached_ != i) update_candidate(states_[i], c_.policy, current, obs_[i].sample, obs_[i].tech, now);
    }
    refresh_loads();

    const bool executing = now < exec_until_ms_;
    if (!executing) {
      if (attached_) decide_and_execute(now, s, out, codes);
      else try_attach(now, s, k == 0, out, codes);
      refresh_loads();
    }
    const bool exec_active = now < exec_until_ms_;

    // Media flow: one tick of media enters the sender queue every tick.
    const double tick_d = static_cast<double>(tick);
    queue_ms_ += tick_d;
    m.media_generated_ms += tick_d;
    if (queue_ms_ > c_.exec.max_queue_ms) {
      m.media_discarded_ms += queue_ms_ - c_.exec.max_queue_ms;
      queue_ms_ = c_.exec.max_queue_ms;
    }
    const bool scan_blocks = scanning_ && c_.exec.scan.interrupts_traffic && !c_.exec.multi_interface;
    const bool link_up = attached_ && !exec_active && !scan_blocks;
    double sent = 0.0;
    if (link_up) {
      const double mult = std::min(c_.exec.burst_multiplier, c_.aps[*attached_].rate_cap_kbps / c_.service.app_rate_kbps);
      sent = std::min(queue_ms_, tick_d * mult);
      queue_ms_ -= sent;
    }
    m.media_sent_ms += sent;
    if (attached_ && scan_blocks) m.total_scan_interruption_ms += tick_d;
    if (attached_ && exec_active) m.total_exec_interruption_ms += tick_d;
    const double goodput = sent / tick_d * c_.service.app_rate_kbps * fraction_;
    m.peak_goodput_kbps = std::max(m.peak_goodput_kbps, goodput);

    if (sent <= 0.0) {
      silence_ms_ += tick_d;
    } else if (silence_ms_ > 0.0) {
      largest_silence_ms_ = std::max(largest_silence_ms_, silence_ms_);
      silence_ms_ = 0.0;
      if (c_.exec.adaptive_buffer) buffer_.target_ms = adaptive_buffer_target(largest_silence_ms_);
    }
    if (buffer_step(buffer_, sent, tick_d).underrun) emit(out, codes, plain_event(now, EventType::Underrun));

    ++m.ticks;
    if (!attached_) ++m.outage_ticks;
    if (attached_) {
      const auto& ap = c_.aps[*attached_];
      latency_sum_ += triangular_delay(c_.exec.ch_to_ha_ms, ap.base_latency_ms, c_.exec.mh_to_ch_ms).downlink_ms +
                      buffer_.latency_ms();
      ++latency_ticks_;
    }
    for (std::size_t i = 0; i < nets_.size(); ++i) {
      peak_users_[i] = std::max(peak_users_[i], nets_[i].attached_users());
      if (now % 100 == 0) nets_[i].record_load(t);
    }

    TraceRow row;
    row.t_s = t;
    row.s_m = s;
    row.x_m = pt.x;
    row.y_m = pt.y;
    if (attached_) {
      row.attached_ap = c_.aps[*attached_].id;
      row.tech = std::string(to_string(c_.aps[*attached_].tech));
      row.rss_dbm = obs_[*attached_].sample.rss_dbm;
      row.load = nets_[*attached_].load();
    }
    row.goodput_kbps = goodput;
    row.buffer_ms = buffer_.occupancy_ms;
    for (std::size_t i = 0; i < codes.size(); ++i) row.event += (i ? "|" : "") + codes[i];
    out.trace.push_back(std::move(row));
  }

  void finish(RunResult& out) {
    auto& m = out.metrics;
    const double tick_d = static_cast<double>(c_.sim.tick_ms);
    m.total_outage_ms = static_cast<double>(m.outage_ticks) * tick_d;
    m.coverage_fraction = m.ticks ? 1.0 - static_cast<double>(m.outage_ticks) / static_cast<double>(m.ticks) : 0.0;
    m.mean_goodput_kbps =
        m.ticks ? m.media_sent_ms / (static_cast<double>(m.ticks) * tick_d) * c_.service.app_rate_kbps * fraction_ : 0.0;
    m.buffer_underruns = buffer_.underruns;
    m.media_played_ms = buffer_.media_played_ms;
    m.final_buffer_ms = buffer_.occupancy_ms;
    m.final_buffer_target_ms = buffer_.target_ms;
    m.mean_downlink_latency_ms = latency_ticks_ ? latency_sum_ / static_cast<double>(latency_ticks_) : 0.0;
    m.ping_pong_count = ping_pong_count(out.events, c_.sim.ping_pong_window_s);
    const double horizon = std::max(static_cast<double>(m.ticks) * tick_d / 1000.0, 1e-3);
    for (std::size_t i = 0; i < nets_.size(); ++i) {
      m.peak_attached_users[c_.aps[i].id] = peak_users_[i];
      m.average_traffic[c_.aps[i].id] = average_traffic(nets_[i], horizon).value;
    }
  }

  const ScenarioConfig& c_;
  Route route_;
  const AttachmentPlan* plan_{nullptr};
  std::vector<NetworkState> nets_;
  std::vector<Observation> obs_;
  std::vector<CandidateState> states_;
  std::optional<std::size_t> attached_;
  std::optional<Tech> last_tech_;
  std::set<std::size_t> rejected_;
  Shadowing shadowing_;
  std::optional<ScanDurationSource> scans_;
  double fraction_{1.0};
  BufferState buffer_;
  std::int64_t exec_until_ms_{0};
  bool scanning_{false};
  std::int64_t scan_end_ms_{0};
  std::int64_t next_scan_ms_{0};
  double queue_ms_{0.0};
  double silence_ms_{0.0};
  double largest_silence_ms_{0.0};
  double latency_sum_{0.0};
  std::uint64_t latency_ticks_{0};
  std::vector<int> peak_users_;
};

inline RunResult run(const ScenarioConfig& scenario) { return Simulator(scenario).run(); }

// ---------------------------------------------------------------------------
// Post-hoc log audit, independent of the decision engine.

struct AuditReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

inline AuditReport audit_event_log(const EventLog& events, double dwell_ms) {
  AuditReport r;
  std::optional<std::string> current;
  std::optional<std::int64_t> last_handoff;
  std::int64_t last_time = std::numeric_limits<std::int64_t>::min();
  for (const auto& e : events) {
    if (e.time_ms < last_time) r.violations.push_back("timestamps decrease at " + std::to_string(e.time_ms) + " ms");
    last_time = e.time_ms;
    switch (e.type) {
      case EventType::Attach:
        if (current) r.violations.push_back("attach to " + e.ap + " while attached to " + *current);
        current = e.ap;
        last_handoff = e.time_ms;  // attachment restarts the dwell clock
        break;
      case EventType::Detach:
        if (current != e.ap) r.violations.push_back("detach from " + e.ap + " which is not attached");
        current.reset();
        break;
      case EventType::Handoff:
        if (current != e.ap) r.violations.push_back("handoff from " + e.ap + " without prior attach");
        if (e.reason != Reason::CoverageLoss && last_handoff &&
            static_cast<double>(e.time_ms - *last_handoff) < dwell_ms)
          r.violations.push_back("handoff at " + std::to_string(e.time_ms) + " ms closer than dwell to previous");
        last_handoff = e.time_ms;
        current = e.to;
        break;
      default: break;
    }
  }
  return r;
}

inline AuditReport audit_capacity(const ScenarioConfig& c, const MetricsReport& m) {
  AuditReport r;
  for (const auto& ap : c.aps) {
    auto it = m.peak_attached_users.find(ap.id);
    if (it != m.peak_attached_users.end() && it->second > ap.capacity_users)
      r.violations.push_back(ap.id + " peaked at " + std::to_string(it->second) + " users > capacity " +
                             std::to_string(ap.capacity_users));
  }
  return r;
}

// ---------------------------------------------------------------------------

struct NamedScenario {
  std::string name;
  ScenarioConfig config;
};

struct ComparisonRow {
  std::string name;
  MetricsReport metrics;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;

  const ComparisonRow& row(std::string_view name) const {
    for (const auto& r : rows)
      if (r.name == name) return r;
    throw std::out_of_range("no comparison row named " + std::string(name));
  }
};

inline ComparisonTable compare(std::span<const NamedScenario> scenarios) {
  if (scenarios.size() < 2) throw ValidationError("compare", ">= 2 scenarios");
  std::set<std::string> names;
  for (const auto& s : scenarios) {
    if (!names.insert(s.name).second) throw ValidationError("compare." + s.name, "unique scenario names");
    if (s.config.waypoints != scenarios.front().config.waypoints ||
        s.config.speed_mps != scenarios.front().config.speed_mps)
      throw ValidationError("compare." + s.name, "same route as " + scenarios.front().name);
    if (!(s.config.service == scenarios.front().config.service))
      throw ValidationError("compare." + s.name, "same service as " + scenarios.front().name);
  }
  ComparisonTable t;
  for (const auto& s : scenarios) t.rows.push_back({s.name, run(s.config).metrics});
  return t;
}

}  // namespace hetsim
