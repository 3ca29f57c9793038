#pragma once

// Runtime handoff decision engine: classification, trigger predicate and the
// per-tick decision rule.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hetsim/environment.hpp"
#include "hetsim/netres.hpp"
#include "hetsim/planner.hpp"

namespace hetsim {

enum class Strategy { MCHO, NCHO, MAHO };

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::MCHO: return "MCHO";
    case Strategy::NCHO: return "NCHO";
    case Strategy::MAHO: return "MAHO";
  }
  return "?";
}

inline std::optional<Strategy> strategy_from_string(std::string_view s) {
  if (s == "MCHO") return Strategy::MCHO;
  if (s == "NCHO") return Strategy::NCHO;
  if (s == "MAHO") return Strategy::MAHO;
  return std::nullopt;
}

enum class ServiceKind { RealTime, NonRealTime };

inline std::string_view to_string(ServiceKind k) { return k == ServiceKind::RealTime ? "RealTime" : "NonRealTime"; }

struct ServiceClass {
  ServiceKind kind{ServiceKind::RealTime};
  double required_bw_kbps{60.0};
  bool emergency{false};
  double app_rate_kbps{60.0};   // media stream rate carried on the link
  double payload_bytes{180.0};  // application payload per packet

  friend bool operator==(const ServiceClass&, const ServiceClass&) = default;
};

struct HandoffPolicy {
  std::array<double, 3> rss_threshold_dbm{-80.0, -105.0, -95.0};  // indexed by Tech
  double hysteresis_db{4.0};
  double dwell_ms{1000.0};
  int beacons_realtime{3};
  int beacons_nonrealtime{5};
  Strategy strategy{Strategy::MAHO};
  double load_ceiling{0.9};

  double threshold(Tech t) const { return rss_threshold_dbm[static_cast<std::size_t>(t)]; }
  double& threshold(Tech t) { return rss_threshold_dbm[static_cast<std::size_t>(t)]; }
  int beacons(ServiceKind k) const { return k == ServiceKind::RealTime ? beacons_realtime : beacons_nonrealtime; }
};

inline std::string check_policy(const HandoffPolicy& p) {
  if (!(p.hysteresis_db >= 0.0)) return "hysteresis >= 0";
  if (!(p.dwell_ms >= 0.0)) return "dwell >= 0";
  if (p.beacons_realtime < 0) return "beacons_realtime >= 0";
  if (p.beacons_nonrealtime < 0) return "beacons_nonrealtime >= 0";
  if (p.beacons_realtime > p.beacons_nonrealtime) return "beacons_realtime <= beacons_nonrealtime";
  if (!(p.load_ceiling >= 0.0 && p.load_ceiling <= 1.0)) return "load_ceiling in [0, 1]";
  return {};
}

enum class HandoffKind { Horizontal, Vertical };

inline std::string_view to_string(HandoffKind k) { return k == HandoffKind::Horizontal ? "H" : "V"; }

inline HandoffKind classify(Tech from, Tech to) {
  return from == to ? HandoffKind::Horizontal : HandoffKind::Vertical;
}

enum class Reason { RssTrigger, LoadTrigger, PlanFollow, CoverageLoss, Hold };

inline std::string_view to_string(Reason r) {
  switch (r) {
    case Reason::RssTrigger: return "RssTrigger";
    case Reason::LoadTrigger: return "LoadTrigger";
    case Reason::PlanFollow: return "PlanFollow";
    case Reason::CoverageLoss: return "CoverageLoss";
    case Reason::Hold: return "Hold";
  }
  return "?";
}

// Per-candidate bookkeeping of how long its trigger predicates have held.
// "Superior" is the RSS predicate relative to the serving AP (threshold plus
// hysteresis); "eligible" is the absolute threshold alone, used by load
// triggered handoffs.
struct CandidateState {
  int consecutive_good_beacons{0};
  double superior_since_ms{0.0};
  std::optional<std::int64_t> superior_start_ms;
  int eligible_beacons{0};
  double eligible_since_ms{0.0};
  std::optional<std::int64_t> eligible_start_ms;
  RssSample last;

  friend bool operator==(const CandidateState&, const CandidateState&) = default;
};

inline bool rss_superior(const HandoffPolicy& policy, double current_rss, double candidate_rss, Tech candidate_tech) {
  // A tie never wins, even with zero hysteresis.
  return candidate_rss >= policy.threshold(candidate_tech) && candidate_rss >= current_rss + policy.hysteresis_db &&
         candidate_rss > current_rss;
}

// Feeds one beacon/measurement into the candidate's counters.
inline void update_candidate(CandidateState& st, const HandoffPolicy& policy, double current_rss,
                             const RssSample& candidate, Tech candidate_tech, std::int64_t now_ms) {
  st.last = candidate;
  if (rss_superior(policy, current_rss, candidate.rss_dbm, candidate_tech)) {
    if (!st.superior_start_ms) st.superior_start_ms = now_ms;
    ++st.consecutive_good_beacons;
    st.superior_since_ms = static_cast<double>(now_ms - *st.superior_start_ms);
  } else {
    st.superior_start_ms.reset();
    st.consecutive_good_beacons = 0;
    st.superior_since_ms = 0.0;
  }
  if (candidate.rss_dbm >= policy.threshold(candidate_tech)) {
    if (!st.eligible_start_ms) st.eligible_start_ms = now_ms;
    ++st.eligible_beacons;
    st.eligible_since_ms = static_cast<double>(now_ms - *st.eligible_start_ms);
  } else {
    st.eligible_start_ms.reset();
    st.eligible_beacons = 0;
    st.eligible_since_ms = 0.0;
  }
}

inline bool load_acceptable(const HandoffPolicy& policy, double candidate_load) {
  // The terminal alone has no view of network load.
  return policy.strategy == Strategy::MCHO || candidate_load <= policy.load_ceiling;
}

inline bool trigger(const HandoffPolicy& policy, const RssSample& current, const RssSample& candidate,
                    Tech candidate_tech, const CandidateState& state, const ServiceClass& service,
                    double candidate_load) {
  return rss_superior(policy, current.rss_dbm, candidate.rss_dbm, candidate_tech) &&
         state.superior_start_ms.has_value() && state.superior_since_ms >= policy.dwell_ms &&
         state.consecutive_good_beacons >= policy.beacons(service.kind) && load_acceptable(policy, candidate_load);
}

// Predicate for leaving an overloaded serving network: the candidate must be
// usable on its own merits (threshold, dwell, beacons, load), no hysteresis.
inline bool load_trigger(const HandoffPolicy& policy, const RssSample& candidate, Tech candidate_tech,
                         const CandidateState& state, const ServiceClass& service, double candidate_load) {
  return policy.strategy != Strategy::MCHO && candidate.rss_dbm >= policy.threshold(candidate_tech) &&
         state.eligible_start_ms.has_value() && state.eligible_since_ms >= policy.dwell_ms &&
         state.eligible_beacons >= policy.beacons(service.kind) && candidate_load <= policy.load_ceiling;
}

// What the terminal knows about one AP at the current tick.
struct Observation {
  RssSample sample;
  Tech tech{Tech::WLAN};
  double sensitivity_dbm{-85.0};
  double load{0.0};
  double residual_bw_kbps{0.0};

  bool in_range() const { return sample.rss_dbm >= sensitivity_dbm; }
};

struct HandoffDecision {
  enum class Action { Stay, Handoff };
  Action action{Action::Stay};
  std::optional<std::size_t> target;  // index into the observations
  Reason reason{Reason::Hold};
  HandoffKind kind{HandoffKind::Horizontal};
  bool outage{false};  // serving AP lost with nowhere to go

  bool is_handoff() const { return action == Action::Handoff; }
};

struct DecisionInput {
  const HandoffPolicy& policy;
  std::size_t attached;                       // index into observations
  std::span<const Observation> observations;
  std::span<const CandidateState> states;     // parallel to observations
  const AttachmentPlan* plan{nullptr};        // advisory; may be null/empty
  double position_m{0.0};
  const ServiceClass& service;
  std::span<const std::size_t> excluded{};    // refused by admission this tick
};

namespace detail {

// Highest RSS, then most residual bandwidth, then lowest id.
inline bool better_candidate(const Observation& a, const Observation& b) {
  if (a.sample.rss_dbm != b.sample.rss_dbm) return a.sample.rss_dbm > b.sample.rss_dbm;
  if (a.residual_bw_kbps != b.residual_bw_kbps) return a.residual_bw_kbps > b.residual_bw_kbps;
  return a.sample.ap_id < b.sample.ap_id;
}

template <typename Pred>
std::optional<std::size_t> best_matching(const DecisionInput& in, Pred pred) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < in.observations.size(); ++i) {
    if (i == in.attached) continue;
    if (std::find(in.excluded.begin(), in.excluded.end(), i) != in.excluded.end()) continue;
    if (!pred(i)) continue;
    if (!best || better_candidate(in.observations[i], in.observations[*best])) best = i;
  }
  return best;
}

inline HandoffDecision handoff_to(const DecisionInput& in, std::size_t target, Reason reason) {
  HandoffDecision d;
  d.action = HandoffDecision::Action::Handoff;
  d.target = target;
  d.reason = reason;
  d.kind = classify(in.observations[in.attached].tech, in.observations[target].tech);
  return d;
}

}  // namespace detail

// Coverage loss, then network load, then the plan's next hop, then plain RSS
// superiority. At most one handoff per call.
inline HandoffDecision decide(const DecisionInput& in) {
  if (in.attached >= in.observations.size()) throw std::invalid_argument("attached AP missing from observations");
  if (in.states.size() != in.observations.size()) throw std::invalid_argument("states must parallel observations");
  const auto& policy = in.policy;
  const auto& cur = in.observations[in.attached];

  if (!cur.in_range()) {
    auto target = detail::best_matching(
        in, [&](std::size_t i) { return in.observations[i].in_range() && load_acceptable(policy, in.observations[i].load); });
    if (!target) target = detail::best_matching(in, [&](std::size_t i) { return in.observations[i].in_range(); });
    if (target) return detail::handoff_to(in, *target, Reason::CoverageLoss);
    HandoffDecision d;
    d.reason = Reason::CoverageLoss;
    d.outage = true;
    return d;
  }

  if (policy.strategy != Strategy::MCHO && cur.load > policy.load_ceiling) {
    const auto target = detail::best_matching(in, [&](std::size_t i) {
      const auto& o = in.observations[i];
      return load_trigger(policy, o.sample, o.tech, in.states[i], in.service, o.load);
    });
    if (target) return detail::handoff_to(in, *target, Reason::LoadTrigger);
  }

  auto fires = [&](std::size_t i) {
    const auto& o = in.observations[i];
    return trigger(policy, cur.sample, o.sample, o.tech, in.states[i], in.service, o.load);
  };

  if (in.plan && !in.plan->empty()) {
    const auto& segs = in.plan->segments;
    for (std::size_t j = 0; j < in.plan->windows.size(); ++j) {
      if (segs[j].ap_id != cur.sample.ap_id || !in.plan->windows[j].contains(in.position_m)) continue;
      const auto& next_id = segs[j + 1].ap_id;
      for (std::size_t i = 0; i < in.observations.size(); ++i) {
        if (i == in.attached || in.observations[i].sample.ap_id != next_id) continue;
        if (std::find(in.excluded.begin(), in.excluded.end(), i) != in.excluded.end()) continue;
        if (fires(i)) return detail::handoff_to(in, i, Reason::PlanFollow);
      }
    }
  }

  if (const auto target = detail::best_matching(in, fires)) return detail::handoff_to(in, *target, Reason::RssTrigger);
  return {};
}

// Asks the surrounding networks to absorb traffic so an emergency flow fits
// on the target. Non-emergency services must not call this.
inline bool request_emergency(const ServiceClass& service, NetworkState& target, std::span<NetworkState> neighbors) {
  if (!service.emergency) throw std::logic_error("request_emergency requires an emergency service");
  const double deficit = service.required_bw_kbps - target.residual_bw_kbps();
  if (deficit <= 0.0 && target.attached_users() < target.capacity_users()) return true;
  const double ask = std::max(deficit, std::numeric_limits<double>::min());
  if (!rebalance_emergency(target, neighbors, ask)) return false;
  return check_admission(target, service.required_bw_kbps).accepted;
}

}  // namespace hetsim
