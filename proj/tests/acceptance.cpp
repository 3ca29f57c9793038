// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the
// number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "support.hpp"

using namespace hetsim;
using namespace testsupport;

namespace {

struct Outcome {
  bool ok{true};
  std::string detail;
  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::string csv(const RunResult& r) {
  std::ostringstream os;
  write_trace_csv(os, r.trace);
  return os.str();
}

std::size_t count(const EventLog& log, EventType t) {
  std::size_t n = 0;
  for (const auto& e : log) n += e.type == t;
  return n;
}

std::vector<ScenarioConfig> seeded_suite() {
  std::vector<ScenarioConfig> s{reference_route(Layers::Heterogeneous), reference_route(Layers::WlanOnly),
                                reference_route(Layers::UmtsOnly), load_ramp_scenario(), scan_scenario(150),
                                scan_scenario(500), crowded_cell(84)};
  for (double h : {0.0, 2.0, 4.0, 6.0, 8.0}) {
    auto c = two_cell_noisy(h);
    c.policy.dwell_ms = 1000;
    s.push_back(c);
    s.push_back(two_cell_noisy(h, 43));
  }
  auto scanned = reference_route(Layers::Heterogeneous);
  scanned.exec.scan.period_ms = 3000;
  s.push_back(scanned);
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 20; ++i) {
    auto c = random_scenario(rng);
    c.name = "random" + std::to_string(i);
    c.sim.seed = 100 + i;
    c.shadowing = {2.0, 4.0};
    c.policy.dwell_ms = 500 + 250 * (i % 4);
    s.push_back(c);
  }
  return s;
}

Outcome c1_planner_optimal() {
  Outcome o;
  std::mt19937_64 rng(99);
  int feasible = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int t = 0; t < 2000 && feasible < 150; ++t) {
    const auto c = random_scenario(rng, 8);
    const auto route = c.route();
    const auto iv = coverage_intervals(route, c.aps, c.obstacles, c.sim.step_m);
    std::optional<std::size_t> want;
    try {
      want = oracle_plan(iv, route.length(), c.sim.min_overlap_m);
    } catch (const CoverageGapError&) {
    }
    if (!want) continue;
    ++feasible;
    const auto p = plan(build_graph(iv, route.length(), c.sim.min_overlap_m));
    o.require(p.handover_count() + 1 == *want, "trial " + std::to_string(t) + " plan " +
                                                   std::to_string(p.handover_count()) + " vs oracle " +
                                                   std::to_string(*want - 1));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(feasible >= 100, "only " + std::to_string(feasible) + " feasible scenarios");
  o.require(secs < 10.0, "took " + std::to_string(secs) + " s");
  if (o.ok) o.detail = std::to_string(feasible) + " feasible, " + std::to_string(secs) + " s";
  return o;
}

Outcome c2_ping_pong() {
  Outcome o;
  std::size_t prev = std::numeric_limits<std::size_t>::max();
  std::string seen;
  for (double h : {0.0, 2.0, 4.0, 6.0, 8.0}) {
    const auto m = run(two_cell_noisy(h)).metrics;
    seen += std::to_string(m.ping_pong_count) + " ";
    if (h == 0.0) o.require(m.ping_pong_count >= 3, "hysteresis 0 ping-pong < 3");
    if (h == 6.0) {
      o.require(m.handoff_count() == 1, "hysteresis 6 handoffs " + std::to_string(m.handoff_count()));
      o.require(m.ping_pong_count == 0, "hysteresis 6 ping-pong nonzero");
    }
    o.require(m.ping_pong_count <= prev, "ping-pong increased at " + std::to_string(h));
    prev = m.ping_pong_count;
  }
  if (o.ok) o.detail = "ping-pong " + seen;
  return o;
}

Outcome c3_dwell() {
  Outcome o;
  std::size_t handoffs = 0;
  for (const auto& c : seeded_suite()) {
    const auto r = run(c);
    handoffs += r.metrics.handoff_count();
    const auto audit = audit_event_log(r.events, c.policy.dwell_ms);
    o.require(audit.ok(), c.name + ": " + (audit.ok() ? "" : audit.violations.front()));
  }
  if (o.ok) o.detail = std::to_string(handoffs) + " handoffs audited";
  return o;
}

Outcome c4_capacity() {
  Outcome o;
  NetworkState cell("umts", 85, 1e9);
  for (std::uint64_t i = 0; i < 85; ++i) o.require(admit(cell, {i, 12, false}).accepted, "early reject");
  const auto r = admit(cell, {85, 12, false});
  o.require(!r.accepted && r.reason == RejectReason::UserCapacity, "86th not rejected for UserCapacity");
  o.require(cell.attached_users() == 85, "attached users != 85");

  for (int users : {84, 85}) {
    auto c = crowded_cell(users);
    c.aps[0].capacity_users = 85;
    c.aps[0].capacity_bw_kbps = 1e6;
    const auto run_result = run(c);
    const auto& m = run_result.metrics;
    o.require(m.peak_attached_users.at("umts") <= 85, "peak users above 85");
    o.require(audit_capacity(c, m).ok(), "capacity audit failed");
    if (users == 85) {
      bool reject = false;
      for (const auto& e : run_result.events)
        reject |= e.type == EventType::AdmissionReject && e.reject == RejectReason::UserCapacity;
      o.require(reject, "terminal as 86th user not rejected");
      o.require(m.coverage_fraction == 0.0, "terminal attached over capacity");
    } else {
      o.require(m.coverage_fraction == 1.0, "85th user not admitted");
    }
  }
  return o;
}

Outcome c5_tunnel() {
  Outcome o;
  const auto g = tunnel_goodput(60, 180);
  o.require(g.fraction == 0.9, "fraction " + std::to_string(g.fraction));
  o.require(std::abs(g.on_wire_kbps - 66.67) <= 0.01, "wire rate " + std::to_string(g.on_wire_kbps));
  if (o.ok) o.detail = "0.9, " + fmt(g.on_wire_kbps, 4) + " kb/s";
  return o;
}

Outcome c6_scan_masking() {
  Outcome o;
  const auto big = run(scan_scenario(500));
  const auto scans = count(big.events, EventType::ScanEnd);
  o.require(scans >= 2, "too few scans");
  o.require(big.metrics.buffer_underruns == 0, "underruns with 500 ms buffer");
  for (const auto& e : big.events)
    if (e.type == EventType::ScanStart) {
      const auto end = std::find_if(big.events.begin(), big.events.end(), [&](const Event& x) {
        return x.type == EventType::ScanEnd && x.time_ms > e.time_ms;
      });
      if (end == big.events.end()) continue;  // cut off by the end of the route
      const double d = static_cast<double>(end->time_ms - e.time_ms);
      o.require(d >= 200 && d <= 400 + static_cast<double>(scan_scenario(500).sim.tick_ms), "scan length out of range");
    }
  // resume burst: the row after each scan end carries more than the stream rate
  const double steady = 60 * tunnel_goodput(60, 180).fraction;
  for (std::size_t i = 0; i + 1 < big.trace.size(); ++i)
    if (big.trace[i].event.find("SCAN_END") != std::string::npos)
      o.require(big.trace[i + 1].goodput_kbps > steady + 1e-9 || big.trace[i].goodput_kbps > steady + 1e-9,
                "no burst after scan end at t=" + fmt(big.trace[i].t_s));

  const auto small = run(scan_scenario(150));
  // completed scans only
  std::vector<std::int64_t> starts;
  for (const auto& e : small.events)
    if (e.type == EventType::ScanStart) starts.push_back(e.time_ms);
  if (count(small.events, EventType::ScanEnd) < starts.size()) starts.pop_back();
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const auto hi = k + 1 < starts.size() ? starts[k + 1] : std::numeric_limits<std::int64_t>::max();
    bool under = false;
    for (const auto& e : small.events)
      under |= e.type == EventType::Underrun && e.time_ms >= starts[k] && e.time_ms < hi;
    o.require(under, "scan " + std::to_string(k) + " without underrun at 150 ms");
  }
  if (o.ok)
    o.detail = std::to_string(scans) + " scans; underruns 0 at 500 ms, " +
               std::to_string(small.metrics.buffer_underruns) + " at 150 ms";
  return o;
}

Outcome c7_dominance() {
  Outcome o;
  const auto het = run(reference_route(Layers::Heterogeneous)).metrics;
  const auto w = run(reference_route(Layers::WlanOnly)).metrics;
  const auto u = run(reference_route(Layers::UmtsOnly)).metrics;
  o.require(het.coverage_fraction >= w.coverage_fraction && het.coverage_fraction >= u.coverage_fraction, "coverage");
  o.require(het.mean_goodput_kbps >= std::max(w.mean_goodput_kbps, u.mean_goodput_kbps), "goodput");
  o.require(het.total_outage_ms <= std::min(w.total_outage_ms, u.total_outage_ms), "outage");
  o.detail = "goodput het " + fmt(het.mean_goodput_kbps) + " wlan " + fmt(w.mean_goodput_kbps) + " umts " +
             fmt(u.mean_goodput_kbps);
  return o;
}

Outcome c8_load_trigger() {
  Outcome o;
  const auto c = load_ramp_scenario();
  const auto r = run(c);
  // Serving load = ramp share of capacity plus the terminal's own flow.
  const auto& w = *std::find_if(c.aps.begin(), c.aps.end(), [](const auto& a) { return a.id == "wlan"; });
  const auto& ramp = c.load_ramps.at("wlan");
  std::int64_t expect = -1;
  for (std::int64_t t = 0; expect < 0 && t < 100000; t += c.sim.tick_ms) {
    const double ts = static_cast<double>(t) / 1000.0;
    double share = ramp.back().load;
    for (std::size_t i = 1; i < ramp.size(); ++i)
      if (ts <= ramp[i].time_s) {
        const double f = (ts - ramp[i - 1].time_s) / (ramp[i].time_s - ramp[i - 1].time_s);
        share = ramp[i - 1].load + f * (ramp[i].load - ramp[i - 1].load);
        break;
      }
    const double load = std::min(1.0, share + c.service.required_bw_kbps / w.capacity_bw_kbps);
    if (load > c.policy.load_ceiling) expect = t;
  }
  std::vector<const Event*> hos;
  for (const auto& e : r.events)
    if (e.type == EventType::Handoff) hos.push_back(&e);
  o.require(hos.size() == 1, std::to_string(hos.size()) + " handoffs");
  if (hos.size() == 1) {
    o.require(hos[0]->reason == Reason::LoadTrigger, "reason not LoadTrigger");
    o.require(hos[0]->to == "umts" && hos[0]->kind == HandoffKind::Vertical, "not vertical to cellular");
    o.require(hos[0]->time_ms == expect,
              "at " + std::to_string(hos[0]->time_ms) + " ms, expected " + std::to_string(expect));
  }
  if (o.ok) o.detail = "handoff at " + std::to_string(expect) + " ms";
  return o;
}

Outcome c9_determinism() {
  Outcome o;
  for (const auto& c : seeded_suite()) o.require(csv(run(c)) == csv(run(c)), c.name + " not reproducible");
  for (std::uint64_t s : {1, 2, 3}) {
    const auto a = csv(run(two_cell_noisy(2, s)));
    const auto b = csv(run(two_cell_noisy(2, s + 100)));
    o.require(a != b, "seed change left trace unchanged");
  }
  return o;
}

Outcome c10_emergency() {
  Outcome o;
  ServiceClass svc;
  svc.emergency = true;
  svc.required_bw_kbps = 60;

  NetworkState target("t", 85, 2000);
  for (std::uint64_t i = 0; i < 20; ++i) target.attach_unchecked({i, 100, false});
  std::vector<NetworkState> ns{NetworkState("n", 30, 6000)};
  const double before_res = target.residual_bw_kbps();
  const int before_flows = target.attached_users() + ns[0].attached_users();
  o.require(request_emergency(svc, target, ns), "rebalance failed with spare neighbour");
  o.require(target.residual_bw_kbps() - before_res >= 60, "freed less than the deficit");
  o.require(target.attached_users() + ns[0].attached_users() == before_flows, "flows not conserved");
  o.require(admit(target, {999, 60, true}).accepted, "emergency admission failed");

  NetworkState t2("t", 85, 2000);
  for (std::uint64_t i = 0; i < 20; ++i) t2.attach_unchecked({i, 100, false});
  std::vector<NetworkState> full{NetworkState("n", 1, 6000)};
  full[0].attach_unchecked({50, 10, false});
  const auto t2_copy = t2;
  const auto full_copy = full;
  o.require(!request_emergency(svc, t2, full), "succeeded without spare neighbour");
  o.require(t2 == t2_copy && full == full_copy, "states changed on failure");
  std::vector<NetworkState> none;
  o.require(!request_emergency(svc, t2, none) && t2 == t2_copy, "no neighbours case");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"planner optimality", c1_planner_optimal},  {"ping-pong suppression", c2_ping_pong},
      {"dwell invariant", c3_dwell},               {"capacity enforcement", c4_capacity},
      {"tunnel overhead", c5_tunnel},              {"scan masking", c6_scan_masking},
      {"heterogeneous dominance", c7_dominance},   {"load-triggered handover", c8_load_trigger},
      {"determinism", c9_determinism},             {"emergency rebalancing", c10_emergency},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.ok;
    std::printf("%s %zu %s%s%s\n", o.ok ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.empty() ? "" : ": ",
                o.detail.c_str());
  }
  return failures;
}
