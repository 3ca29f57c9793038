#pragma once

// Handoff execution and Mobile IP cost model: execution delay, tunnelling
// overhead, triangular routing, scanning interruptions and the receive buffer.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

#include "hetsim/environment.hpp"

namespace hetsim {

// IP-in-IP encapsulation header added to every tunnelled packet.
inline constexpr double kTunnelOverheadBytes = 20.0;

struct ExecLatencyModel {
  std::array<double, 3> l2_attach_ms{20.0, 20.0, 20.0};  // indexed by Tech
  double coa_config_ms{30.0};
  double ha_registration_rtt_ms{100.0};
  // Horizontal handoffs between APs of one provider stay in one subnet and
  // skip care-of address configuration and home agent registration.
  bool horizontal_same_subnet{true};

  double l2_attach(Tech t) const { return l2_attach_ms[static_cast<std::size_t>(t)]; }
  double& l2_attach(Tech t) { return l2_attach_ms[static_cast<std::size_t>(t)]; }
};

inline std::string check_exec_model(const ExecLatencyModel& m) {
  for (double v : m.l2_attach_ms)
    if (!(v >= 0.0)) return "l2_attach >= 0";
  if (!(m.coa_config_ms >= 0.0)) return "coa_config >= 0";
  if (!(m.ha_registration_rtt_ms >= 0.0)) return "ha_registration_rtt >= 0";
  return {};
}

inline double execution_delay(const ExecLatencyModel& model, Tech from, Tech to, bool same_subnet = false) {
  const double l2 = model.l2_attach(to);
  if (from == to && same_subnet && model.horizontal_same_subnet) return l2;
  return l2 + model.coa_config_ms + model.ha_registration_rtt_ms;
}

struct TunnelGoodput {
  double fraction;       // payload / (payload + overhead)
  double on_wire_kbps;   // rate needed on the wire for the application rate
};

inline TunnelGoodput tunnel_goodput(double app_rate_kbps, double payload_bytes) {
  if (!(payload_bytes > 0.0)) throw std::invalid_argument("payload must be > 0");
  const double fraction = payload_bytes / (payload_bytes + kTunnelOverheadBytes);
  return {fraction, app_rate_kbps / fraction};
}

struct TriangularDelay {
  double downlink_ms;
  double uplink_ms;
  double asymmetry_ms;
};

// Downlink detours through the home agent; uplink goes straight to the
// correspondent host.
inline TriangularDelay triangular_delay(double ch_to_ha_ms, double ha_to_mh_ms, double mh_to_ch_ms) {
  if (!(ch_to_ha_ms >= 0.0 && ha_to_mh_ms >= 0.0 && mh_to_ch_ms >= 0.0))
    throw std::invalid_argument("path delays must be >= 0");
  const double down = ch_to_ha_ms + ha_to_mh_ms;
  return {down, mh_to_ch_ms, down - mh_to_ch_ms};
}

struct BufferState {
  double occupancy_ms{0.0};
  double target_ms{0.0};
  double playout_rate_kbps{0.0};
  std::uint64_t underruns{0};
  bool playing{false};          // false while prebuffering up to target
  double max_speedup{0.25};     // extra playout fraction allowed above target
  double media_in_ms{0.0};
  double media_played_ms{0.0};

  double latency_ms() const { return target_ms; }
};

struct BufferStepResult {
  double played_ms{0.0};
  bool underrun{false};
};

// One playout tick. Arrivals are added first; playout then consumes one tick
// of media (more when the buffer sits above its target, bounded by
// max_speedup). An underrun is a playout tick that finds less than one tick of
// media.
inline BufferStepResult buffer_step(BufferState& b, double arrived_ms, double tick_ms) {
  if (!(tick_ms > 0.0)) throw std::invalid_argument("tick must be > 0");
  if (!(arrived_ms >= 0.0)) throw std::invalid_argument("arrivals must be >= 0");
  b.occupancy_ms += arrived_ms;
  b.media_in_ms += arrived_ms;
  BufferStepResult r;
  if (!b.playing) {
    if (b.occupancy_ms < b.target_ms) return r;
    b.playing = true;
  }
  if (b.occupancy_ms < tick_ms) {
    r.underrun = true;
    ++b.underruns;
  }
  double want = tick_ms;
  if (b.occupancy_ms - tick_ms > b.target_ms)
    want += std::min(b.occupancy_ms - tick_ms - b.target_ms, b.max_speedup * tick_ms);
  r.played_ms = std::min(b.occupancy_ms, want);
  b.occupancy_ms -= r.played_ms;
  b.media_played_ms += r.played_ms;
  return r;
}

// Adaptive target: 1.25x the largest interruption seen so far, clamped.
inline double adaptive_buffer_target(double largest_interruption_ms) {
  return std::clamp(1.25 * largest_interruption_ms, 100.0, 1000.0);
}

struct BurstProfile {
  double queued_ms{0.0};
  double multiplier{1.0};
  double duration_ms{0.0};   // nominal time until the sender queue is empty
  double peak_rate_factor{1.0};
  bool empty() const { return queued_ms <= 0.0; }
};

// Queue accumulated during an interruption drains at multiplier x nominal while
// new media keeps arriving at nominal rate.
inline BurstProfile resume_burst(double queued_ms, double drain_rate_multiplier) {
  if (!(drain_rate_multiplier > 1.0)) throw std::invalid_argument("drain multiplier must be > 1");
  if (!(queued_ms > 0.0)) return {0.0, drain_rate_multiplier, 0.0, 1.0};
  if (std::isinf(drain_rate_multiplier)) return {queued_ms, drain_rate_multiplier, 0.0, drain_rate_multiplier};
  return {queued_ms, drain_rate_multiplier, queued_ms / (drain_rate_multiplier - 1.0), drain_rate_multiplier};
}

struct ScanSchedule {
  double period_ms{0.0};  // 0 disables periodic scanning
  double min_duration_ms{200.0};
  double max_duration_ms{400.0};
  bool interrupts_traffic{true};

  bool enabled() const { return period_ms > 0.0; }
};

inline std::string check_scan_schedule(const ScanSchedule& s) {
  if (!(s.period_ms >= 0.0)) return "scan period >= 0";
  if (!(s.min_duration_ms > 0.0)) return "scan min duration > 0";
  if (!(s.max_duration_ms >= s.min_duration_ms)) return "scan max duration >= min duration";
  if (s.enabled() && !(s.period_ms > s.max_duration_ms)) return "scan period > max scan duration";
  return {};
}

// Uniform scan durations in [min, max], drawn from a seeded engine.
class ScanDurationSource {
 public:
  ScanDurationSource(const ScanSchedule& schedule, std::uint64_t seed)
      : lo_(schedule.min_duration_ms), hi_(schedule.max_duration_ms), engine_(seed) {}

  double draw() {
    constexpr double scale = 1.0 / 9007199254740992.0;
    const double u = static_cast<double>(engine_() >> 11) * scale;
    return std::min(hi_, lo_ + u * (hi_ - lo_));
  }

 private:
  double lo_;
  double hi_;
  std::mt19937_64 engine_;
};

}  // namespace hetsim
