#pragma once

// Access network resource management: per-network load, admission control,
// abstracted load indicators, average traffic and emergency rebalancing.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <mutex>
#include <numeric>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hetsim {

struct Flow {
  std::uint64_t id{0};
  double bw_kbps{0.0};
  bool emergency{false};
  friend bool operator==(const Flow&, const Flow&) = default;
};

struct LoadSample {
  double time_s;
  double load;
  friend bool operator==(const LoadSample&, const LoadSample&) = default;
};

class NetworkState {
 public:
  static constexpr std::size_t kHistoryCapacity = 8192;

  NetworkState() = default;
  NetworkState(std::string ap_id, int capacity_users, double capacity_bw_kbps)
      : ap_id_(std::move(ap_id)), capacity_users_(capacity_users), capacity_bw_(capacity_bw_kbps) {
    if (capacity_users_ < 1) throw std::invalid_argument("capacity_users must be >= 1");
    if (!(capacity_bw_ > 0.0)) throw std::invalid_argument("capacity_bw must be > 0");
  }

  const std::string& ap_id() const { return ap_id_; }
  int capacity_users() const { return capacity_users_; }
  double capacity_bw_kbps() const { return capacity_bw_; }
  int attached_users() const { return static_cast<int>(flows_.size()); }
  const std::vector<Flow>& flows() const { return flows_; }

  // Aggregate traffic not tied to an attached user (scripted background load).
  double background_kbps() const { return background_kbps_; }
  void set_background_kbps(double kbps) { background_kbps_ = std::max(0.0, kbps); }

  double offered_load_kbps() const {
    double total = background_kbps_;
    for (const auto& f : flows_) total += f.bw_kbps;
    return total;
  }
  double residual_bw_kbps() const { return std::max(0.0, capacity_bw_ - offered_load_kbps()); }

  double load() const {
    const double users = static_cast<double>(attached_users()) / static_cast<double>(capacity_users_);
    const double bw = offered_load_kbps() / capacity_bw_;
    return std::clamp(std::max(users, bw), 0.0, 1.0);
  }

  bool has_flow(std::uint64_t id) const {
    return std::any_of(flows_.begin(), flows_.end(), [&](const Flow& f) { return f.id == id; });
  }

  // Callers go through admit(); this skips the capacity checks.
  void attach_unchecked(Flow f) { flows_.push_back(f); }

  bool release(std::uint64_t flow_id) {
    auto it = std::find_if(flows_.begin(), flows_.end(), [&](const Flow& f) { return f.id == flow_id; });
    if (it == flows_.end()) return false;
    flows_.erase(it);
    return true;
  }

  void record_load(double time_s) {
    if (history_.size() == kHistoryCapacity) history_.pop_front();
    history_.push_back({time_s, load()});
  }
  void record_load(double time_s, double load) {
    if (history_.size() == kHistoryCapacity) history_.pop_front();
    history_.push_back({time_s, load});
  }
  const std::deque<LoadSample>& load_history() const { return history_; }

  friend bool operator==(const NetworkState&, const NetworkState&) = default;

 private:
  std::string ap_id_;
  int capacity_users_{1};
  double capacity_bw_{1.0};
  double background_kbps_{0.0};
  std::vector<Flow> flows_;
  std::deque<LoadSample> history_;
};

enum class RejectReason { UserCapacity, Bandwidth };

inline std::string_view to_string(RejectReason r) {
  return r == RejectReason::UserCapacity ? "UserCapacity" : "Bandwidth";
}

struct AdmissionResult {
  bool accepted{false};
  RejectReason reason{RejectReason::UserCapacity};  // meaningful when rejected

  static AdmissionResult accept() { return {true, RejectReason::UserCapacity}; }
  static AdmissionResult reject(RejectReason r) { return {false, r}; }
  explicit operator bool() const { return accepted; }
};

inline AdmissionResult check_admission(const NetworkState& state, double required_bw_kbps) {
  if (state.attached_users() >= state.capacity_users()) return AdmissionResult::reject(RejectReason::UserCapacity);
  if (state.residual_bw_kbps() < required_bw_kbps) return AdmissionResult::reject(RejectReason::Bandwidth);
  return AdmissionResult::accept();
}

// Attaches the flow on success; the state is untouched on rejection.
inline AdmissionResult admit(NetworkState& state, const Flow& flow) {
  const auto r = check_admission(state, flow.bw_kbps);
  if (r) state.attach_unchecked(flow);
  return r;
}

enum class LoadLevel { Low, Medium, High, Critical };

inline std::string_view to_string(LoadLevel l) {
  switch (l) {
    case LoadLevel::Low: return "Low";
    case LoadLevel::Medium: return "Medium";
    case LoadLevel::High: return "High";
    case LoadLevel::Critical: return "Critical";
  }
  return "?";
}

struct LoadIndicator {
  double normalized{0.0};
  LoadLevel level{LoadLevel::Low};
};

inline LoadLevel quantize_load(double normalized) {
  if (normalized < 0.25) return LoadLevel::Low;
  if (normalized < 0.5) return LoadLevel::Medium;
  if (normalized < 0.9) return LoadLevel::High;
  return LoadLevel::Critical;
}

inline LoadIndicator load_indicator(const NetworkState& state) {
  const double n = state.load();
  return {n, quantize_load(n)};
}

struct AverageTraffic {
  double value{0.0};
  bool no_data{true};
};

// Time-weighted mean of the sampled load over the trailing window, treating
// each sample as holding until the next one.
inline AverageTraffic average_traffic(const NetworkState& state, double window_s) {
  if (!(window_s > 0.0)) throw std::invalid_argument("window must be > 0");
  const auto& h = state.load_history();
  if (h.empty()) return {0.0, true};
  if (h.size() == 1) return {h.front().load, false};
  const double t_end = h.back().time_s;
  const double t_begin = std::max(t_end - window_s, h.front().time_s);
  if (!(t_end > t_begin)) return {h.back().load, false};
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < h.size(); ++i) {
    const double a = std::max(h[i].time_s, t_begin);
    const double b = std::min(h[i + 1].time_s, t_end);
    if (b > a) area += h[i].load * (b - a);
  }
  return {area / (t_end - t_begin), false};
}

// Moves non-emergency flows off the target onto neighbours (neighbour with the
// most residual bandwidth first, largest flow first) until the target's
// residual bandwidth has grown by deficit_bw and it has a free user slot. All
// or nothing: on failure every state is left as it was.
inline bool rebalance_emergency(NetworkState& target, std::span<NetworkState> neighbors, double deficit_bw_kbps) {
  if (!(deficit_bw_kbps > 0.0)) throw std::invalid_argument("deficit_bw must be > 0");
  NetworkState t = target;
  std::vector<NetworkState> ns(neighbors.begin(), neighbors.end());
  const double goal = t.residual_bw_kbps() + deficit_bw_kbps;
  auto satisfied = [&] { return t.residual_bw_kbps() >= goal && t.attached_users() < t.capacity_users(); };

  while (!satisfied()) {
    std::vector<Flow> movable;
    for (const auto& f : t.flows())
      if (!f.emergency) movable.push_back(f);
    std::stable_sort(movable.begin(), movable.end(), [](const Flow& a, const Flow& b) {
      if (a.bw_kbps != b.bw_kbps) return a.bw_kbps > b.bw_kbps;
      return a.id < b.id;
    });
    bool moved = false;
    for (const auto& f : movable) {
      NetworkState* dest = nullptr;
      for (auto& n : ns) {
        if (!check_admission(n, f.bw_kbps)) continue;
        if (!dest || n.residual_bw_kbps() > dest->residual_bw_kbps()) dest = &n;
      }
      if (!dest) continue;
      t.release(f.id);
      dest->attach_unchecked(f);
      moved = true;
      break;
    }
    if (!moved) return false;
  }
  target = std::move(t);
  std::copy(ns.begin(), ns.end(), neighbors.begin());
  return true;
}

// NetworkState shared between concurrent readers and a single writer. Readers
// always observe a whole pre- or post-update state.
class GuardedNetworkState {
 public:
  explicit GuardedNetworkState(NetworkState s) : state_(std::move(s)) {}

  AdmissionResult admit(const Flow& flow) {
    std::unique_lock lock(mu_);
    return hetsim::admit(state_, flow);
  }
  bool release(std::uint64_t flow_id) {
    std::unique_lock lock(mu_);
    return state_.release(flow_id);
  }
  NetworkState snapshot() const {
    std::shared_lock lock(mu_);
    return state_;
  }
  LoadIndicator indicator() const {
    std::shared_lock lock(mu_);
    return load_indicator(state_);
  }

 private:
  mutable std::shared_mutex mu_;
  NetworkState state_;
};

}  // namespace hetsim
