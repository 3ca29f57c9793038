#pragma once

// Output files: per-tick trace CSV, plain and key-value summaries, sweep and
// comparison tables. Numbers go through snprintf so output is byte-stable.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <string>
#include <system_error>
#include <vector>

#include "hetsim/sim.hpp"

namespace hetsim {

inline constexpr int kOutputFormatVersion = 1;

inline std::string fmt(double v, int decimals = 3) {
  if (std::isnan(v)) return {};
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  if (s == "-0" || s.find_first_not_of("-0.") == std::string::npos) s = s.substr(s[0] == '-' ? 1 : 0);
  return s;
}

inline void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
  os << "# format_version=" << kOutputFormatVersion << '\n';
  os << "t_s,s_m,x_m,y_m,attached_ap,tech,rss_dbm,goodput_kbps,buffer_ms,load,event\n";
  for (const auto& r : trace) {
    os << fmt(r.t_s) << ',' << fmt(r.s_m) << ',' << fmt(r.x_m) << ',' << fmt(r.y_m) << ',' << r.attached_ap << ','
       << r.tech << ',' << fmt(r.rss_dbm, 2) << ',' << fmt(r.goodput_kbps) << ',' << fmt(r.buffer_ms, 1) << ','
       << fmt(r.load, 4) << ',' << r.event << '\n';
  }
}

// (key, value) pairs in a fixed order; shared by both summary forms.
inline std::vector<std::pair<std::string, std::string>> summary_fields(const MetricsReport& m) {
  std::vector<std::pair<std::string, std::string>> f{
      {"mean_goodput_kbps", fmt(m.mean_goodput_kbps)},
      {"peak_goodput_kbps", fmt(m.peak_goodput_kbps)},
      {"handoffs_horizontal", std::to_string(m.handoffs_horizontal)},
      {"handoffs_vertical", std::to_string(m.handoffs_vertical)},
      {"handoff_count", std::to_string(m.handoff_count())},
      {"ping_pong_count", std::to_string(m.ping_pong_count)},
      {"total_outage_ms", fmt(m.total_outage_ms, 1)},
      {"total_scan_interruption_ms", fmt(m.total_scan_interruption_ms, 1)},
      {"total_exec_interruption_ms", fmt(m.total_exec_interruption_ms, 1)},
      {"buffer_underruns", std::to_string(m.buffer_underruns)},
      {"coverage_fraction", fmt(m.coverage_fraction, 6)},
      {"ticks", std::to_string(m.ticks)},
      {"admission_rejects", std::to_string(m.admission_rejects)},
      {"emergency_rebalances", std::to_string(m.emergency_rebalances)},
      {"media_generated_ms", fmt(m.media_generated_ms, 1)},
      {"media_sent_ms", fmt(m.media_sent_ms, 1)},
      {"media_discarded_ms", fmt(m.media_discarded_ms, 1)},
      {"mean_downlink_latency_ms", fmt(m.mean_downlink_latency_ms, 2)},
  };
  std::string delays;
  for (std::size_t i = 0; i < m.handoff_delays_ms.size(); ++i) delays += (i ? " " : "") + fmt(m.handoff_delays_ms[i], 1);
  f.emplace_back("handoff_delays_ms", delays);
  for (const auto& [ap, n] : m.peak_attached_users) f.emplace_back("peak_users." + ap, std::to_string(n));
  for (const auto& [ap, v] : m.average_traffic) f.emplace_back("average_load." + ap, fmt(v, 4));
  return f;
}

inline void write_summary_kv(std::ostream& os, const std::string& name, const MetricsReport& m) {
  os << "format_version=" << kOutputFormatVersion << '\n';
  os << "scenario=" << name << '\n';
  for (const auto& [k, v] : summary_fields(m)) os << k << '=' << v << '\n';
}

inline void write_summary_text(std::ostream& os, const std::string& name, const MetricsReport& m) {
  os << "# format_version=" << kOutputFormatVersion << '\n';
  os << "scenario " << name << '\n';
  for (const auto& [k, v] : summary_fields(m)) {
    std::string label = k;
    label.resize(std::max<std::size_t>(label.size(), 28), ' ');
    os << "  " << label << ' ' << v << '\n';
  }
}

inline std::string metrics_csv_header() {
  return "mean_goodput_kbps,peak_goodput_kbps,handoffs_horizontal,handoffs_vertical,ping_pong_count,"
         "total_outage_ms,total_scan_interruption_ms,buffer_underruns,coverage_fraction,admission_rejects";
}

inline std::string metrics_csv_row(const MetricsReport& m) {
  return fmt(m.mean_goodput_kbps) + ',' + fmt(m.peak_goodput_kbps) + ',' + std::to_string(m.handoffs_horizontal) + ',' +
         std::to_string(m.handoffs_vertical) + ',' + std::to_string(m.ping_pong_count) + ',' + fmt(m.total_outage_ms, 1) +
         ',' + fmt(m.total_scan_interruption_ms, 1) + ',' + std::to_string(m.buffer_underruns) + ',' +
         fmt(m.coverage_fraction, 6) + ',' + std::to_string(m.admission_rejects);
}

struct SweepRow {
  std::string value;
  MetricsReport metrics;
};

inline void write_sweep_csv(std::ostream& os, const std::string& key, const std::vector<SweepRow>& rows) {
  os << "# format_version=" << kOutputFormatVersion << '\n';
  os << key << ',' << metrics_csv_header() << '\n';
  for (const auto& r : rows) os << r.value << ',' << metrics_csv_row(r.metrics) << '\n';
}

inline void write_comparison_csv(std::ostream& os, const ComparisonTable& t) {
  os << "# format_version=" << kOutputFormatVersion << '\n';
  os << "scenario," << metrics_csv_header() << '\n';
  for (const auto& r : t.rows) os << r.name << ',' << metrics_csv_row(r.metrics) << '\n';
}

// Writes to a sibling temp file and renames it over the target, so readers
// see either the old file or the complete new one.
template <typename Writer>
void write_atomically(const std::filesystem::path& target, Writer&& writer) {
  namespace fs = std::filesystem;
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  std::random_device rd;
  const auto tmp = target.parent_path() / (target.filename().string() + ".tmp" + std::to_string(rd()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    try {
      writer(out);
      out.flush();
      if (!out) throw std::runtime_error("write failed for " + target.string());
    } catch (...) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw;
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("cannot rename into " + target.string());
  }
}

}  // namespace hetsim
