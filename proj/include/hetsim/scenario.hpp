#pragma once

// Scenario file reader. Grammar (one construct per line):
//
//   # comment            full-line comment; also "; comment"
//   key = value          trailing " # ..." is stripped
//   [section]            starts a section; [aps] and [obstacles] may repeat
//
// Top-level keys (before any section): format_version, name.
// Overrides use dotted keys: "policy.hysteresis=6", "aps.<id>.tx_power=25",
// "load.<id>=0.4". They are applied to the parsed text, so they go through the
// same type checks as the file.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hetsim/environment.hpp"
#include "hetsim/handoff.hpp"
#include "hetsim/sim.hpp"

namespace hetsim {

inline constexpr int kFormatVersion = 1;

enum class ErrorKind { Usage = 1, MissingFile = 2, Syntax = 3, Semantic = 4, Runtime = 5 };

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(ErrorKind kind, const std::string& msg, int line = 0, int column = 0)
      : std::runtime_error(msg), kind_(kind), line_(line), column_(column) {}
  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  ErrorKind kind_;
  int line_;
  int column_;
};

enum class FieldType { Number, Integer, Bool, Text, Points, Point, Tech, Strategy, ServiceKind, Ramp };

inline bool is_numeric(FieldType t) { return t == FieldType::Number || t == FieldType::Integer; }

struct RawEntry {
  std::string key;
  std::string value;
  int line{0};
  int column{0};  // column of the value
};

struct RawSection {
  std::string name;  // "" for the top level
  int line{0};
  std::vector<RawEntry> entries;

  RawEntry* find(std::string_view key) {
    for (auto& e : entries)
      if (e.key == key) return &e;
    return nullptr;
  }
  const RawEntry* find(std::string_view key) const { return const_cast<RawSection*>(this)->find(key); }
};

struct RawDocument {
  std::vector<RawSection> sections;  // sections[0] is the top level
};

namespace detail {

using Schema = std::map<std::string, std::map<std::string, FieldType>>;

inline const Schema& schema() {
  using F = FieldType;
  static const Schema s{
      {"", {{"format_version", F::Integer}, {"name", F::Text}}},
      {"environment",
       {{"route", F::Points},
        {"speed", F::Number},
        {"step", F::Number},
        {"min_overlap", F::Number},
        {"shadowing_sigma", F::Number},
        {"shadowing_clip", F::Number}}},
      {"aps",
       {{"id", F::Text},
        {"tech", F::Tech},
        {"position", F::Point},
        {"tx_power", F::Number},
        {"path_loss_exponent", F::Number},
        {"ref_loss", F::Number},
        {"sensitivity", F::Number},
        {"capacity_users", F::Integer},
        {"capacity_bw", F::Number},
        {"rate_cap", F::Number},
        {"base_latency", F::Number},
        {"provider", F::Text}}},
      {"obstacles", {{"segment", F::Points}, {"polygon", F::Points}, {"loss", F::Number}}},
      {"policy",
       {{"threshold_wlan", F::Number},
        {"threshold_umts", F::Number},
        {"threshold_wimax", F::Number},
        {"hysteresis", F::Number},
        {"dwell", F::Number},
        {"beacons_realtime", F::Integer},
        {"beacons_nonrealtime", F::Integer},
        {"strategy", F::Strategy},
        {"load_ceiling", F::Number}}},
      {"service",
       {{"kind", F::ServiceKind},
        {"required_bw", F::Number},
        {"emergency", F::Bool},
        {"app_rate", F::Number},
        {"payload", F::Number}}},
      {"exec",
       {{"l2_attach_wlan", F::Number},
        {"l2_attach_umts", F::Number},
        {"l2_attach_wimax", F::Number},
        {"coa_config", F::Number},
        {"ha_registration_rtt", F::Number},
        {"horizontal_same_subnet", F::Bool},
        {"scan_period", F::Number},
        {"scan_min", F::Number},
        {"scan_max", F::Number},
        {"scan_interrupts", F::Bool},
        {"multi_interface", F::Bool},
        {"buffer_target", F::Number},
        {"adaptive_buffer", F::Bool},
        {"burst_multiplier", F::Number},
        {"max_queue", F::Number},
        {"ch_to_ha", F::Number},
        {"mh_to_ch", F::Number}}},
      // keys of these three are AP ids
      {"load", {}},
      {"load_ramp", {}},
      {"users", {}},
      {"sim",
       {{"tick", F::Integer},
        {"seed", F::Integer},
        {"duration", F::Number},
        {"sample_interval", F::Integer},
        {"ping_pong_window", F::Number},
        {"background_user_kbps", F::Number}}},
  };
  return s;
}

inline bool keyed_by_ap(std::string_view section) {
  return section == "load" || section == "load_ramp" || section == "users";
}

inline FieldType ap_keyed_type(std::string_view section) {
  if (section == "load") return FieldType::Number;
  if (section == "users") return FieldType::Integer;
  return FieldType::Ramp;
}

inline bool repeatable(std::string_view section) { return section == "aps" || section == "obstacles"; }

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::string nearest(std::string_view word, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = std::numeric_limits<std::size_t>::max();
  for (const auto& c : candidates) {
    const auto d = edit_distance(word, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (best_d > std::max<std::size_t>(2, word.size() / 3)) return {};
  return best;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] inline void semantic(const std::string& msg, int line = 0) {
  throw ScenarioError(ErrorKind::Semantic, line ? "line " + std::to_string(line) + ": " + msg : msg, line);
}

inline double to_number(const RawEntry& e, const std::string& field) {
  double v = 0.0;
  const auto* b = e.value.data();
  const auto* end = b + e.value.size();
  auto [p, ec] = std::from_chars(b, end, v);
  if (ec != std::errc{} || p != end || !std::isfinite(v)) semantic(field + ": expected a number, got '" + e.value + "'", e.line);
  return v;
}

inline long long to_integer(const RawEntry& e, const std::string& field) {
  long long v = 0;
  const auto* b = e.value.data();
  const auto* end = b + e.value.size();
  auto [p, ec] = std::from_chars(b, end, v);
  if (ec != std::errc{} || p != end) semantic(field + ": expected an integer, got '" + e.value + "'", e.line);
  return v;
}

inline bool to_bool(const RawEntry& e, const std::string& field) {
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  semantic(field + ": expected true or false, got '" + e.value + "'", e.line);
}

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline Point to_point_text(std::string_view tok, const RawEntry& e, const std::string& field) {
  const auto comma = tok.find(',');
  if (comma == std::string_view::npos) semantic(field + ": expected x,y, got '" + std::string(tok) + "'", e.line);
  RawEntry xe{e.key, std::string(tok.substr(0, comma)), e.line, e.column};
  RawEntry ye{e.key, std::string(tok.substr(comma + 1)), e.line, e.column};
  return {to_number(xe, field), to_number(ye, field)};
}

inline std::vector<Point> to_points(const RawEntry& e, const std::string& field) {
  std::vector<Point> pts;
  for (const auto& tok : split_ws(e.value)) pts.push_back(to_point_text(tok, e, field));
  if (pts.empty()) semantic(field + ": expected a list of x,y points", e.line);
  return pts;
}

inline std::vector<LoadRampPoint> to_ramp(const RawEntry& e, const std::string& field) {
  std::vector<LoadRampPoint> ramp;
  for (const auto& tok : split_ws(e.value)) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos) semantic(field + ": expected time:load pairs, got '" + tok + "'", e.line);
    RawEntry te{e.key, tok.substr(0, colon), e.line, e.column};
    RawEntry le{e.key, tok.substr(colon + 1), e.line, e.column};
    ramp.push_back({to_number(te, field), to_number(le, field)});
  }
  return ramp;
}

// Checks a value against its declared type without building anything.
inline void check_type(FieldType t, const RawEntry& e, const std::string& field) {
  switch (t) {
    case FieldType::Number: to_number(e, field); break;
    case FieldType::Integer: to_integer(e, field); break;
    case FieldType::Bool: to_bool(e, field); break;
    case FieldType::Text:
      if (e.value.empty()) semantic(field + ": must be non-empty", e.line);
      break;
    case FieldType::Points: to_points(e, field); break;
    case FieldType::Point: {
      auto pts = to_points(e, field);
      if (pts.size() != 1) semantic(field + ": expected a single x,y point", e.line);
      break;
    }
    case FieldType::Tech:
      if (!tech_from_string(e.value)) semantic(field + ": expected WLAN, UMTS or WIMAX, got '" + e.value + "'", e.line);
      break;
    case FieldType::Strategy:
      if (!strategy_from_string(e.value)) semantic(field + ": expected MCHO, NCHO or MAHO, got '" + e.value + "'", e.line);
      break;
    case FieldType::ServiceKind:
      if (e.value != "RealTime" && e.value != "NonRealTime")
        semantic(field + ": expected RealTime or NonRealTime, got '" + e.value + "'", e.line);
      break;
    case FieldType::Ramp: to_ramp(e, field); break;
  }
}

inline std::vector<std::string> section_names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : schema())
    if (!name.empty()) out.push_back(name);
  return out;
}

inline std::vector<std::string> keys_of(const std::string& section) {
  std::vector<std::string> out;
  for (const auto& [k, _] : schema().at(section)) out.push_back(k);
  return out;
}

inline std::string qualified(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

}  // namespace detail

inline RawDocument parse_document(std::istream& in) {
  RawDocument doc;
  doc.sections.push_back({"", 0, {}});
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#' || line[first] == ';') continue;
    if (line[first] == '[') {
      const auto close = line.find(']', first);
      if (close == std::string::npos)
        throw ScenarioError(ErrorKind::Syntax,
                            "line " + std::to_string(lineno) + ", column " + std::to_string(line.size() + 1) +
                                ": expected ']' to close section header",
                            lineno, static_cast<int>(line.size() + 1));
      const auto rest = line.find_first_not_of(" \t", close + 1);
      if (rest != std::string::npos && line[rest] != '#')
        throw ScenarioError(ErrorKind::Syntax,
                            "line " + std::to_string(lineno) + ", column " + std::to_string(rest + 1) +
                                ": unexpected text after section header",
                            lineno, static_cast<int>(rest + 1));
      auto name = detail::trim(std::string_view(line).substr(first + 1, close - first - 1));
      if (name.empty())
        throw ScenarioError(ErrorKind::Syntax, "line " + std::to_string(lineno) + ", column " + std::to_string(first + 2) +
                                                   ": empty section name",
                            lineno, static_cast<int>(first + 2));
      doc.sections.push_back({std::move(name), lineno, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ScenarioError(ErrorKind::Syntax,
                          "line " + std::to_string(lineno) + ", column " + std::to_string(line.size() + 1) +
                              ": expected '=' after key",
                          lineno, static_cast<int>(line.size() + 1));
    auto key = detail::trim(std::string_view(line).substr(0, eq));
    for (std::size_t i = 0; i < key.size(); ++i) {
      const char ch = key[i];
      if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.')) {
        const int col = static_cast<int>(first + i + 1);
        throw ScenarioError(ErrorKind::Syntax,
                            "line " + std::to_string(lineno) + ", column " + std::to_string(col) +
                                ": invalid character in key",
                            lineno, col);
      }
    }
    if (key.empty())
      throw ScenarioError(ErrorKind::Syntax, "line " + std::to_string(lineno) + ", column " + std::to_string(first + 1) +
                                                 ": missing key before '='",
                          lineno, static_cast<int>(first + 1));
    std::string value = line.substr(eq + 1);
    if (auto hash = value.find(" #"); hash != std::string::npos) value.erase(hash);
    if (auto hash = value.find("\t#"); hash != std::string::npos) value.erase(hash);
    const auto vstart = line.find_first_not_of(" \t", eq + 1);
    const int col = static_cast<int>(vstart == std::string::npos ? eq + 2 : vstart + 1);
    doc.sections.back().entries.push_back({std::move(key), detail::trim(value), lineno, col});
  }
  return doc;
}

inline std::string suggest_override(std::string_view dotted) {
  std::vector<std::string> all;
  for (const auto& [section, keys] : detail::schema())
    for (const auto& [k, _] : keys) all.push_back(detail::qualified(section, k));
  return detail::nearest(dotted, all);
}

// Unknown sections/keys, duplicates and value types. Cross-field constraints
// are left to validate_scenario.
inline void check_document(const RawDocument& doc) {
  const auto& schema = detail::schema();
  std::map<std::string, int> seen;
  for (const auto& sec : doc.sections) {
    auto it = schema.find(sec.name);
    if (it == schema.end()) {
      std::string msg = "unknown section [" + sec.name + "]";
      if (auto s = detail::nearest(sec.name, detail::section_names()); !s.empty()) msg += "; did you mean [" + s + "]?";
      detail::semantic(msg, sec.line);
    }
    if (!sec.name.empty() && !detail::repeatable(sec.name) && seen[sec.name]++)
      detail::semantic("section [" + sec.name + "] appears more than once", sec.line);
    std::map<std::string, int> keys;
    for (const auto& e : sec.entries) {
      const auto field = detail::qualified(sec.name, e.key);
      if (keys[e.key]++) detail::semantic("duplicate key " + field, e.line);
      if (detail::keyed_by_ap(sec.name)) {
        detail::check_type(detail::ap_keyed_type(sec.name), e, field);
        continue;
      }
      auto k = it->second.find(e.key);
      if (k == it->second.end()) {
        std::string msg = "unknown key " + field;
        auto s = sec.name.empty() && e.key.find('.') != std::string::npos ? suggest_override(e.key)
                                                                         : detail::nearest(e.key, detail::keys_of(sec.name));
        if (!s.empty()) msg += "; did you mean " + (s.find('.') != std::string::npos ? s : detail::qualified(sec.name, s)) + "?";
        detail::semantic(msg, e.line);
      }
      detail::check_type(k->second, e, field);
    }
  }
}

// Type of an override key, or nullopt when it names nothing.
inline std::optional<FieldType> override_type(const RawDocument& doc, std::string_view dotted) {
  const auto dot = dotted.find('.');
  if (dot == std::string_view::npos) {
    auto& top = detail::schema().at("");
    if (auto it = top.find(std::string(dotted)); it != top.end()) return it->second;
    return std::nullopt;
  }
  const std::string section(dotted.substr(0, dot));
  std::string key(dotted.substr(dot + 1));
  auto sit = detail::schema().find(section);
  if (sit == detail::schema().end()) return std::nullopt;
  if (detail::keyed_by_ap(section)) return detail::ap_keyed_type(section);
  if (section == "aps") {
    const auto dot2 = key.find('.');
    if (dot2 == std::string::npos) return std::nullopt;
    key = key.substr(dot2 + 1);
  } else if (section == "obstacles") {
    return std::nullopt;
  }
  (void)doc;
  if (auto it = sit->second.find(key); it != sit->second.end()) return it->second;
  return std::nullopt;
}


// "section.key=value"; repeated sections are addressed as aps.<id>.<key>.
inline void apply_override(RawDocument& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ScenarioError(ErrorKind::Usage, "override '" + std::string(assignment) + "' is not key=value");
  const auto dotted = detail::trim(assignment.substr(0, eq));
  const auto value = detail::trim(assignment.substr(eq + 1));
  const auto type = override_type(doc, dotted);
  if (!type) {
    std::string msg = "unknown override key " + dotted;
    if (auto s = suggest_override(dotted); !s.empty()) msg += "; did you mean " + s + "?";
    throw ScenarioError(ErrorKind::Semantic, msg);
  }
  detail::check_type(*type, RawEntry{dotted, value, 0, 0}, dotted);

  const auto dot = dotted.find('.');
  RawSection* target = nullptr;
  std::string key;
  if (dot == std::string::npos) {
    target = &doc.sections.front();
    key = dotted;
  } else {
    const auto section = dotted.substr(0, dot);
    key = dotted.substr(dot + 1);
    if (section == "aps") {
      const auto dot2 = key.find('.');
      const auto id = key.substr(0, dot2);
      key = key.substr(dot2 + 1);
      for (auto& s : doc.sections) {
        if (s.name != "aps") continue;
        const auto* e = s.find("id");
        if (e && e->value == id) target = &s;
      }
      if (!target) throw ScenarioError(ErrorKind::Semantic, "override " + dotted + ": no access point with id '" + id + "'");
    } else {
      for (auto& s : doc.sections)
        if (s.name == section) target = &s;
      if (!target) {
        doc.sections.push_back({section, 0, {}});
        target = &doc.sections.back();
      }
    }
  }
  if (auto* e = target->find(key)) e->value = value;
  else target->entries.push_back({key, value, 0, 0});
}

// Builds the scenario from a checked document and validates it.
inline ScenarioConfig build_scenario(const RawDocument& doc) {
  check_document(doc);
  using namespace detail;
  ScenarioConfig c;
  bool have_route = false;

  const auto& top = doc.sections.front();
  if (const auto* e = top.find("format_version")) {
    if (to_integer(*e, "format_version") != kFormatVersion)
      semantic("format_version: only version " + std::to_string(kFormatVersion) + " is supported", e->line);
  }
  if (const auto* e = top.find("name")) c.name = e->value;

  auto num = [](const RawSection& s, const char* key, double& out) {
    if (const auto* e = s.find(key)) out = to_number(*e, qualified(s.name, key));
  };
  auto integer = [](const RawSection& s, const char* key, auto& out) {
    if (const auto* e = s.find(key)) out = static_cast<std::remove_reference_t<decltype(out)>>(to_integer(*e, qualified(s.name, key)));
  };
  auto boolean = [](const RawSection& s, const char* key, bool& out) {
    if (const auto* e = s.find(key)) out = to_bool(*e, qualified(s.name, key));
  };

  for (const auto& s : doc.sections) {
    if (s.name == "environment") {
      if (const auto* e = s.find("route")) {
        c.waypoints = to_points(*e, "environment.route");
        have_route = true;
      }
      num(s, "speed", c.speed_mps);
      num(s, "step", c.sim.step_m);
      num(s, "min_overlap", c.sim.min_overlap_m);
      num(s, "shadowing_sigma", c.shadowing.sigma_db);
      num(s, "shadowing_clip", c.shadowing.clip_db);
    } else if (s.name == "aps") {
      const auto* id = s.find("id");
      const auto* tech = s.find("tech");
      const auto* pos = s.find("position");
      const std::string where = "[aps] at line " + std::to_string(s.line);
      if (!id) semantic("aps.id: required in " + where, s.line);
      if (!tech) semantic("aps." + id->value + ".tech: required", s.line);
      if (!pos) semantic("aps." + id->value + ".position: required", s.line);
      auto ap = AccessPoint::with_defaults(id->value, *tech_from_string(tech->value), to_points(*pos, "aps.position").front());
      num(s, "tx_power", ap.tx_power_dbm);
      num(s, "path_loss_exponent", ap.path_loss_exponent);
      num(s, "ref_loss", ap.ref_loss_db);
      num(s, "sensitivity", ap.sensitivity_dbm);
      integer(s, "capacity_users", ap.capacity_users);
      num(s, "capacity_bw", ap.capacity_bw_kbps);
      num(s, "rate_cap", ap.rate_cap_kbps);
      num(s, "base_latency", ap.base_latency_ms);
      if (const auto* e = s.find("provider")) ap.provider = e->value;
      c.aps.push_back(std::move(ap));
    } else if (s.name == "obstacles") {
      const auto* seg = s.find("segment");
      const auto* poly = s.find("polygon");
      if (!!seg == !!poly) semantic("obstacles: exactly one of segment or polygon", s.line);
      Obstacle o;
      num(s, "loss", o.penetration_loss_db);
      if (seg) {
        auto pts = to_points(*seg, "obstacles.segment");
        if (pts.size() != 2) semantic("obstacles.segment: expected exactly 2 points", seg->line);
        o.geometry = Segment{pts[0], pts[1]};
      } else {
        o.geometry = Polygon{to_points(*poly, "obstacles.polygon")};
      }
      c.obstacles.push_back(std::move(o));
    } else if (s.name == "policy") {
      num(s, "threshold_wlan", c.policy.threshold(Tech::WLAN));
      num(s, "threshold_umts", c.policy.threshold(Tech::UMTS));
      num(s, "threshold_wimax", c.policy.threshold(Tech::WIMAX));
      num(s, "hysteresis", c.policy.hysteresis_db);
      num(s, "dwell", c.policy.dwell_ms);
      integer(s, "beacons_realtime", c.policy.beacons_realtime);
      integer(s, "beacons_nonrealtime", c.policy.beacons_nonrealtime);
      if (const auto* e = s.find("strategy")) c.policy.strategy = *strategy_from_string(e->value);
      num(s, "load_ceiling", c.policy.load_ceiling);
    } else if (s.name == "service") {
      if (const auto* e = s.find("kind"))
        c.service.kind = e->value == "RealTime" ? ServiceKind::RealTime : ServiceKind::NonRealTime;
      num(s, "required_bw", c.service.required_bw_kbps);
      boolean(s, "emergency", c.service.emergency);
      num(s, "app_rate", c.service.app_rate_kbps);
      num(s, "payload", c.service.payload_bytes);
    } else if (s.name == "exec") {
      auto& x = c.exec;
      num(s, "l2_attach_wlan", x.latency.l2_attach(Tech::WLAN));
      num(s, "l2_attach_umts", x.latency.l2_attach(Tech::UMTS));
      num(s, "l2_attach_wimax", x.latency.l2_attach(Tech::WIMAX));
      num(s, "coa_config", x.latency.coa_config_ms);
      num(s, "ha_registration_rtt", x.latency.ha_registration_rtt_ms);
      boolean(s, "horizontal_same_subnet", x.latency.horizontal_same_subnet);
      num(s, "scan_period", x.scan.period_ms);
      num(s, "scan_min", x.scan.min_duration_ms);
      num(s, "scan_max", x.scan.max_duration_ms);
      boolean(s, "scan_interrupts", x.scan.interrupts_traffic);
      boolean(s, "multi_interface", x.multi_interface);
      num(s, "buffer_target", x.buffer_target_ms);
      boolean(s, "adaptive_buffer", x.adaptive_buffer);
      num(s, "burst_multiplier", x.burst_multiplier);
      num(s, "max_queue", x.max_queue_ms);
      num(s, "ch_to_ha", x.ch_to_ha_ms);
      num(s, "mh_to_ch", x.mh_to_ch_ms);
    } else if (s.name == "load") {
      for (const auto& e : s.entries) c.initial_load[e.key] = to_number(e, "load." + e.key);
    } else if (s.name == "load_ramp") {
      for (const auto& e : s.entries) c.load_ramps[e.key] = to_ramp(e, "load_ramp." + e.key);
    } else if (s.name == "users") {
      for (const auto& e : s.entries) {
        const auto n = to_integer(e, "users." + e.key);
        if (n < 0 || n > 1'000'000) semantic("users." + e.key + ": violates 0 <= users <= capacity_users", e.line);
        c.background_users[e.key] = static_cast<int>(n);
      }
    } else if (s.name == "sim") {
      integer(s, "tick", c.sim.tick_ms);
      if (const auto* e = s.find("seed")) {
        const auto v = to_integer(*e, "sim.seed");
        c.sim.seed = static_cast<std::uint64_t>(v);
      }
      num(s, "duration", c.sim.duration_cap_s);
      integer(s, "sample_interval", c.sim.sample_interval_ms);
      num(s, "ping_pong_window", c.sim.ping_pong_window_s);
      num(s, "background_user_kbps", c.sim.background_user_kbps);
    }
  }
  // A sample interval left at its default follows the tick.
  if (!doc.sections.empty()) {
    bool explicit_sample = false;
    for (const auto& s : doc.sections)
      if (s.name == "sim" && s.find("sample_interval")) explicit_sample = true;
    if (!explicit_sample) c.sim.sample_interval_ms = c.sim.tick_ms;
  }
  if (!have_route) semantic("environment.route: required");
  try {
    validate_scenario(c);
  } catch (const ValidationError& e) {
    throw ScenarioError(ErrorKind::Semantic, e.what());
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(ErrorKind::Semantic, e.what());
  }
  return c;
}

inline RawDocument read_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(ErrorKind::MissingFile, "cannot open scenario file '" + path + "'");
  return parse_document(in);
}

inline ScenarioConfig parse_scenario_text(std::string_view text, const std::vector<std::string>& overrides = {}) {
  std::istringstream in{std::string(text)};
  auto doc = parse_document(in);
  for (const auto& o : overrides) apply_override(doc, o);
  return build_scenario(doc);
}

inline ScenarioConfig parse_scenario(const std::string& path, const std::vector<std::string>& overrides = {}) {
  auto doc = read_document(path);
  for (const auto& o : overrides) apply_override(doc, o);
  return build_scenario(doc);
}

}  // namespace hetsim
