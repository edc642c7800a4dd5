#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "csv.hpp"
#include "engine.hpp"
#include "error.hpp"
#include "metrics.hpp"
#include "zone_io.hpp"

namespace mt {

// --- INI-style text --------------------------------------------------------------
//
//   # comment
//   [section]            or [section.name]
//   key = value

struct IniEntry {
  std::string value;
  std::size_t line = 0;
};

struct IniSection {
  std::string name;
  std::size_t line = 0;
  std::map<std::string, IniEntry> entries;
};

struct IniFile {
  std::string source;
  std::vector<IniSection> sections;

  std::string where(std::size_t line) const { return source + ":" + std::to_string(line) + ": "; }
};

inline IniFile parse_ini(std::istream& in, const std::string& source = "config") {
  IniFile ini;
  ini.source = source;
  std::string raw;
  std::size_t n = 0;
  while (std::getline(in, raw)) {
    ++n;
    std::string_view line = csv::trim(raw);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = csv::trim(line.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(ini.where(n) + "unterminated section header");
      auto name = std::string(csv::trim(line.substr(1, line.size() - 2)));
      if (name.empty()) throw ConfigError(ini.where(n) + "empty section name");
      for (const auto& s : ini.sections)
        if (s.name == name) throw ConfigError(ini.where(n) + "section [" + name + "] repeated (first at line " +
                                              std::to_string(s.line) + ")");
      ini.sections.push_back({name, n, {}});
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(ini.where(n) + "expected 'key = value'");
    if (ini.sections.empty()) throw ConfigError(ini.where(n) + "key outside of any section");
    auto key = std::string(csv::trim(line.substr(0, eq)));
    auto value = std::string(csv::trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(ini.where(n) + "empty key");
    auto& sec = ini.sections.back();
    if (!sec.entries.emplace(key, IniEntry{value, n}).second)
      throw ConfigError(ini.where(n) + "key '" + key + "' repeated in [" + sec.name + "]");
  }
  return ini;
}

// --- scenario configuration --------------------------------------------------------

struct ZoneFiles {
  std::string name;
  std::string stops;
  std::string time;
  std::string distance;
  std::string matrix_bin;   // alternative to time + distance
  std::string calibration;  // optional; rescales times
  std::string requests;
  std::vector<std::string> pool;  // extra days for ridership scaling
};

inline ZoneFiles named_zone(std::string name) {
  ZoneFiles z;
  z.name = std::move(name);
  return z;
}

struct ModelParams {
  double delta = 420.0;
  double epoch = 30.0;
  double window = 3600.0;
  double threshold = 300.0;
  int capacity = 6;
  double detour_factor = 1.5;
  double detour_slack = 300.0;
  double max_wait = 1800.0;
  int max_requests = 4;
  std::size_t beam_width = 64;
  DiversionMode diversion = DiversionMode::retrace_or_continue;
  std::uint64_t node_limit = 1'000'000;
  std::string driver_samples = "synthetic";  // or a CSV path
  double hours = 13.0;
  CostDenominator cost_denominator = CostDenominator::riders;
  std::vector<double> cost_rates{35.0};
  double window_slack = 600.0;
};

struct GridAxes {
  std::vector<int> fleets;
  std::vector<Sfl> sfls;
  std::vector<int> multipliers;
  std::vector<std::uint64_t> seeds;
  int jobs = 1;
};

struct ScenarioConfig {
  std::vector<ZoneFiles> zones;
  int fleet = 4;
  Sfl sfl = Sfl::II;
  int multiplier = 1;
  std::uint64_t seed = 1;
  GridAxes grid;
  ModelParams params;
  std::string output_dir;
  bool audit = false;
};

inline const char* to_string(DiversionMode d) {
  return d == DiversionMode::continue_ahead ? "continue" : "retrace_or_continue";
}

inline DiversionMode parse_diversion(const std::string& s) {
  if (s == "continue") return DiversionMode::continue_ahead;
  if (s == "retrace_or_continue") return DiversionMode::retrace_or_continue;
  throw ConfigError("unknown diversion mode '" + s + "' (allowed: continue, retrace_or_continue)");
}

namespace detail {

template <class T>
T parse_number(const std::string& v, const std::string& where) {
  if constexpr (std::is_floating_point_v<T>) {
    double d;
    if (!csv::parse_double(v, d) || !std::isfinite(d)) throw ConfigError(where + "expected a number, got '" + v + "'");
    return static_cast<T>(d);
  } else {
    std::int64_t i;
    if (!csv::parse_int(v, i)) throw ConfigError(where + "expected an integer, got '" + v + "'");
    if constexpr (std::is_unsigned_v<T>) {
      if (i < 0) throw ConfigError(where + "expected a non-negative integer, got '" + v + "'");
    }
    return static_cast<T>(i);
  }
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  for (auto& s : csv::split(v, ','))
    if (!s.empty()) out.push_back(s);
  return out;
}

inline int positive_int(const std::string& v, const std::string& where, const char* what) {
  int x = parse_number<int>(v, where);
  if (x < 1) throw ConfigError(where + what + " must be a positive integer, got '" + v + "'");
  return x;
}

inline std::string resolve(const std::string& path, const std::filesystem::path& base) {
  if (path.empty() || base.empty()) return path;
  std::filesystem::path p(path);
  return p.is_absolute() ? path : (base / p).lexically_normal().string();
}

}  // namespace detail

// Sets one `section.key` value; shared by the config file and flag overrides.
inline void apply_setting(ScenarioConfig& cfg, const std::string& section, const std::string& key,
                          const std::string& v, const std::string& where, const std::filesystem::path& base = {}) {
  using detail::parse_number;
  auto bad_key = [&] { throw ConfigError(where + "unknown key '" + key + "' in [" + section + "]"); };
  if (section == "zone" || section.rfind("zone.", 0) == 0) {
    ZoneFiles* z = nullptr;
    if (section == "zone") {
      if (cfg.zones.empty()) cfg.zones.push_back(named_zone("zone"));
      z = &cfg.zones.front();
    } else {
      const std::string name = section.substr(5);
      for (auto& zone : cfg.zones)
        if (zone.name == name) z = &zone;
      if (!z) {
        cfg.zones.push_back(named_zone(name));
        z = &cfg.zones.back();
      }
    }
    if (key == "name") z->name = v;
    else if (key == "stops") z->stops = detail::resolve(v, base);
    else if (key == "time") z->time = detail::resolve(v, base);
    else if (key == "distance") z->distance = detail::resolve(v, base);
    else if (key == "matrix_bin") z->matrix_bin = detail::resolve(v, base);
    else if (key == "calibration") z->calibration = detail::resolve(v, base);
    else if (key == "requests") z->requests = detail::resolve(v, base);
    else if (key == "pool") {
      z->pool.clear();
      for (auto& p : detail::split_list(v)) z->pool.push_back(detail::resolve(p, base));
    } else bad_key();
  } else if (section == "scenario") {
    if (key == "fleet") cfg.fleet = detail::positive_int(v, where, "fleet");
    else if (key == "sfl") {
      try {
        cfg.sfl = parse_sfl(v);
      } catch (const ConfigError& e) {
        throw ConfigError(where + e.what());
      }
    } else if (key == "multiplier") cfg.multiplier = detail::positive_int(v, where, "multiplier");
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(v, where);
    else bad_key();
  } else if (section == "grid") {
    if (key == "fleets") {
      cfg.grid.fleets.clear();
      for (auto& s : detail::split_list(v)) cfg.grid.fleets.push_back(detail::positive_int(s, where, "fleet"));
    } else if (key == "sfls") {
      cfg.grid.sfls.clear();
      for (auto& s : detail::split_list(v)) {
        try {
          cfg.grid.sfls.push_back(parse_sfl(s));
        } catch (const ConfigError& e) {
          throw ConfigError(where + e.what());
        }
      }
    } else if (key == "multipliers") {
      cfg.grid.multipliers.clear();
      for (auto& s : detail::split_list(v))
        cfg.grid.multipliers.push_back(detail::positive_int(s, where, "multiplier"));
    } else if (key == "seeds") {
      cfg.grid.seeds.clear();
      for (auto& s : detail::split_list(v)) cfg.grid.seeds.push_back(parse_number<std::uint64_t>(s, where));
    } else if (key == "jobs") cfg.grid.jobs = detail::positive_int(v, where, "jobs");
    else bad_key();
  } else if (section == "params") {
    auto& p = cfg.params;
    if (key == "delta") p.delta = parse_number<double>(v, where);
    else if (key == "epoch") p.epoch = parse_number<double>(v, where);
    else if (key == "window") p.window = parse_number<double>(v, where);
    else if (key == "threshold") p.threshold = parse_number<double>(v, where);
    else if (key == "capacity") p.capacity = detail::positive_int(v, where, "capacity");
    else if (key == "detour_factor") p.detour_factor = parse_number<double>(v, where);
    else if (key == "detour_slack") p.detour_slack = parse_number<double>(v, where);
    else if (key == "max_wait") p.max_wait = parse_number<double>(v, where);
    else if (key == "max_requests") p.max_requests = detail::positive_int(v, where, "max_requests");
    else if (key == "beam_width") p.beam_width = static_cast<std::size_t>(detail::positive_int(v, where, "beam_width"));
    else if (key == "node_limit") p.node_limit = parse_number<std::uint64_t>(v, where);
    else if (key == "diversion") {
      try {
        p.diversion = parse_diversion(v);
      } catch (const ConfigError& e) {
        throw ConfigError(where + e.what());
      }
    } else if (key == "driver_samples") p.driver_samples = v == "synthetic" ? v : detail::resolve(v, base);
    else if (key == "hours") p.hours = parse_number<double>(v, where);
    else if (key == "cost_denominator") {
      try {
        p.cost_denominator = parse_cost_denominator(v);
      } catch (const ConfigError& e) {
        throw ConfigError(where + e.what());
      }
    } else if (key == "cost_rates") {
      p.cost_rates.clear();
      for (auto& s : detail::split_list(v)) p.cost_rates.push_back(parse_number<double>(s, where));
    } else if (key == "window_slack") p.window_slack = parse_number<double>(v, where);
    else bad_key();
  } else if (section == "output") {
    if (key == "dir") cfg.output_dir = detail::resolve(v, base);
    else if (key == "audit") {
      bool b;
      if (!detail::parse_bool(v, b)) throw ConfigError(where + "audit must be true/false, got '" + v + "'");
      cfg.audit = b;
    } else bad_key();
  } else {
    throw ConfigError(where + "unknown section [" + section + "]");
  }
}

inline void validate(const ScenarioConfig& cfg) {
  const auto& p = cfg.params;
  std::vector<std::string> issues;
  if (!(p.delta > 0.0)) issues.push_back("params.delta must be > 0");
  if (!(p.epoch > 0.0)) issues.push_back("params.epoch must be > 0");
  if (!(p.window > 0.0)) issues.push_back("params.window must be > 0");
  if (!(p.threshold >= 0.0)) issues.push_back("params.threshold must be >= 0");
  if (!(p.detour_factor >= 1.0)) issues.push_back("params.detour_factor must be >= 1");
  if (!(p.detour_slack >= 0.0)) issues.push_back("params.detour_slack must be >= 0");
  if (!(p.max_wait > 0.0)) issues.push_back("params.max_wait must be > 0");
  if (!(p.hours > 0.0)) issues.push_back("params.hours must be > 0");
  for (double r : p.cost_rates)
    if (r < 0.0) issues.push_back("params.cost_rates must be >= 0");
  if (cfg.fleet < 1) issues.push_back("scenario.fleet must be a positive integer");
  if (cfg.multiplier < 1) issues.push_back("scenario.multiplier must be a positive integer");
  std::set<std::string> names;
  for (const auto& z : cfg.zones) {
    const std::string label = "zone '" + z.name + "'";
    if (!names.insert(z.name).second) issues.push_back(label + " defined twice");
    if (z.stops.empty()) issues.push_back(label + ": stops file missing");
    if (z.matrix_bin.empty() && (z.time.empty() || z.distance.empty()))
      issues.push_back(label + ": needs time + distance matrices or matrix_bin");
    if (z.requests.empty()) issues.push_back(label + ": requests file missing");
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

inline ScenarioConfig load_config(std::istream& in, const std::string& source = "config",
                                  const std::filesystem::path& base = {}) {
  ScenarioConfig cfg;
  auto ini = parse_ini(in, source);
  for (const auto& sec : ini.sections) {
    if (sec.name == "zone" || sec.name.rfind("zone.", 0) == 0) {
      std::string name = sec.name == "zone" ? "zone" : sec.name.substr(5);
      if (auto it = sec.entries.find("name"); it != sec.entries.end()) name = it->second.value;
      for (const auto& z : cfg.zones)
        if (z.name == name) throw ConfigError(ini.where(sec.line) + "zone '" + name + "' defined twice");
      cfg.zones.push_back(named_zone(name));
      for (const auto& [key, e] : sec.entries)
        if (key != "name") apply_setting(cfg, "zone." + name, key, e.value, ini.where(e.line), base);
      continue;
    }
    for (const auto& [key, e] : sec.entries) apply_setting(cfg, sec.name, key, e.value, ini.where(e.line), base);
  }
  return cfg;
}

inline ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  return load_config(in, path, std::filesystem::path(path).parent_path());
}

// Every design constant a run depends on, echoed into reports.
inline nlohmann::json constants_json(const ModelParams& p) {
  return {{"delta_s", p.delta},
          {"epoch_s", p.epoch},
          {"window_s", p.window},
          {"response_threshold_s", p.threshold},
          {"capacity", p.capacity},
          {"detour_factor", p.detour_factor},
          {"detour_slack_s", p.detour_slack},
          {"max_wait_s", p.max_wait},
          {"max_requests_per_route", p.max_requests},
          {"beam_width", p.beam_width},
          {"diversion", to_string(p.diversion)},
          {"node_limit", p.node_limit},
          {"driver_samples", p.driver_samples},
          {"hours", p.hours},
          {"cost_denominator", to_string(p.cost_denominator)},
          {"cost_rates", p.cost_rates},
          {"scaling_window_slack_s", p.window_slack},
          {"percentile", "nearest-rank"},
          {"stddev", "population"},
          {"shift_starts_s", {0.0, 25200.0}}};
}

}  // namespace mt
