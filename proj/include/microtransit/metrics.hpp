#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "error.hpp"
#include "event_log.hpp"
#include "network.hpp"

namespace mt {

struct Stats {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population
  double p95 = 0.0;     // nearest rank
  double min = 0.0;
  double max = 0.0;
};

inline double nearest_rank(std::vector<double> v, double pct) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  auto rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * static_cast<double>(v.size())));
  rank = std::clamp<std::size_t>(rank, 1, v.size());
  return v[rank - 1];
}

inline Stats describe(std::span<const double> xs) {
  Stats s;
  s.count = xs.size();
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  double sq = 0.0;
  for (double x : xs) sq += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(xs.size()));
  s.p95 = nearest_rank({xs.begin(), xs.end()}, 95.0);
  auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

struct RequestOutcome {
  RequestId id = 0;
  double earliest = 0.0;
  int riders = 0;
  ShuttleId shuttle = -1;
  double pickup = 0.0;
  double dropoff = 0.0;

  double wait() const { return pickup - earliest; }
  double travel() const { return dropoff - pickup; }
};

struct ShuttleDistance {
  ShuttleId id = 0;
  double odometer_km = 0.0;
  double empty_km = 0.0;
  double loaded_km = 0.0;
  double shared_km = 0.0;  // two or more riders onboard
};

// Per-request and per-shuttle facts recovered from an event log.
struct LogSummary {
  std::vector<RequestOutcome> requests;  // by request id
  std::vector<ShuttleDistance> shuttles; // by shuttle id
};

inline LogSummary summarize(const EventLog& log) {
  struct Seen {
    RequestOutcome out;
    int received = 0, assigned = 0, picked = 0, dropped = 0;
  };
  std::map<RequestId, Seen> req;
  std::map<ShuttleId, ShuttleDistance> fleet;
  std::vector<std::string> issues;
  for (const auto& e : log.events) {
    const auto& b = e.body;
    if (e.type == event::shuttle_init) {
      ShuttleId v = b.at("shuttle").get<ShuttleId>();
      fleet[v].id = v;
    } else if (e.type == event::received) {
      auto& s = req[b.at("request").get<RequestId>()];
      s.out.id = b.at("request").get<RequestId>();
      s.out.earliest = b.at("e").get<double>();
      s.out.riders = b.at("riders").get<int>();
      ++s.received;
    } else if (e.type == event::assigned) {
      auto& s = req[b.at("request").get<RequestId>()];
      s.out.shuttle = b.at("shuttle").get<ShuttleId>();
      ++s.assigned;
    } else if (e.type == event::pickup) {
      auto& s = req[b.at("request").get<RequestId>()];
      s.out.pickup = e.time;
      ++s.picked;
    } else if (e.type == event::dropoff) {
      auto& s = req[b.at("request").get<RequestId>()];
      s.out.dropoff = e.time;
      ++s.dropped;
    } else if (e.type == event::arrival || e.type == event::reroute) {
      ShuttleId v = b.at("shuttle").get<ShuttleId>();
      const double km = b.at("km").get<double>();
      const int riders = b.at("riders").get<int>();
      auto& d = fleet[v];
      d.id = v;
      d.odometer_km += km;
      if (riders == 0)
        d.empty_km += km;
      else
        d.loaded_km += km;
      if (riders >= 2) d.shared_km += km;
    }
  }
  LogSummary out;
  std::string dangling;
  for (const auto& [id, s] : req) {
    if (s.received != 1 || s.assigned != 1 || s.picked != 1 || s.dropped != 1) {
      if (!dangling.empty()) dangling += ", ";
      dangling += std::to_string(id);
      continue;
    }
    out.requests.push_back(s.out);
  }
  if (!dangling.empty()) throw Error("incomplete event log; requests without exactly one received/assigned/pickup/dropoff: " + dangling);
  for (const auto& [id, d] : fleet) out.shuttles.push_back(d);
  return out;
}

inline Stats waiting_stats(const LogSummary& s) {
  std::vector<double> w;
  for (const auto& r : s.requests) w.push_back(r.wait());
  return describe(w);
}

inline Stats travel_stats(const LogSummary& s) {
  std::vector<double> t;
  for (const auto& r : s.requests) t.push_back(r.travel());
  return describe(t);
}

struct RideshareRate {
  double rate = 0.0;
  bool zero_distance = false;
};

inline RideshareRate ridesharing_rate(std::span<const ShuttleDistance> fleet) {
  double shared = 0.0, total = 0.0;
  for (const auto& d : fleet) {
    shared += d.shared_km;
    total += d.odometer_km;
  }
  if (!(total > 0.0)) return {0.0, true};
  return {shared / total, false};
}

// --- cost per trip -------------------------------------------------------------

enum class CostDenominator { riders, trips };

inline const char* to_string(CostDenominator d) { return d == CostDenominator::riders ? "riders" : "trips"; }

inline CostDenominator parse_cost_denominator(const std::string& s) {
  if (s == "riders") return CostDenominator::riders;
  if (s == "trips") return CostDenominator::trips;
  throw ConfigError("unknown cost denominator '" + s + "' (allowed: riders, trips)");
}

inline double cost_per_trip(double rate, double hours, int fleet, long denominator) {
  if (denominator <= 0) throw InvalidInput("cost per trip undefined: no riders served");
  return rate * hours * static_cast<double>(fleet) / static_cast<double>(denominator);
}

// Half-up to cents. Products like 20 * 13 * 3 / 43 land a hair off the decimal
// they denote, so the scaled value is snapped to 1e-6 first.
inline double round_cents(double x) {
  const double scaled = std::round(x * 100.0 * 1e6) / 1e6;
  return std::floor(scaled + 0.5) / 100.0;
}

struct CostTableSpec {
  std::string zone;
  double hours = 13.0;
  std::vector<int> fleets;
  std::vector<int> multipliers{1, 2, 3};
  std::vector<long> riders;  // per multiplier
  std::vector<long> trips;   // per multiplier
  CostDenominator denominator = CostDenominator::riders;
};

inline std::optional<CostTableSpec> cost_table_preset(const std::string& zone) {
  if (zone == "belvedere") return CostTableSpec{"belvedere", 13.0, {3, 4, 5}, {1, 2, 3}, {43, 82, 122}, {39, 78, 117}};
  if (zone == "west-atlanta")
    return CostTableSpec{"west-atlanta", 13.0, {5, 6, 7}, {1, 2, 3}, {89, 182, 270}, {82, 164, 246}};
  return std::nullopt;
}

inline std::vector<double> rate_range(double from, double to, double step) {
  if (!(step > 0.0) || to < from) throw ConfigError("rate range needs step > 0 and from <= to");
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double r = from + step * i;
    if (r > to + 1e-9) break;
    out.push_back(r);
  }
  return out;
}

struct CostRow {
  double rate = 0.0;
  std::vector<double> cells;  // multiplier-major, then fleet
};

inline std::vector<CostRow> cost_table(const CostTableSpec& spec, std::span<const double> rates) {
  const auto& denom = spec.denominator == CostDenominator::riders ? spec.riders : spec.trips;
  if (denom.size() != spec.multipliers.size()) throw ConfigError("cost table: one count per multiplier required");
  std::vector<CostRow> rows;
  for (double rate : rates) {
    CostRow row{rate, {}};
    for (std::size_t k = 0; k < spec.multipliers.size(); ++k)
      for (int v : spec.fleets) row.cells.push_back(round_cents(cost_per_trip(rate, spec.hours, v, denom[k])));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string cents(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline void write_cost_table_csv(std::ostream& out, const CostTableSpec& spec, std::span<const CostRow> rows) {
  out << "rate";
  for (int mult : spec.multipliers)
    for (int v : spec.fleets) out << ',' << mult << "x_V" << v;
  out << '\n';
  for (const auto& r : rows) {
    out << csv::format_double(r.rate);
    for (double c : r.cells) out << ',' << cents(c);
    out << '\n';
  }
}

// --- reports -------------------------------------------------------------------

struct ScenarioDescriptor {
  std::string zone;
  int fleet = 0;
  std::string sfl;
  int multiplier = 1;
  std::uint64_t seed = 0;
  nlohmann::json constants = nlohmann::json::object();
};

struct MetricsReport {
  ScenarioDescriptor scenario;
  LogSummary summary;
  Stats wait;
  Stats travel;
  double total_km = 0.0;
  double empty_km = 0.0;
  double loaded_km = 0.0;
  double shared_km = 0.0;
  RideshareRate rideshare;
  long trips = 0;
  long riders = 0;
  double hours = 13.0;
  CostDenominator denominator = CostDenominator::riders;
  std::vector<double> cost_rates;
  std::vector<double> cost_per_trip;  // parallel to cost_rates; empty when nothing was served
};

inline MetricsReport build_report(const EventLog& log, ScenarioDescriptor scenario, double hours,
                                  CostDenominator denominator, std::vector<double> cost_rates) {
  MetricsReport r;
  r.scenario = std::move(scenario);
  r.summary = summarize(log);
  r.wait = waiting_stats(r.summary);
  r.travel = travel_stats(r.summary);
  for (const auto& d : r.summary.shuttles) {
    r.total_km += d.odometer_km;
    r.empty_km += d.empty_km;
    r.loaded_km += d.loaded_km;
    r.shared_km += d.shared_km;
  }
  r.rideshare = ridesharing_rate(r.summary.shuttles);
  r.trips = static_cast<long>(r.summary.requests.size());
  for (const auto& q : r.summary.requests) r.riders += q.riders;
  r.hours = hours;
  r.denominator = denominator;
  r.cost_rates = std::move(cost_rates);
  const long denom = denominator == CostDenominator::riders ? r.riders : r.trips;
  if (denom > 0)
    for (double rate : r.cost_rates)
      r.cost_per_trip.push_back(round_cents(cost_per_trip(rate, hours, r.scenario.fleet, denom)));
  return r;
}

inline std::vector<std::string> report_columns(std::span<const double> cost_rates) {
  std::vector<std::string> cols{"zone",          "fleet",        "sfl",          "multiplier", "seed",
                                "trips",         "riders",       "mean_wait_s",  "std_wait_s", "p95_wait_s",
                                "mean_travel_s", "std_travel_s", "p95_travel_s", "total_km",   "empty_km",
                                "shared_km",     "rideshare_rate"};
  for (double rate : cost_rates) cols.push_back("cost_per_trip_" + csv::format_double(rate));
  return cols;
}

inline void write_report_csv_header(std::ostream& out, std::span<const double> cost_rates) {
  const auto cols = report_columns(cost_rates);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

// Cost cells are blank when nothing was served.
inline void write_report_csv_row(std::ostream& out, const MetricsReport& r) {
  using csv::format_double;
  const auto& s = r.scenario;
  out << s.zone << ',' << s.fleet << ',' << s.sfl << ',' << s.multiplier << ',' << s.seed << ',' << r.trips << ','
      << r.riders << ',' << format_double(r.wait.mean) << ',' << format_double(r.wait.stddev) << ','
      << format_double(r.wait.p95) << ',' << format_double(r.travel.mean) << ',' << format_double(r.travel.stddev)
      << ',' << format_double(r.travel.p95) << ',' << format_double(r.total_km) << ',' << format_double(r.empty_km)
      << ',' << format_double(r.shared_km) << ',' << format_double(r.rideshare.rate);
  for (std::size_t i = 0; i < r.cost_rates.size(); ++i)
    out << ',' << (i < r.cost_per_trip.size() ? cents(r.cost_per_trip[i]) : "");
  out << '\n';
}

// A sweep row for a scenario that failed: descriptor plus the error, blank metrics.
inline void write_failure_csv_header(std::ostream& out) { out << "zone,fleet,sfl,multiplier,seed,error\n"; }

inline void write_failure_csv_row(std::ostream& out, const ScenarioDescriptor& s, const std::string& what) {
  std::string msg = what;
  std::replace(msg.begin(), msg.end(), ',', ';');
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  out << s.zone << ',' << s.fleet << ',' << s.sfl << ',' << s.multiplier << ',' << s.seed << ',' << msg << '\n';
}

inline nlohmann::json stats_json(const Stats& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"stddev", s.stddev}, {"p95", s.p95}, {"min", s.min}, {"max", s.max}};
}

inline nlohmann::json report_json(const MetricsReport& r) {
  nlohmann::json shuttles = nlohmann::json::array();
  for (const auto& d : r.summary.shuttles)
    shuttles.push_back({{"shuttle", d.id},
                        {"odometer_km", d.odometer_km},
                        {"empty_km", d.empty_km},
                        {"loaded_km", d.loaded_km},
                        {"shared_km", d.shared_km}});
  nlohmann::json requests = nlohmann::json::array();
  for (const auto& q : r.summary.requests)
    requests.push_back({{"request", q.id},
                        {"shuttle", q.shuttle},
                        {"riders", q.riders},
                        {"e", q.earliest},
                        {"pickup", q.pickup},
                        {"dropoff", q.dropoff},
                        {"wait_s", q.wait()},
                        {"travel_s", q.travel()}});
  nlohmann::json costs = nlohmann::json::array();
  for (std::size_t i = 0; i < r.cost_per_trip.size(); ++i)
    costs.push_back({{"rate", r.cost_rates[i]}, {"cost_per_trip", r.cost_per_trip[i]}});
  return {{"scenario",
           {{"zone", r.scenario.zone},
            {"fleet", r.scenario.fleet},
            {"sfl", r.scenario.sfl},
            {"multiplier", r.scenario.multiplier},
            {"seed", r.scenario.seed},
            {"constants", r.scenario.constants}}},
          {"trips", r.trips},
          {"riders", r.riders},
          {"wait_s", stats_json(r.wait)},
          {"travel_s", stats_json(r.travel)},
          {"fleet_km",
           {{"total", r.total_km}, {"empty", r.empty_km}, {"loaded", r.loaded_km}, {"shared", r.shared_km}}},
          {"rideshare_rate", r.rideshare.rate},
          {"rideshare_zero_distance", r.rideshare.zero_distance},
          {"cost",
           {{"hours", r.hours}, {"denominator", to_string(r.denominator)}, {"rows", costs}}},
          {"shuttles", shuttles},
          {"requests", requests}};
}

inline ScenarioDescriptor descriptor_from_json(const nlohmann::json& report) {
  const auto& s = report.at("scenario");
  ScenarioDescriptor d;
  d.zone = s.at("zone").get<std::string>();
  d.fleet = s.at("fleet").get<int>();
  d.sfl = s.at("sfl").get<std::string>();
  d.multiplier = s.at("multiplier").get<int>();
  d.seed = s.at("seed").get<std::uint64_t>();
  d.constants = s.value("constants", nlohmann::json::object());
  return d;
}

}  // namespace mt
