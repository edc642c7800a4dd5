#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "error.hpp"

namespace mt {

inline constexpr const char* kEventLogSchema = "microtransit.eventlog";
inline constexpr int kEventLogVersion = 1;

namespace event {
inline constexpr const char* shuttle_init = "shuttle_init";
inline constexpr const char* received = "received";
inline constexpr const char* assigned = "assigned";
inline constexpr const char* driver_response = "driver_response";
inline constexpr const char* departure = "departure";
inline constexpr const char* arrival = "arrival";
inline constexpr const char* reroute = "reroute";
inline constexpr const char* pickup = "pickup";
inline constexpr const char* dropoff = "dropoff";
inline constexpr const char* rebalance_move = "rebalance_move";
inline constexpr const char* idle_stop_relocation = "idle_stop_relocation";
inline constexpr const char* epoch_summary = "epoch_summary";
}  // namespace event

// `body` keys are written sorted, next to "t" and "type".
struct Event {
  double time = 0.0;
  std::string type;
  nlohmann::json body = nlohmann::json::object();

  friend bool operator==(const Event&, const Event&) = default;
};

struct EventLog {
  int version = kEventLogVersion;
  std::vector<Event> events;

  void add(double t, const char* type, nlohmann::json body) { events.push_back({t, type, std::move(body)}); }
};

inline std::string to_json_line(const Event& e) {
  nlohmann::json j = e.body;
  j["t"] = e.time;
  j["type"] = e.type;
  return j.dump();
}

inline void write_event_log(std::ostream& out, const EventLog& log) {
  out << nlohmann::json{{"schema", kEventLogSchema}, {"version", log.version}}.dump() << '\n';
  for (const auto& e : log.events) out << to_json_line(e) << '\n';
}

inline EventLog read_event_log(std::istream& in) {
  EventLog log;
  std::string line;
  std::size_t n = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InvalidInput("event log line " + std::to_string(n) + ": " + e.what());
    }
    if (!header) {
      if (!j.is_object() || j.value("schema", "") != kEventLogSchema)
        throw InvalidInput("event log line " + std::to_string(n) + ": missing schema header");
      log.version = j.value("version", 0);
      if (log.version != kEventLogVersion)
        throw InvalidInput("event log: unsupported version " + std::to_string(log.version));
      header = true;
      continue;
    }
    if (!j.is_object() || !j.contains("t") || !j.contains("type"))
      throw InvalidInput("event log line " + std::to_string(n) + ": expected an object with t and type");
    Event e;
    e.time = j.at("t").get<double>();
    e.type = j.at("type").get<std::string>();
    j.erase("t");
    j.erase("type");
    e.body = std::move(j);
    log.events.push_back(std::move(e));
  }
  if (!header) throw InvalidInput("event log is empty");
  return log;
}

}  // namespace mt
