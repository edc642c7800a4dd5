#pragma once

#include <initializer_list>
#include <vector>

#include "microtransit/microtransit.hpp"

namespace mt::test {

// Stops get ids 1..n in matrix order, so StopIndex i is id i + 1. Distances are
// time / 60 km (a 60 km/h network) unless given.
inline Network make_net(const std::vector<std::vector<double>>& times, std::initializer_list<std::size_t> idle,
                        double km_per_second = 1.0 / 60.0) {
  const std::size_t n = times.size();
  TravelMatrix m(n);
  std::vector<Stop> stops(n);
  for (std::size_t i = 0; i < n; ++i) {
    stops[i].id = static_cast<StopId>(i + 1);
    stops[i].lat = 33.7 + 0.001 * static_cast<double>(i);
    stops[i].lon = -84.3;
    for (std::size_t j = 0; j < n; ++j) m.set(i, j, times[i][j], times[i][j] * km_per_second);
  }
  for (auto s : idle) stops[s].is_idle = true;
  return Network(std::move(stops), m);
}

// Stops on a line, `gap` seconds apart.
inline Network line_net(std::size_t n, double gap, std::initializer_list<std::size_t> idle) {
  std::vector<std::vector<double>> t(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) t[i][j] = gap * std::abs(static_cast<double>(i) - static_cast<double>(j));
  return make_net(t, idle);
}

inline Request req(RequestId id, StopIndex p, StopIndex d, double e, int riders = 1, std::int64_t user = -1) {
  Request r;
  r.id = id;
  r.user_id = user < 0 ? id : user;
  r.pickup = p;
  r.dropoff = d;
  r.earliest = e;
  r.riders = riders;
  return r;
}

inline DemandDay make_day(const Network& net, std::vector<Request> rs) {
  DemandDay day;
  for (auto& r : rs) r.pickup_idle = net.nearest_idle(r.pickup);
  day.requests = std::move(rs);
  day.source_tags.assign(day.requests.size(), "base");
  day.sort();
  return day;
}

inline std::vector<const Event*> events_of(const EventLog& log, const std::string& type) {
  std::vector<const Event*> out;
  for (const auto& e : log.events)
    if (e.type == type) out.push_back(&e);
  return out;
}

inline double event_time(const EventLog& log, const std::string& type, RequestId request) {
  for (const auto& e : log.events)
    if (e.type == type && e.body.value("request", RequestId{-1}) == request) return e.time;
  return -1.0;
}

}  // namespace mt::test
