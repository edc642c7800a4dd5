#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "demand.hpp"
#include "error.hpp"
#include "network.hpp"

namespace mt {

enum class ActionKind { pickup, dropoff, reposition };

inline const char* to_string(ActionKind k) {
  switch (k) {
    case ActionKind::pickup: return "pickup";
    case ActionKind::dropoff: return "dropoff";
    case ActionKind::reposition: return "reposition";
  }
  return "?";
}

struct RouteStopAction {
  StopIndex stop = 0;
  ActionKind kind = ActionKind::reposition;
  RequestId request = -1;

  friend bool operator==(const RouteStopAction&, const RouteStopAction&) = default;
};

// A shuttle's plan from `start` at `start_time`. `cost` is the total pickup wait
// (pickup - earliest) over every pickup in `actions`; `served` lists the requests
// newly taken on by this route.
struct Route {
  ShuttleId shuttle = 0;
  double start_time = 0.0;
  Location start;
  std::vector<RouteStopAction> actions;
  double cost = 0.0;
  std::vector<RequestId> served;  // ascending
  bool is_null = false;
};

struct RoutingParams {
  int capacity = 6;             // riders
  double detour_factor = 1.5;   // onboard time <= factor * direct + slack
  double detour_slack = 300.0;  // seconds
  double max_wait = 1800.0;     // pickup wait induced by one route, seconds
  int max_requests = 4;         // new requests per pooled route
  std::size_t beam_width = 64;  // routes kept per pooling depth >= 2
  DiversionMode diversion = DiversionMode::retrace_or_continue;
};

struct OnboardRider {
  RequestId request = -1;
  double pickup_time = 0.0;
};

using RequestTable = std::unordered_map<RequestId, Request>;

inline const Request& lookup(const RequestTable& table, RequestId id) {
  auto it = table.find(id);
  if (it == table.end()) throw InvalidInput("unknown request id " + std::to_string(id));
  return it->second;
}

struct ScheduledAction {
  double arrival = 0.0;
  double service = 0.0;
  TravelPath path;
  int riders_after = 0;
};

struct Schedule {
  std::vector<ScheduledAction> actions;
  std::unordered_map<RequestId, double> pickup;
  std::unordered_map<RequestId, double> dropoff;
  double cost = 0.0;
  double end_time = 0.0;
  Location end;
};

namespace detail {

inline constexpr double kTimeTolerance = 1e-6;

// Returns an empty string when feasible, otherwise the reason.
inline std::string run_schedule(const Route& route, const TravelMatrix& m, const RequestTable& table,
                                const RoutingParams& params, std::span<const OnboardRider> onboard, bool check,
                                Schedule& out) {
  out = Schedule{};
  std::unordered_map<RequestId, double> aboard;  // request -> pickup time
  int riders = 0;
  for (const auto& o : onboard) {
    aboard.emplace(o.request, o.pickup_time);
    riders += lookup(table, o.request).riders;
  }
  double t = route.start_time;
  Location loc = route.start;
  out.actions.reserve(route.actions.size());
  for (const auto& a : route.actions) {
    ScheduledAction s;
    s.path = travel_path(loc, a.stop, m, params.diversion);
    s.arrival = t + s.path.seconds;
    s.service = s.arrival;
    if (a.kind == ActionKind::pickup) {
      const auto& r = lookup(table, a.request);
      if (r.pickup != a.stop) return "pickup for request " + std::to_string(a.request) + " at the wrong stop";
      if (aboard.count(a.request) || out.pickup.count(a.request))
        return "request " + std::to_string(a.request) + " picked up twice";
      s.service = std::max(s.arrival, r.earliest);
      riders += r.riders;
      if (check && riders > params.capacity)
        return "capacity exceeded (" + std::to_string(riders) + " > " + std::to_string(params.capacity) + ")";
      const double induced = s.service - std::max(r.earliest, route.start_time);
      if (check && induced > params.max_wait + kTimeTolerance)
        return "pickup wait bound exceeded for request " + std::to_string(a.request);
      aboard.emplace(a.request, s.service);
      out.pickup[a.request] = s.service;
      out.cost += s.service - r.earliest;
    } else if (a.kind == ActionKind::dropoff) {
      const auto& r = lookup(table, a.request);
      if (r.dropoff != a.stop) return "dropoff for request " + std::to_string(a.request) + " at the wrong stop";
      auto it = aboard.find(a.request);
      if (it == aboard.end()) return "dropoff before pickup for request " + std::to_string(a.request);
      const double ride = s.service - it->second;
      const double bound = params.detour_factor * m.time(r.pickup, r.dropoff) + params.detour_slack;
      if (check && ride > bound + kTimeTolerance)
        return "detour bound exceeded for request " + std::to_string(a.request);
      riders -= r.riders;
      aboard.erase(it);
      out.dropoff[a.request] = s.service;
    }
    s.riders_after = riders;
    t = s.service;
    loc = Location::at(a.stop);
    out.actions.push_back(s);
  }
  if (check && !aboard.empty()) return "route ends with riders onboard";
  out.end_time = t;
  out.end = loc;
  return {};
}

}  // namespace detail

// Timestamps every action of `route`. A pickup happens at max(arrival, earliest).
// With `check`, throws InfeasibleRoute on capacity, precedence, detour or wait
// violations; without it only structural errors are reported.
inline Schedule simulate_route(const Route& route, const TravelMatrix& m, const RequestTable& table,
                               const RoutingParams& params, std::span<const OnboardRider> onboard = {},
                               bool check = true) {
  Schedule s;
  auto why = detail::run_schedule(route, m, table, params, onboard, check, s);
  if (!why.empty()) throw InfeasibleRoute("shuttle " + std::to_string(route.shuttle) + ": " + why);
  return s;
}

inline std::optional<Schedule> try_simulate_route(const Route& route, const TravelMatrix& m, const RequestTable& table,
                                                  const RoutingParams& params,
                                                  std::span<const OnboardRider> onboard = {}) {
  Schedule s;
  if (!detail::run_schedule(route, m, table, params, onboard, true, s).empty()) return std::nullopt;
  return s;
}

// What the route generator knows about one shuttle.
struct ShuttleAvailability {
  ShuttleId shuttle = 0;
  Location location;
  double free_time = 0.0;
  std::vector<RouteStopAction> committed;  // pickups/dropoffs that must keep their order
  std::vector<OnboardRider> onboard;
  bool accepts_new = true;
};

struct ShuttleRoutes {
  ShuttleId shuttle = 0;
  std::vector<Route> routes;  // routes[0] is the null route
};

namespace detail {

// Cheapest feasible insertion of request `r` (pickup then dropoff) into `base`.
inline std::optional<Route> cheapest_insertion(const Route& base, const Request& r, const TravelMatrix& m,
                                               const RequestTable& table, const RoutingParams& params,
                                               std::span<const OnboardRider> onboard) {
  std::optional<Route> best;
  const std::size_t n = base.actions.size();
  Route trial = base;
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = i; j <= n; ++j) {
      trial.actions.clear();
      trial.actions.insert(trial.actions.end(), base.actions.begin(), base.actions.begin() + i);
      trial.actions.push_back({r.pickup, ActionKind::pickup, r.id});
      trial.actions.insert(trial.actions.end(), base.actions.begin() + i, base.actions.begin() + j);
      trial.actions.push_back({r.dropoff, ActionKind::dropoff, r.id});
      trial.actions.insert(trial.actions.end(), base.actions.begin() + j, base.actions.end());
      auto s = try_simulate_route(trial, m, table, params, onboard);
      if (s && (!best || s->cost < best->cost)) {
        trial.cost = s->cost;
        best = trial;
      }
    }
  }
  if (best) {
    best->served = base.served;
    best->served.insert(std::upper_bound(best->served.begin(), best->served.end(), r.id), r.id);
    best->is_null = false;
  }
  return best;
}

}  // namespace detail

// Candidate columns for the master problem, per shuttle: the null route, every
// feasible single-request route, then pooled routes grown one cheapest insertion
// at a time (requests added in list order, so each subset is built once).
inline std::vector<ShuttleRoutes> generate_routes(std::span<const Request> unserved,
                                                  std::span<const ShuttleAvailability> fleet,
                                                  const TravelMatrix& m, const RequestTable& table,
                                                  const RoutingParams& params) {
  std::vector<ShuttleRoutes> out;
  out.reserve(fleet.size());
  for (const auto& av : fleet) {
    ShuttleRoutes sr{av.shuttle, {}};
    Route null_route;
    null_route.shuttle = av.shuttle;
    null_route.start_time = av.free_time;
    null_route.start = av.location;
    null_route.actions = av.committed;
    null_route.is_null = true;
    null_route.cost = simulate_route(null_route, m, table, params, av.onboard, false).cost;
    sr.routes.push_back(null_route);

    if (!av.accepts_new || unserved.empty() || params.max_requests < 1) {
      out.push_back(std::move(sr));
      continue;
    }

    struct Grown {
      Route route;
      std::size_t last;  // position in `unserved` of the last request added
    };
    std::vector<Grown> level;
    for (std::size_t k = 0; k < unserved.size(); ++k) {
      auto r = detail::cheapest_insertion(null_route, unserved[k], m, table, params, av.onboard);
      if (r) level.push_back({std::move(*r), k});
    }
    for (const auto& g : level) sr.routes.push_back(g.route);

    for (int depth = 2; depth <= params.max_requests && !level.empty(); ++depth) {
      std::vector<Grown> next;
      for (const auto& g : level)
        for (std::size_t k = g.last + 1; k < unserved.size(); ++k) {
          auto r = detail::cheapest_insertion(g.route, unserved[k], m, table, params, av.onboard);
          if (r) next.push_back({std::move(*r), k});
        }
      const double base_cost = null_route.cost;
      std::stable_sort(next.begin(), next.end(), [&](const Grown& a, const Grown& b) {
        double ka = (a.route.cost - base_cost) / static_cast<double>(a.route.served.size());
        double kb = (b.route.cost - base_cost) / static_cast<double>(b.route.served.size());
        if (ka != kb) return ka < kb;
        return a.route.served < b.route.served;
      });
      if (next.size() > params.beam_width) next.resize(params.beam_width);
      for (const auto& g : next) sr.routes.push_back(g.route);
      level = std::move(next);
    }
    out.push_back(std::move(sr));
  }
  return out;
}

}  // namespace mt
