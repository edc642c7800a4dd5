#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "demand.hpp"
#include "dispatch.hpp"
#include "driver.hpp"
#include "event_log.hpp"
#include "network.hpp"
#include "random.hpp"
#include "rebalance.hpp"
#include "routing.hpp"

namespace mt {

enum class Sfl { I = 1, II = 2, III = 3, IV = 4 };

inline const char* to_string(Sfl s) {
  switch (s) {
    case Sfl::I: return "I";
    case Sfl::II: return "II";
    case Sfl::III: return "III";
    case Sfl::IV: return "IV";
  }
  return "?";
}

inline Sfl parse_sfl(std::string_view s) {
  if (s == "I" || s == "1") return Sfl::I;
  if (s == "II" || s == "2") return Sfl::II;
  if (s == "III" || s == "3") return Sfl::III;
  if (s == "IV" || s == "4") return Sfl::IV;
  throw ConfigError("unknown SFL '" + std::string(s) + "' (allowed: I, II, III, IV)");
}

// Attributes per level: only I has driver delay; III and IV re-route en route;
// only IV moves its idle stops between shifts.
struct SflConfig {
  Sfl level = Sfl::II;

  bool driver_delay() const { return level == Sfl::I; }
  bool reroute() const { return level == Sfl::III || level == Sfl::IV; }
  bool relocate_idle() const { return level == Sfl::IV; }
};

enum class ShuttleStatus { idle, deadheading, serving, awaiting_driver };

inline const char* to_string(ShuttleStatus s) {
  switch (s) {
    case ShuttleStatus::idle: return "idle";
    case ShuttleStatus::deadheading: return "deadheading";
    case ShuttleStatus::serving: return "serving";
    case ShuttleStatus::awaiting_driver: return "awaiting_driver";
  }
  return "?";
}

struct ShuttleState {
  ShuttleId id = 0;
  Location position;  // as of the engine clock; a leg's start while moving
  std::deque<RouteStopAction> plan;
  std::vector<OnboardRider> onboard;
  int riders = 0;

  bool moving = false;
  TravelPath leg;           // toward plan.front().stop
  double leg_depart = 0.0;
  double ready_time = 0.0;  // earliest time of the next departure or stop action
  bool driver_pending = false;

  double odometer_km = 0.0;
  double empty_km = 0.0;
  double loaded_km = 0.0;
  double shared_km = 0.0;

  bool has_service_actions() const {
    return std::any_of(plan.begin(), plan.end(), [](const auto& a) { return a.kind != ActionKind::reposition; });
  }

  ShuttleStatus status() const {
    if (plan.empty()) return ShuttleStatus::idle;
    if (driver_pending) return ShuttleStatus::awaiting_driver;
    return has_service_actions() ? ShuttleStatus::serving : ShuttleStatus::deadheading;
  }
};

// Point reached `elapsed` seconds into `path`, and the distance covered so far.
inline Location location_along(const TravelPath& path, double elapsed, double* km = nullptr) {
  double covered = 0.0;
  Location at{};
  bool set = false;
  for (const auto& seg : path.view()) {
    if (elapsed >= seg.seconds) {
      elapsed -= seg.seconds;
      covered += seg.km;
      at = Location::between(seg.from, seg.to, seg.frac_end);
      set = true;
      continue;
    }
    const double share = seg.seconds > 0.0 ? elapsed / seg.seconds : 1.0;
    covered += share * seg.km;
    at = Location::between(seg.from, seg.to, seg.frac_begin + (seg.frac_end - seg.frac_begin) * share);
    set = true;
    break;
  }
  if (km) *km = covered;
  if (!set) throw ContractError("location_along: empty path");
  return at;
}

// Idle stops for one shift: the most frequent pickup stops (ties: earlier first
// request, then lower id), padded with previous idle stops in id order.
inline std::vector<StopIndex> relocate_idle_stops(std::span<const Request> shift_requests,
                                                  std::span<const StopIndex> current) {
  struct Origin {
    int count = 0;
    double first = 0.0;
  };
  std::map<StopIndex, Origin> origins;
  for (const auto& r : shift_requests) {
    auto [it, fresh] = origins.try_emplace(r.pickup, Origin{0, r.earliest});
    ++it->second.count;
    if (!fresh) it->second.first = std::min(it->second.first, r.earliest);
  }
  std::vector<std::pair<StopIndex, Origin>> ranked(origins.begin(), origins.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.count != b.second.count) return a.second.count > b.second.count;
    if (a.second.first != b.second.first) return a.second.first < b.second.first;
    return a.first < b.first;
  });
  std::vector<StopIndex> out;
  for (const auto& [s, o] : ranked) {
    if (out.size() == current.size()) break;
    out.push_back(s);
  }
  std::vector<StopIndex> prev(current.begin(), current.end());
  std::sort(prev.begin(), prev.end());
  for (StopIndex s : prev) {
    if (out.size() == current.size()) break;
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct EngineConfig {
  SflConfig sfl;
  int fleet = 4;
  RoutingParams routing;
  PenaltyParams penalty;
  MasterOptions master;
  double demand_window = 3600.0;  // L, seconds
  DriverModel driver{{0.0}, 300.0};
  std::uint64_t seed = 0;
  ServiceDay service;
  std::vector<double> shift_starts{0.0, 25200.0};
  bool rebalance = true;
  double max_extension = 86400.0;            // seconds past the service day before giving up
  std::vector<StopIndex> initial_positions;  // empty: round-robin over idle stops
};

struct SimulationResult {
  EventLog log;
  std::vector<ShuttleState> shuttles;
  std::int64_t epochs = 0;
  std::int64_t suboptimal_solves = 0;
  bool uneven_initial_placement = false;
};

// One scenario's discrete-event loop. Epoch tau batches requests with earliest
// time in [tau l, (tau + 1) l); at (tau + 1) l the fleet is advanced, the master
// problem solved over all unassigned requests, and idle shuttles rebalanced.
class Engine {
 public:
  Engine(const Network& net, const DemandDay& day, EngineConfig cfg, std::ostream* audit = nullptr)
      : net_(net), m_(net.matrix()), day_(day), cfg_(std::move(cfg)), audit_(audit),
        rng_(derive_seed(cfg_.seed, {"driver"})), idle_(net.idle_stops()) {
    if (cfg_.fleet < 1) throw ConfigError("fleet size must be >= 1");
    if (!(cfg_.penalty.epoch_length > 0.0)) throw ConfigError("epoch length must be > 0");
    if (cfg_.sfl.driver_delay() && cfg_.driver.samples.empty()) throw ConfigError("SFL I needs driver response samples");
    for (const auto& r : day_.requests) {
      if (r.riders > cfg_.routing.capacity)
        throw ConfigError("request " + std::to_string(r.id) + " has " + std::to_string(r.riders) +
                          " riders, more than the shuttle capacity " + std::to_string(cfg_.routing.capacity));
      table_.emplace(r.id, r);
    }
    init_fleet();
  }

  const std::vector<ShuttleState>& shuttles() const { return fleet_; }
  const std::vector<StopIndex>& idle_stops() const { return idle_; }
  double clock() const { return clock_; }
  const EventLog& log() const { return log_; }

  // Runs until every request is dropped off.
  SimulationResult run() {
    const double l = cfg_.penalty.epoch_length;
    const double cap = cfg_.service.length_seconds() + cfg_.max_extension;
    if (cfg_.sfl.relocate_idle() && !cfg_.shift_starts.empty() && cfg_.shift_starts.front() <= 0.0) {
      relocate(0.0, 0);
      if (cfg_.rebalance) rebalance(0.0);
    }
    for (std::int64_t tau = 0;; ++tau) {
      step_epoch(tau);
      ++result_.epochs;
      if (next_request_ >= day_.requests.size() && completed_ == day_.requests.size()) break;
      if (static_cast<double>(tau + 1) * l > cap)
        throw Error("horizon cap reached with " + std::to_string(day_.requests.size() - completed_) +
                    " requests incomplete");
    }
    result_.log = log_;
    result_.shuttles = fleet_;
    return result_;
  }

  void step_epoch(std::int64_t tau) {
    const double l = cfg_.penalty.epoch_length;
    const double t0 = static_cast<double>(tau) * l;
    const double t1 = static_cast<double>(tau + 1) * l;
    std::vector<Event> window;
    while (next_request_ < day_.requests.size() && day_.requests[next_request_].earliest < t1) {
      const auto& r = day_.requests[next_request_++];
      pending_.push_back(r.id);
      window.push_back({r.earliest, event::received,
                        {{"request", r.id},
                         {"user", r.user_id},
                         {"p", net_.id_of(r.pickup)},
                         {"d", net_.id_of(r.dropoff)},
                         {"e", r.earliest},
                         {"riders", r.riders}}});
    }
    for (auto& s : fleet_) advance(s, t1, window);
    std::stable_sort(window.begin(), window.end(), [](const Event& a, const Event& b) { return a.time < b.time; });
    for (auto& e : window) {
      if (e.type == event::dropoff) ++completed_;
      log_.events.push_back(std::move(e));
    }
    clock_ = t1;

    if (cfg_.sfl.relocate_idle()) {
      for (std::size_t k = 1; k < cfg_.shift_starts.size(); ++k)
        if (cfg_.shift_starts[k] > t0 && cfg_.shift_starts[k] <= t1) relocate(t1, k);
    }
    if (!pending_.empty()) dispatch(t0, t1, tau);
    if (cfg_.rebalance) rebalance(t1);
  }

  // Where shuttle `v` will be at time t >= clock if it follows its plan.
  Location predicted_location(ShuttleId v, double t) const {
    ShuttleState copy = fleet_.at(static_cast<std::size_t>(v));
    std::vector<Event> discard;
    advance(copy, t, discard);
    if (!copy.moving) return copy.position;
    return location_along(copy.leg, t - copy.leg_depart);
  }

  // Route-generation view of every shuttle at time t (the engine clock).
  std::vector<ShuttleAvailability> availability(double t) const {
    std::vector<ShuttleAvailability> out;
    for (const auto& s : fleet_) {
      ShuttleAvailability a;
      a.shuttle = s.id;
      if (cfg_.sfl.reroute()) {
        ShuttleState copy = s;
        std::vector<Event> discard;
        advance(copy, t, discard);
        a.location = copy.moving ? location_along(copy.leg, t - copy.leg_depart) : copy.position;
        a.free_time = t;
        for (const auto& act : copy.plan)
          if (act.kind != ActionKind::reposition) a.committed.push_back(act);
        a.onboard = copy.onboard;
        a.accepts_new = copy.riders < cfg_.routing.capacity;
      } else {
        // Committed: free where and when the current plan ends.
        ShuttleState copy = s;
        std::vector<Event> discard;
        double end = std::max(t, copy.ready_time);
        while (!copy.plan.empty()) {
          end = next_activity(copy);
          advance(copy, end, discard);
        }
        a.location = copy.position;
        a.free_time = std::max({t, end, copy.ready_time});
      }
      out.push_back(std::move(a));
    }
    return out;
  }

 private:
  void init_fleet() {
    const auto& idle = net_.idle_stops();
    fleet_.resize(static_cast<std::size_t>(cfg_.fleet));
    if (!cfg_.initial_positions.empty() && cfg_.initial_positions.size() != fleet_.size())
      throw ConfigError("initial positions must list one stop per shuttle");
    result_.uneven_initial_placement = cfg_.initial_positions.empty() && fleet_.size() % idle.size() != 0;
    for (std::size_t v = 0; v < fleet_.size(); ++v) {
      auto& s = fleet_[v];
      s.id = static_cast<ShuttleId>(v);
      StopIndex at = cfg_.initial_positions.empty() ? idle[v % idle.size()] : cfg_.initial_positions[v];
      if (at >= net_.size()) throw ConfigError("initial position outside the network");
      s.position = Location::at(at);
      log_.add(0.0, event::shuttle_init, {{"shuttle", s.id}, {"stop", net_.id_of(at)}});
    }
  }

  // Time of the shuttle's next state change if undisturbed.
  double next_activity(const ShuttleState& s) const {
    if (s.moving) return s.leg_depart + s.leg.seconds;
    return s.ready_time;
  }

  void travel(ShuttleState& s, double km, int riders) const {
    s.odometer_km += km;
    if (riders == 0)
      s.empty_km += km;
    else
      s.loaded_km += km;
    if (riders >= 2) s.shared_km += km;
  }

  // Moves `s` forward to t_end, emitting the events that happen on the way.
  void advance(ShuttleState& s, double t_end, std::vector<Event>& out) const {
    while (!s.plan.empty()) {
      const auto& a = s.plan.front();
      if (s.moving) {
        const double arrival = s.leg_depart + s.leg.seconds;
        if (arrival > t_end) return;
        travel(s, s.leg.km, s.riders);
        s.moving = false;
        s.position = Location::at(a.stop);
        s.ready_time = arrival;
        if (a.kind == ActionKind::pickup) s.ready_time = std::max(arrival, lookup(table_, a.request).earliest);
        out.push_back({arrival, event::arrival,
                       {{"shuttle", s.id}, {"stop", net_.id_of(a.stop)}, {"km", s.leg.km}, {"riders", s.riders}}});
        continue;
      }
      if (s.ready_time > t_end) return;
      const double t = s.ready_time;
      s.driver_pending = false;
      if (s.position.at_stop() && s.position.stop() == a.stop) {
        if (a.kind == ActionKind::pickup) {
          const auto& r = lookup(table_, a.request);
          s.onboard.push_back({r.id, t});
          s.riders += r.riders;
          out.push_back({t, event::pickup,
                         {{"shuttle", s.id}, {"request", r.id}, {"stop", net_.id_of(a.stop)}, {"riders", s.riders}}});
        } else if (a.kind == ActionKind::dropoff) {
          const auto& r = lookup(table_, a.request);
          auto it = std::find_if(s.onboard.begin(), s.onboard.end(), [&](const auto& o) { return o.request == r.id; });
          if (it == s.onboard.end()) throw ContractError("dropoff of request not onboard: " + std::to_string(r.id));
          s.onboard.erase(it);
          s.riders -= r.riders;
          out.push_back({t, event::dropoff,
                         {{"shuttle", s.id}, {"request", r.id}, {"stop", net_.id_of(a.stop)}, {"riders", s.riders}}});
        }
        s.plan.pop_front();
        continue;
      }
      s.leg = travel_path(s.position, a.stop, m_, cfg_.routing.diversion);
      s.leg_depart = t;
      s.moving = true;
      nlohmann::json body{{"shuttle", s.id}, {"to", net_.id_of(a.stop)}, {"purpose", to_string(a.kind)}};
      if (s.position.at_stop()) {
        body["from"] = net_.id_of(s.position.stop());
      } else {
        body["from_edge"] = {net_.id_of(s.position.from), net_.id_of(s.position.to), s.position.fraction};
      }
      out.push_back({t, event::departure, std::move(body)});
    }
  }

  // Ends the current leg at the engine clock, part-way if need be.
  void interrupt(ShuttleState& s, double t) {
    if (!s.moving) return;
    double km = 0.0;
    Location at = location_along(s.leg, t - s.leg_depart, &km);
    travel(s, km, s.riders);
    nlohmann::json body{{"shuttle", s.id}, {"km", km}, {"riders", s.riders}};
    if (at.at_stop()) {
      body["at"] = net_.id_of(at.stop());
    } else {
      body["at_edge"] = {net_.id_of(at.from), net_.id_of(at.to), at.fraction};
    }
    log_.add(t, event::reroute, std::move(body));
    s.position = at;
    s.moving = false;
    s.ready_time = t;
  }

  // New plan for `s` at time t, keeping the current leg when it already heads
  // to the first stop.
  void replan(ShuttleState& s, std::deque<RouteStopAction> plan, double t) {
    if (s.moving && (plan.empty() || plan.front().stop != s.plan.front().stop)) interrupt(s, t);
    s.plan = std::move(plan);
    if (!s.moving) s.ready_time = std::max(s.ready_time, t);
  }

  void maybe_delay(ShuttleState& s, double t) {
    if (!cfg_.sfl.driver_delay()) return;
    const double d = sample_driver_delay(cfg_.driver, rng_);
    s.ready_time = t + d;
    if (d > 0.0) {
      s.driver_pending = true;
      log_.add(t, event::driver_response, {{"shuttle", s.id}, {"delay", d}});
    }
  }

  void dispatch(double t0, double t1, std::int64_t tau) {
    std::vector<Request> unserved;
    for (RequestId id : pending_) unserved.push_back(lookup(table_, id));
    std::sort(unserved.begin(), unserved.end(), request_order);
    auto fleet_view = availability(t1);
    auto routes = generate_routes(unserved, fleet_view, m_, table_, cfg_.routing);

    MasterInstance inst;
    std::map<RequestId, std::size_t> pos;
    for (std::size_t i = 0; i < unserved.size(); ++i) {
      inst.requests.push_back(unserved[i].id);
      inst.penalties.push_back(penalty(cfg_.penalty, t0, unserved[i].earliest));
      pos[unserved[i].id] = i;
    }
    for (const auto& sr : routes) {
      inst.shuttles.push_back(sr.shuttle);
      std::vector<Column> cols;
      for (const auto& r : sr.routes) {
        Column c{r.cost, {}};
        for (RequestId id : r.served) c.covers.push_back(pos.at(id));
        std::sort(c.covers.begin(), c.covers.end());
        cols.push_back(std::move(c));
      }
      inst.columns.push_back(std::move(cols));
    }
    auto sol = solve_master(inst, cfg_.master);
    if (!sol.optimal) ++result_.suboptimal_solves;
    if (audit_) write_master_audit(t1, tau, inst, sol);

    std::size_t served = 0;
    for (std::size_t v = 0; v < routes.size(); ++v) {
      const Route& route = routes[v].routes[sol.selected[v]];
      if (route.is_null) continue;
      auto& s = fleet_[static_cast<std::size_t>(route.shuttle)];
      const bool was_idle = s.plan.empty() && !s.moving;
      if (cfg_.sfl.reroute()) {
        replan(s, {route.actions.begin(), route.actions.end()}, t1);
      } else {
        s.plan.insert(s.plan.end(), route.actions.begin(), route.actions.end());
        if (!s.moving) s.ready_time = std::max(s.ready_time, t1);
      }
      if (was_idle) maybe_delay(s, t1);
      for (RequestId id : route.served) {
        log_.add(t1, event::assigned, {{"request", id}, {"shuttle", s.id}});
        pending_.erase(std::find(pending_.begin(), pending_.end(), id));
        ++served;
      }
    }
    log_.add(t1, event::epoch_summary,
             {{"epoch", tau},
              {"requests", inst.requests.size()},
              {"served", served},
              {"objective", sol.objective},
              {"route_cost", sol.route_cost},
              {"penalty_cost", sol.penalty_cost},
              {"optimal", sol.optimal},
              {"nodes", sol.nodes}});
  }

  bool at_idle_stop(const ShuttleState& s) const {
    return !s.moving && s.position.at_stop() && std::binary_search(idle_.begin(), idle_.end(), s.position.stop());
  }

  void rebalance(double t) {
    std::vector<IdleShuttle> off_stop;
    for (const auto& s : fleet_) {
      const bool idle = s.plan.empty() && !s.moving;
      const bool deadheading = cfg_.sfl.reroute() && !s.plan.empty() && !s.has_service_actions();
      if ((idle && !at_idle_stop(s)) || deadheading) {
        Location at = s.moving ? location_along(s.leg, t - s.leg_depart) : s.position;
        off_stop.push_back({s.id, at});
      }
    }
    if (off_stop.empty()) return;
    std::vector<Request> recent;
    for (std::size_t i = 0; i < next_request_; ++i) {
      const auto& r = day_.requests[i];
      if (r.earliest > t - cfg_.demand_window) recent.push_back(r);
    }
    auto res = rebalance_step(off_stop, recent, idle_, m_, cfg_.routing.diversion, cfg_.demand_window, t);
    if (audit_) write_rebalance_audit(t, res);
    for (const auto& mv : res.plan.moves) {
      auto& s = fleet_[static_cast<std::size_t>(mv.shuttle)];
      const bool was_idle = s.plan.empty() && !s.moving;
      if (!was_idle && s.plan.back().stop == mv.stop && s.plan.size() == 1) continue;
      if (s.position.at_stop() && !s.moving && s.position.stop() == mv.stop) continue;
      replan(s, {RouteStopAction{mv.stop, ActionKind::reposition, -1}}, t);
      if (was_idle) maybe_delay(s, t);
      log_.add(t, event::rebalance_move, {{"shuttle", s.id}, {"stop", net_.id_of(mv.stop)}, {"travel", mv.travel}});
    }
  }

  void relocate(double t, std::size_t shift) {
    const double begin = cfg_.shift_starts[shift];
    const double end =
        shift + 1 < cfg_.shift_starts.size() ? cfg_.shift_starts[shift + 1] : std::numeric_limits<double>::infinity();
    std::vector<Request> in_shift;
    for (const auto& r : day_.requests)
      if (r.earliest >= begin && r.earliest < end) in_shift.push_back(r);
    idle_ = relocate_idle_stops(in_shift, idle_);
    nlohmann::json stops = nlohmann::json::array();
    for (StopIndex s : idle_) stops.push_back(net_.id_of(s));
    log_.add(t, event::idle_stop_relocation, {{"shift", shift}, {"stops", stops}});
  }

  void write_master_audit(double t, std::int64_t tau, const MasterInstance& inst, const MasterSolution& sol) {
    nlohmann::json cols = nlohmann::json::array();
    for (std::size_t v = 0; v < inst.columns.size(); ++v) {
      nlohmann::json list = nlohmann::json::array();
      for (const auto& c : inst.columns[v]) list.push_back({{"cost", c.cost}, {"covers", c.covers}});
      cols.push_back({{"shuttle", inst.shuttles[v]}, {"columns", list}});
    }
    nlohmann::json j{{"kind", "dispatch"},
                     {"t", t},
                     {"epoch", tau},
                     {"requests", inst.requests},
                     {"penalties", inst.penalties},
                     {"shuttles", cols},
                     {"selected", sol.selected},
                     {"unserved", sol.unserved},
                     {"objective", sol.objective},
                     {"optimal", sol.optimal}};
    *audit_ << j.dump() << '\n';
  }

  void write_rebalance_audit(double t, const RebalanceResult& res) {
    nlohmann::json stops = nlohmann::json::array();
    for (StopIndex s : res.counts.stops) stops.push_back(net_.id_of(s));
    nlohmann::json moves = nlohmann::json::array();
    for (const auto& mv : res.plan.moves)
      moves.push_back({{"shuttle", mv.shuttle}, {"stop", net_.id_of(mv.stop)}, {"travel", mv.travel}});
    nlohmann::json j{{"kind", "rebalance"},       {"t", t},
                     {"stops", stops},            {"gamma", res.counts.gamma},
                     {"zeta", res.allocation.zeta}, {"tied", res.allocation.tied},
                     {"objective", res.allocation.objective}, {"moves", moves}};
    *audit_ << j.dump() << '\n';
  }

  const Network& net_;
  const TravelMatrix& m_;
  const DemandDay& day_;
  EngineConfig cfg_;
  std::ostream* audit_;
  Rng rng_;
  RequestTable table_;
  std::vector<StopIndex> idle_;
  std::vector<ShuttleState> fleet_;
  std::vector<RequestId> pending_;
  std::size_t next_request_ = 0;
  std::size_t completed_ = 0;
  double clock_ = 0.0;
  EventLog log_;
  SimulationResult result_;
};

inline SimulationResult simulate(const Network& net, const DemandDay& day, const EngineConfig& cfg,
                                 std::ostream* audit = nullptr) {
  return Engine(net, day, cfg, audit).run();
}

}  // namespace mt
