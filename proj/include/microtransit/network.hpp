#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace mt {

using StopId = std::int64_t;      // external identifier, as written in zone files
using StopIndex = std::size_t;    // dense position; ascending index == ascending id
using RequestId = std::int64_t;
using ShuttleId = int;

enum class StopKind { fixed_transit, reach_virtual };

inline const char* to_string(StopKind k) {
  return k == StopKind::fixed_transit ? "fixed-transit" : "reach-virtual";
}

struct Stop {
  StopId id = 0;
  double lat = 0.0;
  double lon = 0.0;
  StopKind kind = StopKind::reach_virtual;
  bool is_idle = false;

  friend bool operator==(const Stop&, const Stop&) = default;
};

// Dense row-major travel seconds and kilometres between stops.
class TravelMatrix {
 public:
  TravelMatrix() = default;
  explicit TravelMatrix(std::size_t n) : n_(n), time_(n * n, 0.0), dist_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }

  double time(StopIndex from, StopIndex to) const { return time_[from * n_ + to]; }
  double distance(StopIndex from, StopIndex to) const { return dist_[from * n_ + to]; }

  void set(StopIndex from, StopIndex to, double seconds, double km) {
    time_[from * n_ + to] = seconds;
    dist_[from * n_ + to] = km;
  }
  void set_time(StopIndex from, StopIndex to, double seconds) { time_[from * n_ + to] = seconds; }
  void set_distance(StopIndex from, StopIndex to, double km) { dist_[from * n_ + to] = km; }

  // Every violated invariant, each naming the offending cell by stop id.
  std::vector<std::string> validate(std::span<const StopId> ids) const {
    std::vector<std::string> issues;
    auto name = [&](StopIndex i) { return i < ids.size() ? std::to_string(ids[i]) : std::to_string(i); };
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        for (int which = 0; which < 2; ++which) {
          double v = which == 0 ? time(i, j) : distance(i, j);
          const char* label = which == 0 ? "time" : "distance";
          std::string cell = std::string(label) + "[" + name(i) + "][" + name(j) + "]";
          if (!std::isfinite(v)) {
            issues.push_back(cell + " is not finite");
          } else if (v < 0.0) {
            issues.push_back(cell + " is negative (" + std::to_string(v) + ")");
          } else if (i == j && v != 0.0) {
            issues.push_back(cell + " is a non-zero diagonal entry");
          }
        }
      }
    }
    return issues;
  }

  friend bool operator==(const TravelMatrix&, const TravelMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> time_;
  std::vector<double> dist_;
};

// A stop, or a point part-way along the direct leg from -> to. The fraction is
// measured in travel time along that leg.
struct Location {
  StopIndex from = 0;
  StopIndex to = 0;
  double fraction = 0.0;

  static Location at(StopIndex s) { return {s, s, 0.0}; }

  static Location between(StopIndex a, StopIndex b, double f) {
    if (a == b || f <= 0.0) return at(a);
    if (f >= 1.0) return at(b);
    return {a, b, f};
  }

  bool at_stop() const noexcept { return from == to; }
  StopIndex stop() const noexcept { return from; }

  friend bool operator==(const Location&, const Location&) = default;
};

// How a vehicle part-way along a leg reaches another stop.
enum class DiversionMode {
  continue_ahead,       // finish the current leg, then travel on
  retrace_or_continue,  // the faster of finishing the leg or turning back to its start
};

// One piece of a path, expressed as a fraction interval of the leg from -> to.
struct PathSegment {
  StopIndex from = 0;
  StopIndex to = 0;
  double frac_begin = 0.0;
  double frac_end = 1.0;
  double seconds = 0.0;
  double km = 0.0;
};

struct TravelPath {
  std::array<PathSegment, 2> segments{};
  std::size_t count = 0;
  double seconds = 0.0;
  double km = 0.0;

  std::span<const PathSegment> view() const { return {segments.data(), count}; }

  void push(const PathSegment& s) {
    segments[count++] = s;
    seconds += s.seconds;
    km += s.km;
  }
};

inline PathSegment full_leg(const TravelMatrix& m, StopIndex a, StopIndex b) {
  return {a, b, 0.0, 1.0, m.time(a, b), m.distance(a, b)};
}

inline TravelPath travel_path(const Location& loc, StopIndex dest, const TravelMatrix& m,
                              DiversionMode mode = DiversionMode::retrace_or_continue) {
  TravelPath path;
  if (loc.at_stop()) {
    if (loc.stop() != dest) path.push(full_leg(m, loc.stop(), dest));
    return path;
  }
  const StopIndex a = loc.from, b = loc.to;
  const double f = loc.fraction;

  TravelPath ahead;
  ahead.push({a, b, f, 1.0, (1.0 - f) * m.time(a, b), (1.0 - f) * m.distance(a, b)});
  if (dest != b) ahead.push(full_leg(m, b, dest));
  if (mode == DiversionMode::continue_ahead) return ahead;

  TravelPath back;
  back.push({a, b, f, 0.0, f * m.time(a, b), f * m.distance(a, b)});
  if (dest != a) back.push(full_leg(m, a, dest));
  return back.seconds < ahead.seconds ? back : ahead;
}

inline double travel_time(const Location& loc, StopIndex dest, const TravelMatrix& m,
                          DiversionMode mode = DiversionMode::retrace_or_continue) {
  return travel_path(loc, dest, m, mode).seconds;
}

// Closest idle stop to p by travel time from the idle stop to p. `idle` must be
// ascending so the first minimum is also the smallest stop id.
inline StopIndex nearest_idle_stop(StopIndex p, const TravelMatrix& m, std::span<const StopIndex> idle) {
  if (p >= m.size()) throw InvalidInput("unknown stop index " + std::to_string(p));
  if (idle.empty()) throw InvalidInput("idle stop set is empty");
  StopIndex best = idle.front();
  double best_time = m.time(best, p);
  for (StopIndex s : idle.subspan(1)) {
    if (s >= m.size()) throw InvalidInput("unknown idle stop index " + std::to_string(s));
    double t = m.time(s, p);
    if (t < best_time) {
      best = s;
      best_time = t;
    }
  }
  return best;
}

// Stops plus matrices, validated and ordered by stop id. Immutable after construction.
class Network {
 public:
  Network() = default;

  // `matrix` rows/columns follow the order of `stops`.
  Network(std::vector<Stop> stops, const TravelMatrix& matrix) {
    std::vector<std::string> issues;
    if (matrix.size() != stops.size()) {
      issues.push_back("matrix dimension " + std::to_string(matrix.size()) + " does not match stop count " +
                       std::to_string(stops.size()));
      throw ValidationError(std::move(issues));
    }
    std::vector<std::size_t> order(stops.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return stops[x].id < stops[y].id; });

    stops_.reserve(stops.size());
    for (auto i : order) stops_.push_back(stops[i]);
    matrix_ = TravelMatrix(stops_.size());
    for (std::size_t i = 0; i < order.size(); ++i)
      for (std::size_t j = 0; j < order.size(); ++j)
        matrix_.set(i, j, matrix.time(order[i], order[j]), matrix.distance(order[i], order[j]));

    for (std::size_t i = 0; i < stops_.size(); ++i) {
      if (i > 0 && stops_[i].id == stops_[i - 1].id)
        issues.push_back("duplicate stop id " + std::to_string(stops_[i].id));
      if (stops_[i].is_idle) idle_.push_back(i);
      ids_.push_back(stops_[i].id);
      index_.emplace(stops_[i].id, i);
    }
    if (idle_.empty()) issues.push_back("no idle stops flagged (is_idle)");
    auto cell_issues = matrix_.validate(ids_);
    issues.insert(issues.end(), cell_issues.begin(), cell_issues.end());
    if (!issues.empty()) throw ValidationError(std::move(issues));
  }

  const std::vector<Stop>& stops() const noexcept { return stops_; }
  const TravelMatrix& matrix() const noexcept { return matrix_; }
  const std::vector<StopIndex>& idle_stops() const noexcept { return idle_; }
  const std::vector<StopId>& ids() const noexcept { return ids_; }
  std::size_t size() const noexcept { return stops_.size(); }

  bool contains(StopId id) const { return index_.count(id) != 0; }

  StopIndex index_of(StopId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw InvalidInput("unknown stop id " + std::to_string(id));
    return it->second;
  }

  StopId id_of(StopIndex i) const { return stops_.at(i).id; }

  StopIndex nearest_idle(StopIndex p) const { return nearest_idle_stop(p, matrix_, idle_); }

  friend bool operator==(const Network& a, const Network& b) {
    return a.stops_ == b.stops_ && a.matrix_ == b.matrix_;
  }

 private:
  std::vector<Stop> stops_;
  TravelMatrix matrix_;
  std::vector<StopIndex> idle_;
  std::vector<StopId> ids_;
  std::map<StopId, StopIndex> index_;
};

}  // namespace mt
