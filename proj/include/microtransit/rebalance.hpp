#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "assignment.hpp"
#include "demand.hpp"
#include "network.hpp"

namespace mt {

// Recent requests per idle stop.
struct DemandCounts {
  std::vector<StopIndex> stops;  // idle stops, ascending
  std::vector<int> gamma;        // parallel to stops
  double window = 3600.0;
  double as_of = 0.0;

  int total() const {
    int t = 0;
    for (int g : gamma) t += g;
    return t;
  }
};

// Requests with earliest time in (as_of - window, as_of], served or not.
inline std::vector<Request> recent_requests(const DemandDay& day, double as_of, double window) {
  std::vector<Request> out;
  for (const auto& r : day.requests)
    if (r.earliest > as_of - window && r.earliest <= as_of) out.push_back(r);
  return out;
}

// Counts each request at the idle stop nearest its pickup (within `idle`).
inline DemandCounts compute_gamma(std::span<const Request> recent, std::span<const StopIndex> idle,
                                  const TravelMatrix& m, double window = 3600.0, double as_of = 0.0) {
  DemandCounts c;
  c.stops.assign(idle.begin(), idle.end());
  c.gamma.assign(idle.size(), 0);
  c.window = window;
  c.as_of = as_of;
  if (recent.empty()) return c;
  for (const auto& r : recent) {
    StopIndex s = nearest_idle_stop(r.pickup, m, idle);
    auto it = std::lower_bound(c.stops.begin(), c.stops.end(), s);
    ++c.gamma[static_cast<std::size_t>(it - c.stops.begin())];
  }
  return c;
}

// Desired idle shuttles per idle stop. When several allocations are optimal,
// `lower`/`upper` bound the counts that keep the objective optimal and
// `tied` is set; `zeta` is the canonical one (extra shuttles to lowest ids).
struct Allocation {
  std::vector<int> zeta;
  double objective = 0.0;
  std::vector<std::vector<int>> optima;  // every optimal allocation found (includes zeta)
  std::vector<int> lower;
  std::vector<int> upper;
  bool tied = false;
};

inline double allocation_objective(std::span<const int> gamma, std::span<const int> zeta) {
  double obj = 0.0;
  for (std::size_t s = 0; s < gamma.size(); ++s)
    obj += static_cast<double>(gamma[s]) / std::max(0.5, static_cast<double>(zeta[s]));
  return obj;
}

namespace detail {

// Saving from raising a stop's count from z to z + 1, kept as an exact fraction:
// gamma (z = 0, from 2*gamma down to gamma) or gamma / (z (z + 1)).
struct Saving {
  std::int64_t num = 0;
  std::int64_t den = 1;
};

inline Saving saving(int gamma, int z) {
  return z == 0 ? Saving{gamma, 1} : Saving{gamma, static_cast<std::int64_t>(z) * (z + 1)};
}

inline int compare(Saving a, Saving b) {
  const std::int64_t l = a.num * b.den, r = b.num * a.den;
  return l < r ? -1 : (l > r ? 1 : 0);
}

inline void enumerate_subsets(const std::vector<std::size_t>& items, std::size_t pick, std::size_t from,
                              std::vector<int>& cur, std::vector<std::vector<int>>& out, std::size_t cap) {
  if (out.size() >= cap) return;
  if (pick == 0) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = from; i + pick <= items.size(); ++i) {
    ++cur[items[i]];
    enumerate_subsets(items, pick - 1, i + 1, cur, out, cap);
    --cur[items[i]];
  }
}

inline void enumerate_compositions(const std::vector<std::size_t>& items, int left, std::size_t pos,
                                   std::vector<int>& cur, std::vector<std::vector<int>>& out, std::size_t cap) {
  if (out.size() >= cap) return;
  if (pos + 1 == items.size()) {
    cur[items[pos]] += left;
    out.push_back(cur);
    cur[items[pos]] -= left;
    return;
  }
  for (int x = left; x >= 0; --x) {
    cur[items[pos]] += x;
    enumerate_compositions(items, left - x, pos + 1, cur, out, cap);
    cur[items[pos]] -= x;
  }
}

}  // namespace detail

// Minimises sum gamma_s / max(0.5, zeta_s) with sum zeta_s = k. The per-stop
// cost is convex in zeta_s, so taking the k largest marginal savings is optimal;
// the k-th saving is the threshold that separates forced from tied units.
inline Allocation allocate(std::span<const int> gamma, int k, std::size_t optima_cap = 10000) {
  if (k < 0) throw ContractError("allocate: negative shuttle count");
  const std::size_t n = gamma.size();
  for (int g : gamma)
    if (g < 0) throw ContractError("allocate: negative demand count");
  Allocation a;
  a.zeta.assign(n, 0);
  a.lower.assign(n, 0);
  a.upper.assign(n, 0);
  if (k == 0) {
    a.objective = allocation_objective(gamma, a.zeta);
    a.optima.push_back(a.zeta);
    return a;
  }
  if (n == 0) throw ContractError("allocate: no idle stops for " + std::to_string(k) + " shuttles");

  std::vector<int> greedy(n, 0);
  detail::Saving threshold;
  for (int step = 0; step < k; ++step) {
    std::size_t best = 0;
    for (std::size_t s = 1; s < n; ++s)
      if (detail::compare(detail::saving(gamma[s], greedy[s]), detail::saving(gamma[best], greedy[best])) > 0)
        best = s;
    threshold = detail::saving(gamma[best], greedy[best]);
    ++greedy[best];
  }

  std::vector<int> forced(n, 0);
  std::vector<std::size_t> tie_stops;
  int forced_total = 0;
  for (std::size_t s = 0; s < n; ++s) {
    int z = 0;
    while (z < greedy[s] && detail::compare(detail::saving(gamma[s], z), threshold) > 0) ++z;
    forced[s] = z;
    forced_total += z;
    if (detail::compare(detail::saving(gamma[s], z), threshold) == 0) tie_stops.push_back(s);
  }
  const int extra = k - forced_total;
  const std::size_t ties = tie_stops.size();

  a.lower = forced;
  a.upper = forced;
  std::vector<int> cur = forced;
  if (threshold.num > 0) {
    // At most one unit per stop sits exactly on a positive threshold.
    for (std::size_t i = 0; i < ties; ++i) {
      if (static_cast<std::size_t>(extra) == ties) a.lower[tie_stops[i]] += 1;
      a.upper[tie_stops[i]] += 1;
      if (static_cast<int>(i) < extra) a.zeta[tie_stops[i]] = 1;
    }
    detail::enumerate_subsets(tie_stops, static_cast<std::size_t>(extra), 0, cur, a.optima, optima_cap);
  } else {
    // Zero threshold: extra shuttles go to zero-demand stops, any split is
    // optimal. Bounds describe the balanced (round-robin) splits.
    const int q = extra / static_cast<int>(ties);
    const int rem = extra % static_cast<int>(ties);
    for (std::size_t i = 0; i < ties; ++i) {
      a.lower[tie_stops[i]] += q;
      a.upper[tie_stops[i]] += q + (rem > 0 ? 1 : 0);
      a.zeta[tie_stops[i]] = q + (static_cast<int>(i) < rem ? 1 : 0);
    }
    detail::enumerate_compositions(tie_stops, extra, 0, cur, a.optima, optima_cap);
  }
  for (std::size_t s = 0; s < n; ++s) a.zeta[s] += forced[s];
  a.tied = a.lower != a.upper;
  a.objective = allocation_objective(gamma, a.zeta);
  return a;
}

struct IdleShuttle {
  ShuttleId id = 0;
  Location location;
};

struct RelocationMove {
  ShuttleId shuttle = 0;
  StopIndex stop = 0;
  double travel = 0.0;
};

struct RelocationPlan {
  std::vector<RelocationMove> moves;  // in the order of the input shuttles
  double total_travel = 0.0;
};

// Minimum total travel placement of shuttles onto idle stops with per-stop counts
// in [lower_s, upper_s]. Exact counts (lower == upper) give the plain relocation
// model; a +1 slack on tied stops gives the tie-breaking variant. Among optimal
// placements, ones keeping more shuttles where they already are win.
inline RelocationPlan assign(std::span<const IdleShuttle> shuttles, std::span<const StopIndex> idle,
                             std::span<const int> lower, std::span<const int> upper, const TravelMatrix& m,
                             DiversionMode mode = DiversionMode::retrace_or_continue) {
  if (lower.size() != idle.size() || upper.size() != idle.size()) throw ContractError("assign: bounds size mismatch");
  int sum_lower = 0, sum_upper = 0;
  for (std::size_t s = 0; s < idle.size(); ++s) {
    if (lower[s] < 0 || upper[s] < lower[s]) throw ContractError("assign: invalid bounds");
    sum_lower += lower[s];
    sum_upper += upper[s];
  }
  const int k = static_cast<int>(shuttles.size());
  if (k < sum_lower || k > sum_upper)
    throw ContractError("assign: " + std::to_string(k) + " shuttles cannot meet bounds [" + std::to_string(sum_lower) +
                        ", " + std::to_string(sum_upper) + "]");
  RelocationPlan plan;
  if (k == 0) return plan;

  // Columns: mandatory slots then optional ones. Dummy rows soak up the optional
  // slots left empty and may not take a mandatory one.
  struct Slot {
    std::size_t stop_pos;
    bool mandatory;
  };
  std::vector<Slot> slots;
  for (std::size_t s = 0; s < idle.size(); ++s) {
    for (int c = 0; c < lower[s]; ++c) slots.push_back({s, true});
    for (int c = lower[s]; c < upper[s]; ++c) slots.push_back({s, false});
  }
  const std::size_t size = slots.size();
  std::vector<std::vector<double>> rho(shuttles.size(), std::vector<double>(idle.size()));
  double big = 1.0;
  for (std::size_t v = 0; v < shuttles.size(); ++v)
    for (std::size_t s = 0; s < idle.size(); ++s) {
      rho[v][s] = travel_time(shuttles[v].location, idle[s], m, mode);
      big += rho[v][s];
    }
  big *= 4.0;
  std::vector<std::vector<LexCost>> cost(size, std::vector<LexCost>(size));
  for (std::size_t r = 0; r < size; ++r)
    for (std::size_t c = 0; c < size; ++c) {
      if (r < shuttles.size()) {
        double t = rho[r][slots[c].stop_pos];
        cost[r][c] = {t, t == 0.0 ? 0.0 : 1.0};
      } else {
        cost[r][c] = slots[c].mandatory ? LexCost{big, 0.0} : LexCost{};
      }
    }
  auto match = solve_assignment(cost);
  for (std::size_t v = 0; v < shuttles.size(); ++v) {
    const auto& slot = slots[match[v]];
    plan.moves.push_back({shuttles[v].id, idle[slot.stop_pos], rho[v][slot.stop_pos]});
    plan.total_travel += rho[v][slot.stop_pos];
  }
  for (std::size_t r = shuttles.size(); r < size; ++r)
    if (slots[match[r]].mandatory) throw ContractError("assign: bounds infeasible");
  return plan;
}

struct RebalanceResult {
  DemandCounts counts;
  Allocation allocation;
  RelocationPlan plan;
};

// Demand counts -> allocation -> placement, over idle shuttles that are not at an
// idle stop. Ties between allocations are settled by travel time in the placement.
inline RebalanceResult rebalance_step(std::span<const IdleShuttle> off_stop, std::span<const Request> recent,
                                      std::span<const StopIndex> idle, const TravelMatrix& m,
                                      DiversionMode mode = DiversionMode::retrace_or_continue,
                                      double window = 3600.0, double as_of = 0.0) {
  RebalanceResult res;
  res.counts = compute_gamma(recent, idle, m, window, as_of);
  res.allocation = allocate(res.counts.gamma, static_cast<int>(off_stop.size()));
  if (off_stop.empty()) return res;
  if (res.allocation.tied)
    res.plan = assign(off_stop, idle, res.allocation.lower, res.allocation.upper, m, mode);
  else
    res.plan = assign(off_stop, idle, res.allocation.zeta, res.allocation.zeta, m, mode);
  return res;
}

}  // namespace mt
