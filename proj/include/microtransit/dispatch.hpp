#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "demand.hpp"
#include "error.hpp"

namespace mt {

struct PenaltyParams {
  double delta = 420.0;         // seconds
  double epoch_length = 30.0;   // l, seconds
};

// g = delta * 2^((2 * epoch_time - earliest) / (10 * l)); both times in seconds
// since service start. Doubles every 5 epochs of waiting.
inline double penalty(const PenaltyParams& p, double epoch_time, double earliest) {
  if (!(p.delta > 0.0) || !(p.epoch_length > 0.0)) throw InvalidInput("penalty: delta and epoch length must be > 0");
  const double exponent = (2.0 * epoch_time - earliest) / (10.0 * p.epoch_length);
  const double g = p.delta * std::exp2(exponent);
  if (!std::isfinite(g)) throw Error("penalty overflow: exponent " + std::to_string(exponent));
  return g;
}

inline std::map<RequestId, double> update_penalties(std::span<const Request> unserved, double epoch_time,
                                                    const PenaltyParams& p) {
  std::map<RequestId, double> g;
  for (const auto& r : unserved) g[r.id] = penalty(p, epoch_time, r.earliest);
  return g;
}

// One column of the set-partitioning master: a route's cost and the requests it
// covers (indices into MasterInstance::requests).
struct Column {
  double cost = 0.0;
  std::vector<std::size_t> covers;
};

struct MasterInstance {
  std::vector<RequestId> requests;
  std::vector<double> penalties;                 // parallel to requests
  std::vector<ShuttleId> shuttles;
  std::vector<std::vector<Column>> columns;      // per shuttle; each needs an empty column

  void validate() const {
    if (penalties.size() != requests.size()) throw ContractError("master: penalties/requests size mismatch");
    if (columns.size() != shuttles.size()) throw ContractError("master: columns/shuttles size mismatch");
    for (std::size_t v = 0; v < columns.size(); ++v) {
      bool has_null = false;
      for (const auto& c : columns[v]) {
        if (c.covers.empty()) has_null = true;
        for (std::size_t i = 0; i < c.covers.size(); ++i) {
          if (c.covers[i] >= requests.size()) throw ContractError("master: column covers unknown request");
          if (i > 0 && c.covers[i] <= c.covers[i - 1]) throw ContractError("master: column covers not ascending");
        }
      }
      if (!has_null) throw ContractError("master: shuttle " + std::to_string(shuttles[v]) + " has no null column");
    }
  }
};

struct MasterSolution {
  std::vector<std::size_t> selected;      // column index per shuttle
  std::vector<std::size_t> unserved;      // request indices, ascending
  double route_cost = 0.0;                // sum of selected column costs, shuttle order
  double penalty_cost = 0.0;              // sum of unserved penalties, request order
  double objective = 0.0;
  bool optimal = true;
  std::uint64_t nodes = 0;
};

struct MasterOptions {
  std::uint64_t node_limit = 1'000'000;
};

namespace detail {

// Objective split into its penalty and route parts. Penalties late in the day
// dwarf route costs, so equal penalty sums are compared on route cost alone.
struct SplitCost {
  double penalty = 0.0;
  double route = 0.0;

  double total() const { return penalty + route; }
};

inline bool less(const SplitCost& a, const SplitCost& b) {
  if (a.penalty == b.penalty) return a.route < b.route;
  return (a.penalty - b.penalty) + (a.route - b.route) < 0.0;
}

class MasterSearch {
 public:
  MasterSearch(const MasterInstance& inst, const MasterOptions& opts)
      : inst_(inst), opts_(opts), covered_(inst.requests.size(), 0), choice_(inst.shuttles.size(), 0) {}

  MasterSolution run() {
    best_.route = std::numeric_limits<double>::infinity();
    best_.penalty = std::numeric_limits<double>::infinity();
    dfs(0, 0.0);
    MasterSolution sol;
    sol.selected = best_choice_;
    sol.nodes = nodes_;
    sol.optimal = !aborted_;
    std::vector<char> cov(inst_.requests.size(), 0);
    for (std::size_t v = 0; v < sol.selected.size(); ++v) {
      const auto& c = inst_.columns[v][sol.selected[v]];
      sol.route_cost += c.cost;
      for (auto n : c.covers) cov[n] = 1;
    }
    for (std::size_t n = 0; n < cov.size(); ++n)
      if (!cov[n]) {
        sol.unserved.push_back(n);
        sol.penalty_cost += inst_.penalties[n];
      }
    sol.objective = sol.route_cost + sol.penalty_cost;
    return sol;
  }

 private:
  bool compatible(const Column& c) const {
    for (auto n : c.covers)
      if (covered_[n]) return false;
    return true;
  }

  // Route cost so far + cheapest compatible column of each remaining shuttle,
  // plus penalties of requests no remaining shuttle can still cover.
  SplitCost bound(std::size_t depth, double route_so_far) {
    reach_.assign(inst_.requests.size(), 0);
    SplitCost lb{0.0, route_so_far};
    for (std::size_t v = depth; v < inst_.columns.size(); ++v) {
      double cheapest = std::numeric_limits<double>::infinity();
      for (const auto& c : inst_.columns[v]) {
        if (!compatible(c)) continue;
        cheapest = std::min(cheapest, c.cost);
        for (auto n : c.covers) reach_[n] = 1;
      }
      lb.route += cheapest;
    }
    for (std::size_t n = 0; n < covered_.size(); ++n)
      if (!covered_[n] && !reach_[n]) lb.penalty += inst_.penalties[n];
    return lb;
  }

  void dfs(std::size_t depth, double route_so_far) {
    if (aborted_) return;
    if (++nodes_ > opts_.node_limit && have_incumbent_) {
      aborted_ = true;
      return;
    }
    if (depth == inst_.columns.size()) {
      SplitCost leaf{0.0, route_so_far};
      for (std::size_t n = 0; n < covered_.size(); ++n)
        if (!covered_[n]) leaf.penalty += inst_.penalties[n];
      if (!have_incumbent_ || less(leaf, best_)) {
        best_ = leaf;
        best_choice_ = choice_;
        have_incumbent_ = true;
      }
      return;
    }
    if (have_incumbent_ && !less(bound(depth, route_so_far), best_)) return;
    const auto& cols = inst_.columns[depth];
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const auto& c = cols[i];
      if (!compatible(c)) continue;
      for (auto n : c.covers) covered_[n] = 1;
      choice_[depth] = i;
      dfs(depth + 1, route_so_far + c.cost);
      for (auto n : c.covers) covered_[n] = 0;
      if (aborted_) return;
    }
  }

  const MasterInstance& inst_;
  MasterOptions opts_;
  std::vector<char> covered_;
  std::vector<char> reach_;
  std::vector<std::size_t> choice_;
  std::vector<std::size_t> best_choice_;
  SplitCost best_;
  bool have_incumbent_ = false;
  bool aborted_ = false;
  std::uint64_t nodes_ = 0;
};

}  // namespace detail

// Exact depth-first branch and bound over one column per shuttle. Columns are
// tried in index order and the incumbent only moves on strict improvement, so
// among optimal solutions the lexicographically smallest column vector wins.
inline MasterSolution solve_master(const MasterInstance& inst, const MasterOptions& opts = {}) {
  inst.validate();
  return detail::MasterSearch(inst, opts).run();
}

}  // namespace mt
