#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "error.hpp"

namespace mt {

// Cost types usable by solve_assignment: an ordered additive group.
template <class Cost>
struct AssignmentTraits {
  static Cost zero() { return Cost{0}; }
  static Cost infinity() { return std::numeric_limits<Cost>::infinity(); }
};

// Lexicographic pair: minimise `primary`, then `secondary` among equal primaries.
struct LexCost {
  double primary = 0.0;
  double secondary = 0.0;

  friend LexCost operator+(LexCost a, LexCost b) { return {a.primary + b.primary, a.secondary + b.secondary}; }
  friend LexCost operator-(LexCost a, LexCost b) { return {a.primary - b.primary, a.secondary - b.secondary}; }
  friend bool operator<(LexCost a, LexCost b) {
    return a.primary != b.primary ? a.primary < b.primary : a.secondary < b.secondary;
  }
  friend bool operator==(LexCost, LexCost) = default;
};

template <>
struct AssignmentTraits<LexCost> {
  static LexCost zero() { return {}; }
  static LexCost infinity() {
    return {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  }
};

// Hungarian algorithm with potentials, O(n^3). `cost` is square; returns the
// column assigned to each row.
template <class Cost>
std::vector<std::size_t> solve_assignment(const std::vector<std::vector<Cost>>& cost) {
  using T = AssignmentTraits<Cost>;
  const std::size_t n = cost.size();
  for (const auto& row : cost)
    if (row.size() != n) throw ContractError("solve_assignment: cost matrix must be square");
  if (n == 0) return {};

  // 1-based arrays; column 0 is a virtual start.
  std::vector<Cost> u(n + 1, T::zero()), v(n + 1, T::zero());
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<Cost> minv(n + 1, T::infinity());
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      Cost delta = T::infinity();
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        Cost cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] = u[p[j]] + delta;
          v[j] = v[j] - delta;
        } else {
          minv[j] = minv[j] - delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace mt
