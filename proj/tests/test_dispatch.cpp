#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "instances.hpp"
#include "oracles.hpp"

using namespace mt;

TEST(Penalty, ExponentZeroIsDelta) {
  PenaltyParams p{420, 30};
  EXPECT_EQ(penalty(p, 150, 300), 420.0);
  EXPECT_EQ(penalty(p, 0, 0), 420.0);
}

TEST(Penalty, ExponentOne) {
  PenaltyParams p{420, 30};
  EXPECT_EQ(penalty(p, 300, 300), 840.0);  // 2*300 - 300 = 300 = 10 l
}

TEST(Penalty, DoublesEveryFiveEpochs) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 200; ++i) {
    PenaltyParams p{1 + 999 * u(gen), 5 + 55 * u(gen)};
    const double e = 20000 * u(gen);
    const double t = e / 2 + 3000 * (u(gen) - 0.5);
    const double g0 = penalty(p, t, e), g1 = penalty(p, t + 5 * p.epoch_length, e);
    EXPECT_NEAR(g1 / g0, 2.0, 2e-12);
    EXPECT_NEAR(g0, p.delta * std::pow(2.0, (2 * t - e) / (10 * p.epoch_length)), 1e-9 * g0);
  }
}

TEST(Penalty, RejectsBadParams) {
  EXPECT_THROW(penalty({0, 30}, 0, 0), InvalidInput);
  EXPECT_THROW(penalty({420, 0}, 0, 0), InvalidInput);
}

TEST(UpdatePenalties, EmptySet) { EXPECT_TRUE(update_penalties({}, 300, {}).empty()); }

TEST(UpdatePenalties, HeldFiveEpochsDoubles) {
  std::vector<Request> rs{mt::test::req(1, 0, 1, 40)};
  auto a = update_penalties(rs, 60, {});
  auto b = update_penalties(rs, 210, {});
  EXPECT_DOUBLE_EQ(b.at(1), 2 * a.at(1));
}

TEST(UpdatePenalties, OlderRequestsWeighMore) {
  std::vector<Request> rs{mt::test::req(1, 0, 1, 40), mt::test::req(2, 0, 1, 90)};
  auto g = update_penalties(rs, 120, {});
  EXPECT_GT(g.at(1), g.at(2));
}

TEST(SolveMaster, NoRoutesLeavesAllUnserved) {
  MasterInstance inst{{1, 2}, {420, 500}, {0}, {{{0.0, {}}}}};
  auto sol = solve_master(inst);
  EXPECT_EQ(sol.unserved, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(sol.objective, 920.0);
}

TEST(SolveMaster, SingleRouteBeatsPenalty) {
  MasterInstance inst{{1}, {420}, {0}, {{{0.0, {}}, {120.0, {0}}}}};
  auto sol = solve_master(inst);
  EXPECT_EQ(sol.selected, std::vector<std::size_t>{1});
  EXPECT_EQ(sol.objective, 120.0);
}

TEST(SolveMaster, PooledRouteWins) {
  MasterInstance inst{{1, 2}, {420, 420}, {0}, {{{0.0, {}}, {150.0, {0}}, {160.0, {1}}, {400.0, {0, 1}}}}};
  auto sol = solve_master(inst);
  EXPECT_EQ(sol.selected, std::vector<std::size_t>{3});
  EXPECT_EQ(sol.objective, 400.0);
  EXPECT_TRUE(sol.unserved.empty());
}

TEST(SolveMaster, RejectsMissingNullColumn) {
  MasterInstance inst{{1}, {420}, {0}, {{{120.0, {0}}}}};
  EXPECT_THROW(solve_master(inst), ContractError);
}

TEST(SolveMaster, MatchesExhaustiveEnumeration) {
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    auto inst = mt::test::random_master(seed);
    auto sol = solve_master(inst);
    auto ref = oracle::brute_master(inst);
    ASSERT_EQ(sol.objective, ref.objective) << "seed " << seed;
    EXPECT_EQ(sol.selected, ref.selected) << "seed " << seed;
    EXPECT_TRUE(sol.optimal);
  }
}

TEST(SolveMaster, SolutionIsAPartition) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto inst = mt::test::random_master(seed);
    auto sol = solve_master(inst);
    ASSERT_EQ(sol.selected.size(), inst.shuttles.size());
    std::vector<int> hits(inst.requests.size(), 0);
    double route = 0.0, pen = 0.0;
    for (std::size_t v = 0; v < sol.selected.size(); ++v) {
      const auto& c = inst.columns[v][sol.selected[v]];
      route += c.cost;
      for (auto n : c.covers) ++hits[n];
    }
    std::vector<std::size_t> unserved;
    for (std::size_t n = 0; n < hits.size(); ++n) {
      EXPECT_LE(hits[n], 1);
      if (hits[n] == 0) unserved.push_back(n), pen += inst.penalties[n];
    }
    EXPECT_EQ(unserved, sol.unserved);
    EXPECT_EQ(sol.objective, route + pen);
  }
}

TEST(SolveMaster, NodeLimitKeepsAFeasibleIncumbent) {
  auto inst = mt::test::random_master(17, 3, 6);
  auto sol = solve_master(inst, {1});
  EXPECT_EQ(sol.selected.size(), inst.shuttles.size());
  auto ref = oracle::brute_master(inst);
  EXPECT_GE(sol.objective, ref.objective);
}
