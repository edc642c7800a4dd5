#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"
#include "instances.hpp"
#include "oracles.hpp"

using namespace mt;
using mt::test::make_net;
using mt::test::req;

TEST(ComputeGamma, EmptyWindow) {
  auto net = mt::test::line_net(5, 60, {0, 4});
  auto c = compute_gamma({}, net.idle_stops(), net.matrix());
  EXPECT_EQ(c.gamma, (std::vector<int>{0, 0}));
}

TEST(ComputeGamma, AllNearOneStop) {
  auto net = mt::test::line_net(5, 60, {0, 4});
  std::vector<Request> rs{req(1, 0, 3, 0), req(2, 1, 3, 0), req(3, 1, 4, 0)};
  EXPECT_EQ(compute_gamma(rs, net.idle_stops(), net.matrix()).gamma, (std::vector<int>{3, 0}));
}

TEST(ComputeGamma, SplitByNearestIdle) {
  auto net = mt::test::line_net(6, 60, {0, 5});
  std::vector<Request> rs{req(1, 0, 3, 0), req(2, 1, 3, 0), req(3, 2, 4, 0), req(4, 4, 0, 0), req(5, 5, 0, 0)};
  EXPECT_EQ(compute_gamma(rs, net.idle_stops(), net.matrix()).gamma, (std::vector<int>{3, 2}));
}

TEST(RecentRequests, HalfOpenWindow) {
  auto net = mt::test::line_net(3, 60, {0});
  auto day = mt::test::make_day(net, {req(1, 0, 1, 100), req(2, 0, 1, 3700), req(3, 0, 1, 3800)});
  auto r = recent_requests(day, 3700, 3600);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].id, 2);
}

TEST(Allocate, WorkedExample) {
  std::vector<int> g{4, 1};
  auto a = allocate(g, 3);
  EXPECT_EQ(a.zeta, (std::vector<int>{2, 1}));
  EXPECT_DOUBLE_EQ(a.objective, 3.0);
  EXPECT_FALSE(a.tied);
  EXPECT_NEAR(allocation_objective(g, std::vector<int>{3, 0}), 10.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(allocation_objective(g, std::vector<int>{1, 2}), 4.5);
  EXPECT_NEAR(allocation_objective(g, std::vector<int>{0, 3}), 25.0 / 3.0, 1e-12);
}

TEST(Allocate, AllZeroRoundRobin) {
  std::vector<int> g{0, 0, 0};
  auto a = allocate(g, 5);
  EXPECT_EQ(a.objective, 0.0);
  EXPECT_EQ(a.zeta, (std::vector<int>{2, 2, 1}));
  EXPECT_EQ(a.lower, (std::vector<int>{1, 1, 1}));
  EXPECT_EQ(a.upper, (std::vector<int>{2, 2, 2}));
  EXPECT_TRUE(a.tied);
}

TEST(Allocate, TwoWayTie) {
  std::vector<int> g{2, 2};
  auto a = allocate(g, 1);
  EXPECT_DOUBLE_EQ(a.objective, 6.0);
  EXPECT_TRUE(a.tied);
  EXPECT_EQ(a.optima, (std::vector<std::vector<int>>{{1, 0}, {0, 1}}));
  EXPECT_EQ(a.lower, (std::vector<int>{0, 0}));
  EXPECT_EQ(a.upper, (std::vector<int>{1, 1}));
  EXPECT_EQ(a.zeta, (std::vector<int>{1, 0}));
}

TEST(Allocate, ZeroShuttles) {
  std::vector<int> g{3, 1};
  auto a = allocate(g, 0);
  EXPECT_EQ(a.zeta, (std::vector<int>{0, 0}));
  EXPECT_EQ(a.objective, 8.0);
}

TEST(Allocate, Contracts) {
  std::vector<int> g{3, 1}, bad{-1, 2};
  EXPECT_THROW(allocate(g, -1), ContractError);
  EXPECT_THROW(allocate(bad, 1), ContractError);
  EXPECT_THROW(allocate(std::vector<int>{}, 2), ContractError);
}

TEST(Allocate, ZeroShuttlesDoublesTheStopTerm) {
  for (int g = 0; g < 20; ++g) {
    std::vector<int> gamma{g};
    EXPECT_EQ(allocation_objective(gamma, std::vector<int>{0}), 2.0 * allocation_objective(gamma, std::vector<int>{1}));
  }
}

TEST(Allocate, MatchesBruteForce) {
  std::mt19937_64 gen(2024);
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = 1 + gen() % 4;
    const int k = static_cast<int>(gen() % 9);
    auto gamma = mt::test::random_gamma(gen, n);
    auto a = allocate(gamma, k);
    auto ref = oracle::brute_allocate(gamma, k);
    ASSERT_EQ(oracle::scaled_objective(gamma, a.zeta), ref.scaled);
    for (const auto& z : a.optima) EXPECT_EQ(oracle::scaled_objective(gamma, z), ref.scaled);
    EXPECT_EQ(a.optima.size(), ref.optima.size());
    if (ref.optima.size() == 1) {
      EXPECT_FALSE(a.tied);
    }
  }
}

TEST(Assign, WorkedExample) {
  // v1 at x, v2 at y; rho(v1) = (60, 300), rho(v2) = (120, 60)
  auto net = make_net({{0, 0, 60, 300}, {0, 0, 120, 60}, {60, 120, 0, 500}, {300, 60, 500, 0}}, {2, 3});
  std::vector<IdleShuttle> v{{0, Location::at(0)}, {1, Location::at(1)}};
  std::vector<int> z{1, 1};
  auto plan = assign(v, net.idle_stops(), z, z, net.matrix());
  ASSERT_EQ(plan.moves.size(), 2u);
  EXPECT_EQ(plan.moves[0].stop, 2u);
  EXPECT_EQ(plan.moves[1].stop, 3u);
  EXPECT_EQ(plan.total_travel, 120.0);
}

TEST(Assign, ShuttleInPlaceStays) {
  auto net = make_net({{0, 100, 100}, {100, 0, 100}, {100, 100, 0}}, {0, 1});
  std::vector<IdleShuttle> v{{0, Location::at(2)}, {1, Location::at(0)}};
  std::vector<int> lo{0, 0}, hi{2, 2};
  auto plan = assign(v, net.idle_stops(), lo, hi, net.matrix());
  EXPECT_EQ(plan.moves[1].stop, 0u);
  EXPECT_EQ(plan.moves[1].travel, 0.0);
  EXPECT_EQ(plan.total_travel, 100.0);
}

TEST(Assign, TiedStopsSplitByTravel) {
  // X = {s1, s2}, v = (1, 1), 3 shuttles, two near s1.
  auto net = make_net({{0, 600, 30, 40, 580},
                       {600, 0, 570, 560, 20},
                       {30, 570, 0, 10, 550},
                       {40, 560, 10, 0, 540},
                       {580, 20, 550, 540, 0}},
                      {0, 1});
  std::vector<IdleShuttle> v{{0, Location::at(2)}, {1, Location::at(3)}, {2, Location::at(4)}};
  std::vector<int> lo{1, 1}, hi{2, 2};
  auto plan = assign(v, net.idle_stops(), lo, hi, net.matrix());
  EXPECT_EQ(plan.moves[0].stop, 0u);
  EXPECT_EQ(plan.moves[1].stop, 0u);
  EXPECT_EQ(plan.moves[2].stop, 1u);
  EXPECT_EQ(plan.total_travel, 90.0);
}

TEST(Assign, InfeasibleBounds) {
  auto net = mt::test::line_net(3, 60, {0, 1});
  std::vector<IdleShuttle> v{{0, Location::at(2)}};
  std::vector<int> lo{1, 1}, hi{1, 1};
  EXPECT_THROW(assign(v, net.idle_stops(), lo, hi, net.matrix()), ContractError);
}

TEST(Assign, MatchesBruteForce) {
  std::mt19937_64 gen(77);
  for (int i = 0; i < 200; ++i) {
    const std::size_t idle = 1 + gen() % 4, k = gen() % 7;
    auto c = mt::test::random_placement(gen, idle + 3, idle, k);
    std::vector<int> lo(idle, 0), hi(idle, 0);
    int left = static_cast<int>(k);
    for (std::size_t s = 0; s + 1 < idle; ++s) {
      lo[s] = static_cast<int>(gen() % static_cast<unsigned>(left + 1));
      left -= lo[s];
    }
    lo[idle - 1] = left;
    for (std::size_t s = 0; s < idle; ++s) hi[s] = lo[s] + (gen() % 2 == 0 ? 1 : 0);
    if (gen() % 2 == 0) {
      // move slack from one stop's lower bound
      std::size_t s = gen() % idle;
      if (lo[s] > 0) --lo[s], hi[(s + 1) % idle] += 1;
    }
    auto plan = assign(c.shuttles, c.idle, lo, hi, c.m);
    EXPECT_EQ(plan.total_travel, oracle::brute_assign(c.shuttles, c.idle, lo, hi, c.m)) << "case " << i;
    std::vector<int> counts(idle, 0);
    for (const auto& mv : plan.moves) ++counts[mv.stop];
    for (std::size_t s = 0; s < idle; ++s) {
      EXPECT_GE(counts[s], lo[s]);
      EXPECT_LE(counts[s], hi[s]);
    }
  }
}

TEST(RebalanceStep, NothingOffStop) {
  auto net = mt::test::line_net(4, 60, {0, 3});
  auto r = rebalance_step({}, {}, net.idle_stops(), net.matrix());
  EXPECT_TRUE(r.plan.moves.empty());
}

TEST(RebalanceStep, SingleShuttleGoesToBusiestStop) {
  auto net = mt::test::line_net(5, 60, {0, 4});
  std::vector<Request> rs{req(1, 4, 0, 0), req(2, 3, 0, 0), req(3, 0, 4, 0)};
  std::vector<IdleShuttle> v{{0, Location::at(1)}};
  auto r = rebalance_step(v, rs, net.idle_stops(), net.matrix());
  ASSERT_EQ(r.plan.moves.size(), 1u);
  EXPECT_EQ(r.plan.moves[0].stop, 4u);
}

TEST(RebalanceStep, TieSettledByTravel) {
  // gamma = (1, 1) and one shuttle closer to stop 4 than stop 0
  auto net = mt::test::line_net(5, 60, {0, 4});
  std::vector<Request> rs{req(1, 0, 2, 0), req(2, 4, 2, 0)};
  std::vector<IdleShuttle> v{{0, Location::at(3)}};
  auto r = rebalance_step(v, rs, net.idle_stops(), net.matrix());
  EXPECT_TRUE(r.allocation.tied);
  EXPECT_EQ(r.plan.moves[0].stop, 4u);
  EXPECT_EQ(r.plan.total_travel, 60.0);
  EXPECT_EQ(r.allocation.zeta, (std::vector<int>{1, 0}));  // canonical is not what gets used
}

TEST(RebalanceStep, TiedPlacementMatchesModelSixBruteForce) {
  std::mt19937_64 gen(99);
  int checked = 0;
  while (checked < 100) {
    const std::size_t idle = 2 + gen() % 3;
    std::vector<int> gamma(idle);
    const int base = 1 + static_cast<int>(gen() % 6);
    for (auto& g : gamma) g = gen() % 2 == 0 ? base : 1 + static_cast<int>(gen() % 8);
    const int k = 1 + static_cast<int>(gen() % 6);
    auto a = allocate(gamma, k);
    if (!a.tied) continue;
    ++checked;
    auto c = mt::test::random_placement(gen, idle + 3, idle, static_cast<std::size_t>(k));
    auto plan = assign(c.shuttles, c.idle, a.lower, a.upper, c.m);
    auto ref = oracle::brute_allocate(gamma, k);
    EXPECT_EQ(plan.total_travel, oracle::brute_tied(c.shuttles, c.idle, ref.optima, c.m));
  }
}
