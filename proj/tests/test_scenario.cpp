#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"

using namespace mt;
namespace fs = std::filesystem;

namespace {

LoadedZone small_zone(const std::string& name, std::uint64_t seed, std::size_t requests = 10) {
  SyntheticSpec spec;
  spec.stops = 20;
  spec.idle = 3;
  spec.requests = requests;
  spec.pool_days = 3;
  spec.seed = seed;
  auto inst = gen_synthetic(spec);
  LoadedZone z;
  z.name = name;
  z.net = inst.net;
  z.base = inst.day;
  z.pool = inst.pool;
  return z;
}

GridAxes full_grid() {
  GridAxes g;
  g.fleets = {3, 4, 5};
  g.sfls = {Sfl::I, Sfl::II, Sfl::III, Sfl::IV};
  g.multipliers = {1, 2, 3};
  g.seeds = {1};
  return g;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("mt_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Sweep, ThirtySixScenarios) {
  std::vector<LoadedZone> zones{small_zone("a", 1)};
  auto items = sweep(zones, full_grid(), {}, synthetic_driver_model());
  ASSERT_EQ(items.size(), 36u);
  for (const auto& it : items) EXPECT_TRUE(it.report) << it.error;
  EXPECT_EQ(items[0].spec.fleet, 3);
  EXPECT_EQ(items[0].spec.sfl, Sfl::I);
  EXPECT_EQ(items[35].spec.fleet, 5);
  EXPECT_EQ(items[35].spec.multiplier, 3);
}

TEST(Sweep, TwoZonesSeventyTwo) {
  std::vector<LoadedZone> zones{small_zone("a", 1, 6), small_zone("b", 2, 6)};
  auto grid = full_grid();
  grid.jobs = 2;
  auto items = sweep(zones, grid, {}, synthetic_driver_model());
  ASSERT_EQ(items.size(), 72u);
  EXPECT_EQ(items[0].spec.zone, "a");
  EXPECT_EQ(items[71].spec.zone, "b");
}

TEST(Sweep, EmptyAxisRejected) {
  std::vector<LoadedZone> zones{small_zone("a", 1)};
  auto grid = full_grid();
  grid.sfls.clear();
  EXPECT_THROW(expand_grid(zones, grid), ValidationError);
}

TEST(Sweep, FailuresRecordedAndSweepContinues) {
  auto z = small_zone("nopool", 1, 6);
  z.pool.clear();
  std::vector<LoadedZone> zones{z};
  GridAxes g;
  g.fleets = {2};
  g.sfls = {Sfl::II};
  g.multipliers = {1, 2};
  g.seeds = {1};
  auto items = sweep(zones, g, {}, synthetic_driver_model());
  ASSERT_EQ(items.size(), 2u);
  EXPECT_TRUE(items[0].report);
  EXPECT_FALSE(items[1].report);
  EXPECT_NE(items[1].error.find("pool"), std::string::npos);
}

TEST(Sweep, ParallelMatchesSerial) {
  std::vector<LoadedZone> zones{small_zone("a", 4, 8)};
  auto g = full_grid();
  g.fleets = {3};
  auto serial = sweep(zones, g, {}, synthetic_driver_model());
  g.jobs = 3;
  auto parallel = sweep(zones, g, {}, synthetic_driver_model());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    std::stringstream a, b;
    write_report_csv_row(a, *serial[i].report);
    write_report_csv_row(b, *parallel[i].report);
    EXPECT_EQ(a.str(), b.str());
  }
}

TEST(GenSynthetic, Shapes) {
  SyntheticSpec b;
  b.stops = 465, b.idle = 4, b.requests = 39, b.pool_days = 0;
  auto bi = gen_synthetic(b);
  EXPECT_EQ(bi.net.size(), 465u);
  EXPECT_EQ(bi.net.idle_stops().size(), 4u);
  EXPECT_EQ(bi.day.size(), 39u);
  SyntheticSpec w;
  w.stops = 485, w.idle = 3, w.requests = 82, w.pool_days = 0;
  auto wi = gen_synthetic(w);
  EXPECT_EQ(wi.net.size(), 485u);
  EXPECT_EQ(wi.net.idle_stops().size(), 3u);
  EXPECT_EQ(wi.day.size(), 82u);
}

TEST(GenSynthetic, IdleMoreThanStops) {
  SyntheticSpec s;
  s.stops = 3;
  s.idle = 4;
  EXPECT_THROW(gen_synthetic(s), InvalidInput);
}

TEST(GenSynthetic, TriangleInequality) {
  SyntheticSpec s;
  s.stops = 40;
  auto inst = gen_synthetic(s);
  const auto& m = inst.net.matrix();
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t j = 0; j < 40; ++j)
      for (std::size_t k = 0; k < 40; ++k) {
        ASSERT_LE(m.time(i, j), m.time(i, k) + m.time(k, j) + 1e-9);
        ASSERT_LE(m.distance(i, j), m.distance(i, k) + m.distance(k, j) + 1e-9);
      }
}

TEST(GenSynthetic, SameSeedSameFiles) {
  SyntheticSpec s;
  s.seed = 77;
  auto a = scratch("gen_a"), b = scratch("gen_b");
  write_synthetic(a, gen_synthetic(s), "z");
  write_synthetic(b, gen_synthetic(s), "z");
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++files;
    EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path();
  }
  EXPECT_GE(files, 8u);
  s.seed = 78;
  auto c = scratch("gen_c");
  write_synthetic(c, gen_synthetic(s), "z");
  EXPECT_NE(slurp(a / "requests.csv"), slurp(c / "requests.csv"));
}

TEST(Scenario, BelvedereShapedRunServesEveryTrip) {
  SyntheticSpec s;
  s.stops = 465, s.idle = 4, s.requests = 39, s.pool_days = 0, s.seed = 3;
  auto dir = scratch("belvedere");
  write_synthetic(dir, gen_synthetic(s), "belvedere");
  auto cfg = load_config_file((dir / "zone.ini").string());
  auto zone = load_zone_files(cfg.zones.at(0));
  ModelParams p;
  auto res = run_scenario(zone, {"belvedere", 4, Sfl::I, 1, 1}, p, load_driver_model(p));
  EXPECT_EQ(res.report.trips, 39);
  EXPECT_EQ(res.report.scenario.sfl, "I");
  EXPECT_GE(res.report.wait.min, 0.0);
}

TEST(Scenario, ZoneFromBinaryMatrix) {
  SyntheticSpec s;
  s.stops = 30;
  auto dir = scratch("binzone");
  auto inst = gen_synthetic(s);
  write_synthetic(dir, inst, "z");
  ZoneFiles f = named_zone("z");
  f.stops = (dir / "stops.csv").string();
  f.matrix_bin = (dir / "matrix.bin").string();
  f.requests = (dir / "requests.csv").string();
  auto zone = load_zone_files(f);
  EXPECT_TRUE(zone.net == inst.net);
  EXPECT_EQ(zone.base.size(), inst.day.size());
}

TEST(Scenario, DeterministicReports) {
  auto zone = small_zone("a", 5, 12);
  ModelParams p;
  for (Sfl level : {Sfl::I, Sfl::III}) {
    ScenarioSpec spec{"a", 3, level, 2, 11};
    auto r1 = run_scenario(zone, spec, p, synthetic_driver_model());
    auto r2 = run_scenario(zone, spec, p, synthetic_driver_model());
    EXPECT_EQ(report_json(r1.report).dump(), report_json(r2.report).dump());
  }
}

TEST(Scenario, DemandIndependentOfFleetAndLevel) {
  auto zone = small_zone("a", 5, 12);
  ModelParams p;
  auto d1 = scenario_demand(zone, {"a", 3, Sfl::I, 2, 11}, p);
  auto d2 = scenario_demand(zone, {"a", 5, Sfl::IV, 2, 11}, p);
  std::stringstream a, b;
  write_requests(a, d1.day, zone.net, true);
  write_requests(b, d2.day, zone.net, true);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Scenario, ReplayRebuildsTheReport) {
  auto zone = small_zone("a", 6, 12);
  ModelParams p;
  auto res = run_scenario(zone, {"a", 3, Sfl::III, 1, 2}, p, synthetic_driver_model());
  std::stringstream s;
  write_event_log(s, res.sim.log);
  auto log = read_event_log(s);
  auto j = report_json(res.report);
  auto again = build_report(log, descriptor_from_json(j), p.hours, p.cost_denominator, p.cost_rates);
  EXPECT_EQ(report_json(again).dump(), j.dump());
}
