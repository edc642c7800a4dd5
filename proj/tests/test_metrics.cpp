#include <gtest/gtest.h>

#include <sstream>

#include "helpers.hpp"

using namespace mt;

TEST(Describe, SingleValue) {
  std::vector<double> w{300};
  auto s = describe(w);
  EXPECT_EQ(s.mean, 300.0);
  EXPECT_EQ(s.stddev, 0.0);
  EXPECT_EQ(s.p95, 300.0);
}

TEST(Describe, ThreeValues) {
  std::vector<double> w{60, 120, 180};
  auto s = describe(w);
  EXPECT_EQ(s.mean, 120.0);
  EXPECT_NEAR(s.stddev, 48.99, 0.005);
  EXPECT_EQ(s.p95, 180.0);
}

TEST(Describe, Empty) {
  auto s = describe({});
  EXPECT_EQ(s.count, 0u);
  EXPECT_EQ(s.mean, 0.0);
}

TEST(Describe, OrderingProperty) {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> v(1 + rng.below(40));
    for (auto& x : v) x = static_cast<double>(rng.below(2000));
    auto s = describe(v);
    EXPECT_LE(s.min, s.mean + 1e-9);
    EXPECT_LE(s.mean, s.max + 1e-9);
    EXPECT_LE(s.p95, s.max);
  }
}

TEST(Rideshare, Cases) {
  std::vector<ShuttleDistance> single{{0, 10, 5, 5, 0}};
  EXPECT_EQ(ridesharing_rate(single).rate, 0.0);
  std::vector<ShuttleDistance> all{{0, 10, 0, 10, 10}};
  EXPECT_EQ(ridesharing_rate(all).rate, 1.0);
  std::vector<ShuttleDistance> mixed{{0, 40, 10, 30, 20}};
  EXPECT_EQ(ridesharing_rate(mixed).rate, 0.5);
  std::vector<ShuttleDistance> none{{0, 0, 0, 0, 0}};
  auto r = ridesharing_rate(none);
  EXPECT_EQ(r.rate, 0.0);
  EXPECT_TRUE(r.zero_distance);
}

TEST(CostPerTrip, TableCells) {
  EXPECT_EQ(round_cents(cost_per_trip(20, 13, 3, 43)), 18.14);
  EXPECT_EQ(round_cents(cost_per_trip(20, 13, 5, 89)), 14.61);
  EXPECT_EQ(round_cents(cost_per_trip(55, 13, 3, 43)), 49.88);
  EXPECT_EQ(cost_per_trip(0, 13, 3, 43), 0.0);
  EXPECT_THROW(cost_per_trip(20, 13, 3, 0), InvalidInput);
}

TEST(CostPerTrip, LinearInRate) {
  for (double r = 5; r <= 200; r += 7.5) EXPECT_DOUBLE_EQ(cost_per_trip(2 * r, 13, 4, 82), 2 * cost_per_trip(r, 13, 4, 82));
}

TEST(CostTable, BelvedereLayout) {
  auto spec = *cost_table_preset("belvedere");
  auto rows = cost_table(spec, rate_range(20, 50, 5));
  ASSERT_EQ(rows.size(), 7u);
  std::size_t cells = 0;
  for (const auto& r : rows) cells += r.cells.size();
  EXPECT_EQ(cells, 63u);
  std::stringstream s;
  write_cost_table_csv(s, spec, rows);
  std::string header;
  std::getline(s, header);
  EXPECT_EQ(header, "rate,1x_V3,1x_V4,1x_V5,2x_V3,2x_V4,2x_V5,3x_V3,3x_V4,3x_V5");
  std::string first;
  std::getline(s, first);
  EXPECT_EQ(first, "20,18.14,24.19,30.23,9.51,12.68,15.85,6.39,8.52,10.66");
}

TEST(CostTable, TripsDenominator) {
  auto spec = *cost_table_preset("belvedere");
  spec.denominator = CostDenominator::trips;
  std::vector<double> rate{20};
  EXPECT_EQ(cost_table(spec, rate)[0].cells[0], 20.0);  // 20 * 13 * 3 / 39
  EXPECT_FALSE(cost_table_preset("nowhere"));
}

namespace {

EventLog tiny_log() {
  EventLog log;
  log.add(0, event::shuttle_init, {{"shuttle", 0}, {"stop", 1}});
  log.add(10, event::received, {{"request", 1}, {"user", 1}, {"p", 2}, {"d", 3}, {"e", 10.0}, {"riders", 2}});
  log.add(30, event::assigned, {{"request", 1}, {"shuttle", 0}});
  log.add(30, event::departure, {{"shuttle", 0}, {"from", 1}, {"to", 2}, {"purpose", "pickup"}});
  log.add(90, event::arrival, {{"shuttle", 0}, {"stop", 2}, {"km", 1.0}, {"riders", 0}});
  log.add(90, event::pickup, {{"shuttle", 0}, {"request", 1}, {"stop", 2}, {"riders", 2}});
  log.add(90, event::departure, {{"shuttle", 0}, {"from", 2}, {"to", 3}, {"purpose", "dropoff"}});
  log.add(150, event::arrival, {{"shuttle", 0}, {"stop", 3}, {"km", 1.0}, {"riders", 2}});
  log.add(150, event::dropoff, {{"shuttle", 0}, {"request", 1}, {"stop", 3}, {"riders", 0}});
  return log;
}

}  // namespace

TEST(Summarize, TinyLog) {
  auto s = summarize(tiny_log());
  ASSERT_EQ(s.requests.size(), 1u);
  EXPECT_EQ(s.requests[0].wait(), 80.0);
  EXPECT_EQ(s.requests[0].travel(), 60.0);
  EXPECT_EQ(s.requests[0].riders, 2);
  ASSERT_EQ(s.shuttles.size(), 1u);
  EXPECT_EQ(s.shuttles[0].odometer_km, 2.0);
  EXPECT_EQ(s.shuttles[0].empty_km, 1.0);
  EXPECT_EQ(s.shuttles[0].shared_km, 1.0);
}

TEST(Summarize, DanglingRequestNamed) {
  auto log = tiny_log();
  log.events.pop_back();
  try {
    summarize(log);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(": 1"), std::string::npos) << e.what();
  }
}

TEST(Report, EmptyDayIsDefined) {
  EventLog log;
  log.add(0, event::shuttle_init, {{"shuttle", 0}, {"stop", 1}});
  auto r = build_report(log, {"z", 1, "II", 1, 1, {}}, 13, CostDenominator::riders, {35});
  EXPECT_EQ(r.trips, 0);
  EXPECT_TRUE(r.cost_per_trip.empty());
  std::stringstream s;
  write_report_csv_row(s, r);
  EXPECT_EQ(s.str().back(), '\n');
  EXPECT_EQ(s.str().substr(s.str().size() - 2), ",\n");
}

TEST(Report, CsvColumnsStableAndJsonRoundTrip) {
  auto r = build_report(tiny_log(), {"z", 1, "II", 2, 7, {{"delta", 420}}}, 13, CostDenominator::riders, {20, 35});
  std::stringstream h, row;
  write_report_csv_header(h, r.cost_rates);
  write_report_csv_row(row, r);
  auto count = [](const std::string& s) { return std::count(s.begin(), s.end(), ','); };
  EXPECT_EQ(count(h.str()), count(row.str()));
  EXPECT_NE(h.str().find(",cost_per_trip_20,cost_per_trip_35\n"), std::string::npos);
  EXPECT_NE(row.str().find(",130.00,227.50\n"), std::string::npos);
  EXPECT_EQ(r.cost_per_trip, (std::vector<double>{130.0, 227.5}));
  auto j = report_json(r);
  auto d = descriptor_from_json(j);
  EXPECT_EQ(d.zone, "z");
  EXPECT_EQ(d.multiplier, 2);
  EXPECT_EQ(d.seed, 7u);
  EXPECT_EQ(d.constants.at("delta"), 420);
  EXPECT_EQ(j.at("rideshare_rate").get<double>(), 0.5);
}
