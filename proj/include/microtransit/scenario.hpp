#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "calibration.hpp"
#include "config.hpp"
#include "demand.hpp"
#include "driver.hpp"
#include "engine.hpp"
#include "metrics.hpp"
#include "random.hpp"
#include "zone_io.hpp"

namespace mt {

struct LoadedZone {
  std::string name;
  Network net;
  DemandDay base;
  std::vector<DemandDay> pool;
  std::optional<CalibrationModel> calibration;
};

inline DemandDay read_requests_file(const std::string& path, const Network& net) {
  auto in = detail::open_in(path);
  try {
    return read_requests(in, net);
  } catch (const ValidationError& e) {
    std::vector<std::string> issues;
    for (const auto& s : e.issues()) issues.push_back(path + ": " + s);
    throw ValidationError(std::move(issues));
  }
}

inline LoadedZone load_zone_files(const ZoneFiles& files) {
  LoadedZone z;
  z.name = files.name;
  z.net = files.matrix_bin.empty() ? load_zone(files.stops, files.time, files.distance)
                                   : load_zone_binary(files.stops, files.matrix_bin);
  if (!files.calibration.empty()) {
    auto in = detail::open_in(files.calibration);
    auto pts = read_calibration_points(in);
    z.calibration = calibrate(pts);
    z.net = Network(z.net.stops(), z.calibration->apply(z.net.matrix()));
  }
  z.base = read_requests_file(files.requests, z.net);
  for (const auto& p : files.pool) z.pool.push_back(read_requests_file(p, z.net));
  return z;
}

inline DriverModel load_driver_model(const ModelParams& p) {
  if (p.driver_samples == "synthetic") {
    SyntheticDriverSpec spec;
    spec.threshold = p.threshold;
    return synthetic_driver_model(spec);
  }
  auto in = detail::open_in(p.driver_samples);
  return read_driver_samples(in, p.threshold);
}

struct ScenarioSpec {
  std::string zone;
  int fleet = 4;
  Sfl sfl = Sfl::II;
  int multiplier = 1;
  std::uint64_t seed = 1;  // master seed
};

inline std::uint64_t scenario_seed(const ScenarioSpec& s) {
  const auto fleet = std::to_string(s.fleet), mult = std::to_string(s.multiplier);
  return derive_seed(s.seed, {"scenario", s.zone, fleet, to_string(s.sfl), mult});
}

// Demand depends on zone and multiplier only, so every fleet size and SFL of a
// grid cell faces the same requests.
inline std::uint64_t demand_seed(const ScenarioSpec& s) {
  return derive_seed(s.seed, {"demand", s.zone, std::to_string(s.multiplier)});
}

inline ScaledDay scenario_demand(const LoadedZone& zone, const ScenarioSpec& spec, const ModelParams& p) {
  if (spec.multiplier > 1 && zone.pool.empty())
    throw ConfigError("zone '" + zone.name + "': multiplier " + std::to_string(spec.multiplier) +
                      " needs pool days (zone.pool)");
  ScaleOptions opts;
  opts.window_slack = p.window_slack;
  return scale_ridership(zone.base, zone.pool, spec.multiplier, demand_seed(spec), zone.net.matrix(), opts);
}

inline EngineConfig engine_config(const ScenarioSpec& spec, const ModelParams& p, const DriverModel& driver) {
  EngineConfig c;
  c.sfl.level = spec.sfl;
  c.fleet = spec.fleet;
  c.routing.capacity = p.capacity;
  c.routing.detour_factor = p.detour_factor;
  c.routing.detour_slack = p.detour_slack;
  c.routing.max_wait = p.max_wait;
  c.routing.max_requests = p.max_requests;
  c.routing.beam_width = p.beam_width;
  c.routing.diversion = p.diversion;
  c.penalty.delta = p.delta;
  c.penalty.epoch_length = p.epoch;
  c.master.node_limit = p.node_limit;
  c.demand_window = p.window;
  c.driver = driver;
  c.driver.threshold = p.threshold;
  c.seed = scenario_seed(spec);
  return c;
}

inline ScenarioDescriptor describe_scenario(const ScenarioSpec& spec, const ModelParams& p) {
  return {spec.zone, spec.fleet, to_string(spec.sfl), spec.multiplier, spec.seed, constants_json(p)};
}

// Throws ContractError listing every broken end-of-run invariant.
inline void check_invariants(const SimulationResult& sim, const MetricsReport& report, int capacity) {
  std::vector<std::string> bad;
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}); };
  for (const auto& s : sim.shuttles) {
    const std::string v = "shuttle " + std::to_string(s.id);
    if (s.riders != 0 || !s.onboard.empty()) bad.push_back(v + " ends with riders onboard");
    if (s.riders < 0 || s.riders > capacity) bad.push_back(v + " occupancy out of range");
    if (!close(s.empty_km + s.loaded_km, s.odometer_km)) bad.push_back(v + " empty + loaded km != odometer");
    if (s.shared_km > s.loaded_km * (1 + 1e-12) + 1e-12) bad.push_back(v + " shared km exceeds loaded km");
  }
  for (const auto& d : report.summary.shuttles)
    if (!close(d.empty_km + d.loaded_km, d.odometer_km))
      bad.push_back("shuttle " + std::to_string(d.id) + " log distances do not close");
  if (report.rideshare.rate < 0.0 || report.rideshare.rate > 1.0) bad.push_back("rideshare rate outside [0, 1]");
  for (const auto& q : report.summary.requests) {
    if (q.wait() < 0.0) bad.push_back("request " + std::to_string(q.id) + " picked up before its earliest time");
    if (!(q.dropoff > q.pickup)) bad.push_back("request " + std::to_string(q.id) + " dropped off before pickup");
  }
  for (std::size_t i = 1; i < sim.log.events.size(); ++i)
    if (sim.log.events[i].time < sim.log.events[i - 1].time) {
      bad.push_back("event log times decrease at record " + std::to_string(i));
      break;
    }
  if (!bad.empty()) throw ContractError(ValidationError(std::move(bad)).what());
}

struct ScenarioResult {
  ScenarioDescriptor descriptor;
  ScaledDay demand;
  SimulationResult sim;
  MetricsReport report;
};

inline ScenarioResult run_scenario(const LoadedZone& zone, const ScenarioSpec& spec, const ModelParams& p,
                                   const DriverModel& driver, std::ostream* audit = nullptr) {
  ScenarioResult r;
  r.descriptor = describe_scenario(spec, p);
  r.demand = scenario_demand(zone, spec, p);
  r.sim = simulate(zone.net, r.demand.day, engine_config(spec, p, driver), audit);
  r.report = build_report(r.sim.log, r.descriptor, p.hours, p.cost_denominator, p.cost_rates);
  check_invariants(r.sim, r.report, p.capacity);
  return r;
}

// --- sweeps ----------------------------------------------------------------------

struct SweepItem {
  ScenarioSpec spec;
  ScenarioDescriptor descriptor;
  std::optional<MetricsReport> report;
  std::string error;
};

inline std::vector<ScenarioSpec> expand_grid(const std::vector<LoadedZone>& zones, const GridAxes& g) {
  std::vector<std::string> issues;
  if (zones.empty()) issues.push_back("sweep: no zones");
  if (g.fleets.empty()) issues.push_back("sweep: grid.fleets is empty");
  if (g.sfls.empty()) issues.push_back("sweep: grid.sfls is empty");
  if (g.multipliers.empty()) issues.push_back("sweep: grid.multipliers is empty");
  if (g.seeds.empty()) issues.push_back("sweep: grid.seeds is empty");
  if (!issues.empty()) throw ValidationError(std::move(issues));
  std::vector<ScenarioSpec> out;
  for (const auto& z : zones)
    for (int f : g.fleets)
      for (Sfl s : g.sfls)
        for (int m : g.multipliers)
          for (auto seed : g.seeds) out.push_back({z.name, f, s, m, seed});
  return out;
}

// Runs every grid cell on `jobs` threads; results come back in grid order.
inline std::vector<SweepItem> sweep(const std::vector<LoadedZone>& zones, const GridAxes& grid, const ModelParams& p,
                                    const DriverModel& driver) {
  auto specs = expand_grid(zones, grid);
  std::vector<SweepItem> items(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < specs.size();) {
      auto& item = items[i];
      item.spec = specs[i];
      item.descriptor = describe_scenario(specs[i], p);
      try {
        const LoadedZone* zone = nullptr;
        for (const auto& z : zones)
          if (z.name == specs[i].zone) zone = &z;
        item.report = run_scenario(*zone, specs[i], p, driver).report;
      } catch (const std::exception& e) {
        item.error = e.what();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(grid.jobs, static_cast<int>(specs.size())));
  std::vector<std::jthread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  pool.clear();
  return items;
}

// --- synthetic instances -----------------------------------------------------------

struct SyntheticSpec {
  std::size_t stops = 60;
  std::size_t idle = 3;
  std::size_t requests = 40;
  std::size_t pool_days = 4;
  double lat_min = 33.74, lat_max = 33.79;
  double lon_min = -84.29, lon_max = -84.24;
  double speed_kmh = 30.0;
  double circuity = 1.3;
  double calib_slope = 1.25;
  double calib_intercept = 30.0;
  std::uint64_t seed = 1;
};

struct SyntheticInstance {
  Network net;
  DemandDay day;
  std::vector<DemandDay> pool;
  std::vector<CalibrationPoint> calibration;
  CalibrationModel model;
};

inline double haversine_km(double lat1, double lon1, double lat2, double lon2) {
  constexpr double r = 6371.0088, rad = 3.14159265358979323846 / 180.0;
  const double dlat = (lat2 - lat1) * rad, dlon = (lon2 - lon1) * rad;
  const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1 * rad) * std::cos(lat2 * rad) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * r * std::asin(std::min(1.0, std::sqrt(a)));
}

namespace detail {

inline DemandDay synthetic_day(const Network& net, std::size_t n, std::size_t users, std::uint64_t seed,
                               const ServiceDay& service) {
  Rng rng(seed);
  DemandDay day;
  std::map<std::int64_t, std::vector<TimeWindow>> held;
  auto next_user = static_cast<std::int64_t>(users) + 1;
  for (std::size_t i = 0; i < n; ++i) {
    Request r;
    r.id = static_cast<RequestId>(i + 1);
    r.user_id = static_cast<std::int64_t>(1 + rng.below(users));
    r.earliest = std::floor(rng.uniform(0.0, service.length_seconds()));
    r.pickup = static_cast<StopIndex>(rng.below(net.size()));
    do {
      r.dropoff = static_cast<StopIndex>(rng.below(net.size()));
    } while (r.dropoff == r.pickup);
    const double u = rng.uniform();
    r.riders = u < 0.85 ? 1 : (u < 0.95 ? 2 : 3);
    r.pickup_idle = net.nearest_idle(r.pickup);
    // one person cannot be on two trips at once
    const auto w = trip_window(r, net.matrix(), 600.0);
    if (std::any_of(held[r.user_id].begin(), held[r.user_id].end(), [&](const auto& h) { return overlaps(h, w); }))
      r.user_id = next_user++;
    held[r.user_id].push_back(w);
    day.requests.push_back(r);
    day.source_tags.push_back("base");
  }
  day.sort();
  return day;
}

}  // namespace detail

// Random stops in a box; distances are great-circle km times a circuity factor
// (a metric, so the triangle inequality holds), free-flow seconds from a fixed
// speed, then congested seconds through a calibration fit on noisy samples.
inline SyntheticInstance gen_synthetic(const SyntheticSpec& spec) {
  if (spec.stops < 2) throw InvalidInput("gen-synthetic: need at least 2 stops");
  if (spec.idle < 1 || spec.idle > spec.stops)
    throw InvalidInput("gen-synthetic: idle count " + std::to_string(spec.idle) + " must be in 1.." +
                       std::to_string(spec.stops));
  if (!(spec.speed_kmh > 0.0) || spec.circuity < 1.0 || !(spec.calib_slope > 0.0) || spec.calib_intercept < 0.0)
    throw InvalidInput("gen-synthetic: speed > 0, circuity >= 1, slope > 0, intercept >= 0 required");
  SyntheticInstance inst;
  Rng rng(derive_seed(spec.seed, {"stops"}));
  std::vector<Stop> stops(spec.stops);
  for (std::size_t i = 0; i < spec.stops; ++i) {
    auto& s = stops[i];
    s.id = static_cast<StopId>(1000 + i);
    s.lat = std::round(rng.uniform(spec.lat_min, spec.lat_max) * 1e6) / 1e6;
    s.lon = std::round(rng.uniform(spec.lon_min, spec.lon_max) * 1e6) / 1e6;
    s.kind = rng.uniform() < 0.1 ? StopKind::fixed_transit : StopKind::reach_virtual;
  }
  std::vector<std::size_t> order(spec.stops);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  for (std::size_t k = 0; k < spec.idle; ++k) stops[order[k]].is_idle = true;

  TravelMatrix free_flow(spec.stops);
  for (std::size_t i = 0; i < spec.stops; ++i)
    for (std::size_t j = 0; j < spec.stops; ++j) {
      if (i == j) continue;
      const double km = spec.circuity * haversine_km(stops[i].lat, stops[i].lon, stops[j].lat, stops[j].lon);
      free_flow.set(i, j, km / spec.speed_kmh * 3600.0, km);
    }

  Rng noise(derive_seed(spec.seed, {"calibration"}));
  for (int k = 0; k < 40; ++k) {
    const std::size_t i = static_cast<std::size_t>(noise.below(spec.stops));
    std::size_t j = static_cast<std::size_t>(noise.below(spec.stops));
    if (i == j) j = (j + 1) % spec.stops;
    const double b = std::round(free_flow.time(i, j));
    const double y = spec.calib_slope * b + spec.calib_intercept + noise.uniform(-5.0, 5.0);
    inst.calibration.push_back({b, std::round(y)});
  }
  inst.model = calibrate(inst.calibration);
  auto calibrated = inst.model.apply(free_flow);
  inst.net = Network(std::move(stops), calibrated);

  const std::size_t users = std::max<std::size_t>(1, spec.requests * 2 / 3);
  ServiceDay service;
  inst.day = detail::synthetic_day(inst.net, spec.requests, users, derive_seed(spec.seed, {"demand", "0"}), service);
  for (std::size_t d = 1; d <= spec.pool_days; ++d)
    inst.pool.push_back(
        detail::synthetic_day(inst.net, spec.requests, users, derive_seed(spec.seed, {"demand", std::to_string(d)}),
                              service));
  return inst;
}

// Writes stops.csv, time.csv, distance.csv, matrix.bin, calibration.csv,
// requests.csv, pool_<d>.csv and a zone.ini that ties them together.
inline void write_synthetic(const std::filesystem::path& dir, const SyntheticInstance& inst, const std::string& name) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& f, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(dir / f, mode);
    if (!out) throw Error("cannot write " + (dir / f).string());
    return out;
  };
  {
    auto out = open("stops.csv");
    write_stops(out, inst.net);
  }
  {
    auto out = open("time.csv");
    write_matrix_csv(out, inst.net, MatrixField::time);
  }
  {
    auto out = open("distance.csv");
    write_matrix_csv(out, inst.net, MatrixField::distance);
  }
  {
    auto out = open("matrix.bin", std::ios::out | std::ios::binary);
    write_matrix_binary(out, inst.net);
  }
  {
    auto out = open("calibration.csv");
    out << "baseline_seconds,observed_seconds\n";
    for (const auto& p : inst.calibration)
      out << csv::format_double(p.baseline_seconds) << ',' << csv::format_double(p.observed_seconds) << '\n';
  }
  {
    auto out = open("requests.csv");
    write_requests(out, inst.day, inst.net, false);
  }
  std::string pool;
  for (std::size_t d = 0; d < inst.pool.size(); ++d) {
    const std::string f = "pool_" + std::to_string(d + 1) + ".csv";
    auto out = open(f);
    write_requests(out, inst.pool[d], inst.net, false);
    pool += (d ? "," : "") + f;
  }
  auto ini = open("zone.ini");
  ini << "# matrices already include the calibration fit; calibration.csv holds the samples\n"
      << "[zone." << name << "]\n"
      << "stops = stops.csv\n"
      << "time = time.csv\n"
      << "distance = distance.csv\n"
      << "requests = requests.csv\n";
  if (!pool.empty()) ini << "pool = " << pool << '\n';
}

}  // namespace mt
