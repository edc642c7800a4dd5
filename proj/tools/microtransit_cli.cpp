#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "microtransit/microtransit.hpp"

namespace fs = std::filesystem;

namespace {

constexpr const char* kOutEnv = "MICROTRANSIT_OUT";

std::string default_out() {
  const char* v = std::getenv(kOutEnv);
  return v && *v ? v : "out";
}

std::ofstream open_out(const fs::path& p, std::ios::openmode mode = std::ios::out) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, mode);
  if (!out) throw mt::Error("cannot write " + p.string());
  return out;
}

struct Overrides {
  std::string config;
  std::vector<std::string> sets;
  std::string stops, time, distance, matrix_bin, calibration, requests;
  std::vector<std::string> pool;
  std::string zone_name = "zone";
  std::string out;
  bool audit = false;
  std::string denominator;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config, "scenario config file");
    app->add_option("--set", sets, "override, e.g. params.delta=600 (repeatable)");
    app->add_option("--stops", stops, "stops CSV (instead of a config zone)");
    app->add_option("--time", time, "time matrix CSV");
    app->add_option("--distance", distance, "distance matrix CSV");
    app->add_option("--matrix-bin", matrix_bin, "binary matrix container");
    app->add_option("--calibration", calibration, "calibration samples CSV");
    app->add_option("--requests", requests, "requests CSV");
    app->add_option("--pool", pool, "extra request days for scaling")->delimiter(',');
    app->add_option("--zone-name", zone_name, "name for a zone given by flags");
    app->add_option("-o,--out", out, std::string("output directory (default $") + kOutEnv + " or ./out)");
    app->add_flag("--audit", audit, "write JSON-lines dispatch/rebalance audit");
    app->add_option("--cost-denominator", denominator, "riders or trips");
  }

  mt::ScenarioConfig load() const {
    mt::ScenarioConfig cfg;
    if (!config.empty()) cfg = mt::load_config_file(config);
    if (!stops.empty()) {
      const std::string sec = "zone." + zone_name;
      auto put = [&](const char* key, const std::string& v) {
        if (!v.empty()) mt::apply_setting(cfg, sec, key, v, "--" + std::string(key) + ": ");
      };
      put("stops", stops);
      put("time", time);
      put("distance", distance);
      put("matrix_bin", matrix_bin);
      put("calibration", calibration);
      put("requests", requests);
      if (!pool.empty()) {
        std::string joined;
        for (const auto& p : pool) joined += (joined.empty() ? "" : ",") + p;
        put("pool", joined);
      }
    }
    for (const auto& s : sets) {
      auto eq = s.find('=');
      auto dot = s.rfind('.', eq);
      if (eq == std::string::npos || dot == std::string::npos)
        throw mt::ConfigError("--set " + s + ": expected section.key=value");
      mt::apply_setting(cfg, s.substr(0, dot), s.substr(dot + 1, eq - dot - 1), s.substr(eq + 1), "--set " + s + ": ");
    }
    if (!denominator.empty()) cfg.params.cost_denominator = mt::parse_cost_denominator(denominator);
    if (audit) cfg.audit = true;
    if (!out.empty()) cfg.output_dir = out;
    if (cfg.output_dir.empty()) cfg.output_dir = default_out();
    return cfg;
  }
};

std::string scenario_dir_name(const mt::ScenarioSpec& s) {
  return s.zone + "_V" + std::to_string(s.fleet) + "_SFL" + mt::to_string(s.sfl) + "_x" +
         std::to_string(s.multiplier) + "_seed" + std::to_string(s.seed);
}

void write_report_files(const fs::path& dir, const mt::MetricsReport& report) {
  {
    auto out = open_out(dir / "report.csv");
    mt::write_report_csv_header(out, report.cost_rates);
    mt::write_report_csv_row(out, report);
  }
  auto out = open_out(dir / "report.json");
  out << mt::report_json(report).dump(2) << '\n';
}

int cmd_run(const Overrides& o, const std::string& zone_sel, std::optional<int> fleet, const std::string& sfl,
            std::optional<int> mult, const std::optional<std::uint64_t>& seed) {
  auto cfg = o.load();
  if (fleet) cfg.fleet = *fleet;
  if (!sfl.empty()) cfg.sfl = mt::parse_sfl(sfl);
  if (mult) cfg.multiplier = *mult;
  if (seed) cfg.seed = *seed;
  if (fleet && *fleet < 1) throw mt::ConfigError("--fleet must be a positive integer, got " + std::to_string(*fleet));
  if (mult && *mult < 1)
    throw mt::ConfigError("--multiplier must be a positive integer, got " + std::to_string(*mult));
  mt::validate(cfg);
  if (cfg.zones.empty()) throw mt::ConfigError("no zone given (use --config or --stops/--time/--distance/--requests)");
  const mt::ZoneFiles* files = &cfg.zones.front();
  if (!zone_sel.empty()) {
    files = nullptr;
    for (const auto& z : cfg.zones)
      if (z.name == zone_sel) files = &z;
    if (!files) throw mt::ConfigError("zone '" + zone_sel + "' not in config");
  }
  auto zone = mt::load_zone_files(*files);
  auto driver = mt::load_driver_model(cfg.params);
  mt::ScenarioSpec spec{zone.name, cfg.fleet, cfg.sfl, cfg.multiplier, cfg.seed};
  const fs::path dir = fs::path(cfg.output_dir) / scenario_dir_name(spec);
  fs::create_directories(dir);

  std::optional<std::ofstream> audit;
  if (cfg.audit) audit = open_out(dir / "audit.jsonl");
  auto result = mt::run_scenario(zone, spec, cfg.params, driver, audit ? &*audit : nullptr);
  {
    auto out = open_out(dir / "events.jsonl");
    mt::write_event_log(out, result.sim.log);
  }
  {
    auto out = open_out(dir / "demand.csv");
    mt::write_requests(out, result.demand.day, zone.net, true);
  }
  write_report_files(dir, result.report);
  if (result.demand.shortfall) std::cerr << "warning: " << *result.demand.shortfall << '\n';
  if (result.sim.uneven_initial_placement)
    std::cerr << "note: fleet not divisible by idle stops; extra shuttles start at the lowest stop ids\n";
  if (result.sim.suboptimal_solves > 0)
    std::cerr << "warning: " << result.sim.suboptimal_solves << " master solves hit the node limit\n";
  const auto& r = result.report;
  std::cout << spec.zone << " V=" << spec.fleet << " SFL " << mt::to_string(spec.sfl) << " x" << spec.multiplier
            << ": " << r.trips << " trips, mean wait " << mt::cents(r.wait.mean) << " s, p95 "
            << mt::cents(r.wait.p95) << " s, " << mt::cents(r.total_km) << " km\n"
            << "wrote " << dir.string() << '\n';
  return 0;
}

int cmd_sweep(const Overrides& o, int jobs) {
  auto cfg = o.load();
  if (jobs > 0) cfg.grid.jobs = jobs;
  mt::validate(cfg);
  std::vector<mt::LoadedZone> zones;
  for (const auto& z : cfg.zones) zones.push_back(mt::load_zone_files(z));
  auto driver = mt::load_driver_model(cfg.params);
  auto items = mt::sweep(zones, cfg.grid, cfg.params, driver);
  const fs::path dir(cfg.output_dir);
  auto csv = open_out(dir / "sweep.csv");
  mt::write_report_csv_header(csv, cfg.params.cost_rates);
  auto failures = open_out(dir / "sweep_failures.csv");
  mt::write_failure_csv_header(failures);
  nlohmann::json all = nlohmann::json::array();
  std::size_t failed = 0;
  for (const auto& it : items) {
    if (it.report) {
      mt::write_report_csv_row(csv, *it.report);
      all.push_back(mt::report_json(*it.report));
    } else {
      ++failed;
      mt::write_failure_csv_row(failures, it.descriptor, it.error);
      all.push_back({{"scenario", scenario_dir_name(it.spec)}, {"error", it.error}});
      std::cerr << "failed: " << scenario_dir_name(it.spec) << ": " << it.error << '\n';
    }
  }
  auto js = open_out(dir / "sweep.json");
  js << all.dump(2) << '\n';
  std::cout << items.size() - failed << " of " << items.size() << " scenarios completed; wrote "
            << (dir / "sweep.csv").string() << '\n';
  return failed == 0 ? 0 : 1;
}

int cmd_gen(const std::string& preset, mt::SyntheticSpec spec, const std::string& name, std::string out) {
  if (preset == "belvedere") {
    spec.stops = 465, spec.idle = 4, spec.requests = 39;
  } else if (preset == "west-atlanta") {
    spec.stops = 485, spec.idle = 3, spec.requests = 82;
  } else if (!preset.empty()) {
    throw mt::ConfigError("unknown preset '" + preset + "' (allowed: belvedere, west-atlanta)");
  }
  if (out.empty()) out = (fs::path(default_out()) / (preset.empty() ? name : preset)).string();
  auto inst = mt::gen_synthetic(spec);
  mt::write_synthetic(out, inst, preset.empty() ? name : preset);
  std::cout << "wrote " << inst.net.size() << " stops, " << inst.net.idle_stops().size() << " idle, "
            << inst.day.size() << " requests (+" << inst.pool.size() << " pool days) to " << out << '\n';
  return 0;
}

int cmd_replay(const std::string& events, const std::string& descriptor, const std::string& out_dir,
               const Overrides& o) {
  std::ifstream in(events);
  if (!in) throw mt::Error("cannot open " + events);
  auto log = mt::read_event_log(in);
  mt::ScenarioDescriptor d;
  mt::ModelParams params;
  if (!o.config.empty()) params = mt::load_config_file(o.config).params;
  if (!o.denominator.empty()) params.cost_denominator = mt::parse_cost_denominator(o.denominator);
  if (!descriptor.empty()) {
    std::ifstream din(descriptor);
    if (!din) throw mt::Error("cannot open " + descriptor);
    auto j = nlohmann::json::parse(din);
    d = mt::descriptor_from_json(j);
    const auto& cost = j.at("cost");
    params.hours = cost.at("hours").get<double>();
    params.cost_denominator = mt::parse_cost_denominator(cost.at("denominator").get<std::string>());
    params.cost_rates.clear();
    for (const auto& row : cost.at("rows")) params.cost_rates.push_back(row.at("rate").get<double>());
    if (params.cost_rates.empty()) params.cost_rates = d.constants.value("cost_rates", std::vector<double>{35.0});
  } else {
    int shuttles = 0;
    for (const auto& e : log.events)
      if (e.type == mt::event::shuttle_init) ++shuttles;
    d.fleet = shuttles;
    d.constants = mt::constants_json(params);
  }
  auto report = mt::build_report(log, d, params.hours, params.cost_denominator, params.cost_rates);
  const fs::path dir = out_dir.empty() ? fs::path(default_out()) / "replay" : fs::path(out_dir);
  write_report_files(dir, report);
  std::cout << "replayed " << log.events.size() << " events; wrote " << dir.string() << '\n';
  return 0;
}

int cmd_cost_table(const std::string& zone, double from, double to, double step, double hours,
                   const std::string& denominator, const std::vector<int>& fleets, const std::vector<long>& riders,
                   const std::vector<long>& trips, const std::string& out) {
  mt::CostTableSpec spec;
  if (auto p = mt::cost_table_preset(zone)) {
    spec = *p;
  } else if (fleets.empty() || (riders.empty() && trips.empty())) {
    throw mt::ConfigError("unknown zone preset '" + zone +
                          "' (allowed: belvedere, west-atlanta); or pass --fleets with --riders/--trips");
  }
  if (!zone.empty()) spec.zone = zone;
  if (!fleets.empty()) spec.fleets = fleets;
  if (!riders.empty()) spec.riders = riders;
  if (!trips.empty()) spec.trips = trips;
  spec.hours = hours;
  spec.denominator = mt::parse_cost_denominator(denominator);
  const auto& counts = spec.denominator == mt::CostDenominator::riders ? spec.riders : spec.trips;
  spec.multipliers.clear();
  for (std::size_t k = 0; k < counts.size(); ++k) spec.multipliers.push_back(static_cast<int>(k + 1));
  if (spec.riders.size() != spec.trips.size()) {
    auto& other = spec.denominator == mt::CostDenominator::riders ? spec.trips : spec.riders;
    other = counts;
  }
  auto rates = mt::rate_range(from, to, step);
  auto rows = mt::cost_table(spec, rates);
  if (out.empty() || out == "-") {
    mt::write_cost_table_csv(std::cout, spec, rows);
  } else {
    auto f = open_out(out);
    mt::write_cost_table_csv(f, spec, rows);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Microtransit fleet simulator: epoch dispatch, rebalancing, scenario sweeps"};
  app.require_subcommand(1);

  Overrides run_o, sweep_o, replay_o;
  std::string run_zone, run_sfl;
  std::optional<int> run_fleet, run_mult;
  std::optional<std::uint64_t> run_seed;
  auto* run = app.add_subcommand("run", "simulate one scenario");
  run_o.attach(run);
  run->add_option("--zone", run_zone, "zone name from the config");
  run->add_option("--fleet", run_fleet, "number of shuttles");
  run->add_option("--sfl", run_sfl, "I, II, III or IV");
  run->add_option("--multiplier", run_mult, "ridership multiplier");
  run->add_option("--seed", run_seed, "master seed");

  int sweep_jobs = 0;
  auto* sw = app.add_subcommand("sweep", "run the config's grid (fleets x sfls x multipliers x seeds)");
  sweep_o.attach(sw);
  sw->add_option("-j,--jobs", sweep_jobs, "parallel scenarios");

  mt::SyntheticSpec gen_spec;
  std::string gen_preset, gen_name = "synthetic", gen_out;
  auto* gen = app.add_subcommand("gen-synthetic", "write a random zone instance");
  gen->add_option("--preset", gen_preset, "belvedere or west-atlanta sized instance");
  gen->add_option("--stops", gen_spec.stops, "stop count");
  gen->add_option("--idle", gen_spec.idle, "idle stop count");
  gen->add_option("--requests", gen_spec.requests, "requests per day");
  gen->add_option("--pool-days", gen_spec.pool_days, "extra days for ridership scaling");
  gen->add_option("--seed", gen_spec.seed, "seed");
  gen->add_option("--speed-kmh", gen_spec.speed_kmh, "free-flow speed");
  gen->add_option("--name", gen_name, "zone name");
  gen->add_option("-o,--out", gen_out, "output directory");

  std::string replay_events, replay_descriptor, replay_out;
  auto* rep = app.add_subcommand("replay", "rebuild a report from a saved event log");
  rep->add_option("events", replay_events, "events.jsonl")->required();
  rep->add_option("--descriptor", replay_descriptor, "report.json of the original run (scenario echo, cost rates)");
  rep->add_option("-c,--config", replay_o.config, "config for cost parameters");
  rep->add_option("--cost-denominator", replay_o.denominator, "riders or trips");
  rep->add_option("-o,--out", replay_out, "output directory");

  std::string ct_zone, ct_denominator = "riders", ct_out;
  double ct_from = 20, ct_to = 50, ct_step = 5, ct_hours = 13;
  std::vector<int> ct_fleets;
  std::vector<long> ct_riders, ct_trips;
  auto* ct = app.add_subcommand("cost-table", "cost per trip across shuttle hourly rates");
  ct->add_option("--zone", ct_zone, "belvedere or west-atlanta, or a label with --fleets/--riders");
  ct->add_option("--from", ct_from, "first rate ($/h)");
  ct->add_option("--to", ct_to, "last rate ($/h)");
  ct->add_option("--step", ct_step, "rate step");
  ct->add_option("--hours", ct_hours, "service hours per day");
  ct->add_option("--cost-denominator", ct_denominator, "riders or trips");
  ct->add_option("--fleets", ct_fleets, "fleet sizes")->delimiter(',');
  ct->add_option("--riders", ct_riders, "riders per multiplier")->delimiter(',');
  ct->add_option("--trips", ct_trips, "trips per multiplier")->delimiter(',');
  ct->add_option("-o,--out", ct_out, "output CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(run_o, run_zone, run_fleet, run_sfl, run_mult, run_seed);
    if (*sw) return cmd_sweep(sweep_o, sweep_jobs);
    if (*gen) return cmd_gen(gen_preset, gen_spec, gen_name, gen_out);
    if (*rep) return cmd_replay(replay_events, replay_descriptor, replay_out, replay_o);
    if (*ct)
      return cmd_cost_table(ct_zone, ct_from, ct_to, ct_step, ct_hours, ct_denominator, ct_fleets, ct_riders,
                            ct_trips, ct_out);
  } catch (const mt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const mt::ValidationError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
