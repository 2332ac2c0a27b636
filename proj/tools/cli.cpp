#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>

#include "colphys/config.hpp"
#include "colphys/driver.hpp"
#include "colphys/errors.hpp"
#include "colphys/offload.hpp"
#include "colphys/report.hpp"

namespace colphys {
namespace {

using nlohmann::json;

struct GlobalFlags {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> policy;
  std::optional<Index> chunk;
  std::optional<int> repeats;
  bool bitwise_check = false;
};

struct OffloadFlags {
  std::string device;
  std::string calibration;
  std::optional<std::int64_t> columns;
  std::optional<std::string> mode;
  std::optional<int> regs;
  std::string space;
};

std::string num(double v) { return format_number(v); }
std::string num(std::int64_t v) { return std::to_string(v); }

RunConfig load_config(const GlobalFlags& g) {
  RunConfig cfg = g.config_path.empty() ? parse_run_config(json::object()) : load_run_config(g.config_path);
  SimulationConfig& sim = cfg.sim;
  if (g.seed) sim.scenario.seed = *g.seed;
  if (g.workers) sim.n_workers = *g.workers;
  if (g.repeats) sim.repeats = *g.repeats;
  if (g.chunk) {
    sim.policy.chunk = *g.chunk;
    sim.policy.min_chunk = *g.chunk;
  }
  if (g.policy) {
    const auto kind = parse_schedule(*g.policy);
    if (!kind) throw InvalidConfig("--policy", "expected static, dynamic or guided, got '" + *g.policy + "'");
    sim.policy.kind = *kind;
  }
  validate_config(sim);
  return cfg;
}

const std::vector<std::string> kRunColumns = {
    "experiment",          "mode",
    "nx",                  "ny",
    "nz",                  "columns",
    "policy",              "chunk",
    "workers",             "execution_mode",
    "n_timesteps",         "repeats",
    "avg_microphysics_per_step_s", "min_microphysics_per_step_s",
    "max_microphysics_per_step_s", "avg_total_per_step_s",
    "min_total_per_step_s",        "max_total_per_step_s",
    "imbalance_factor",    "checksum",
    "bitwise_check"};

std::vector<std::string> run_row(const std::string& experiment, const SimulationConfig& sim,
                                 const SimulationReport& r, const std::string& bitwise) {
  return {experiment,
          std::string(mode_name(sim.mode)),
          num(std::int64_t(sim.grid.nx)),
          num(std::int64_t(sim.grid.ny)),
          num(std::int64_t(sim.grid.nz)),
          num(std::int64_t(sim.grid.columns())),
          std::string(schedule_name(sim.policy.kind)),
          num(std::int64_t(sim.policy.kind == ScheduleKind::Guided ? sim.policy.min_chunk : sim.policy.chunk)),
          num(std::int64_t(sim.n_workers)),
          std::string(execution_mode_name(sim.plan.mode)),
          num(std::int64_t(r.n_timesteps)),
          num(std::int64_t(r.repeats)),
          num(r.microphysics_per_step.mean),
          num(r.microphysics_per_step.min),
          num(r.microphysics_per_step.max),
          num(r.total_per_step.mean),
          num(r.total_per_step.min),
          num(r.total_per_step.max),
          num(r.imbalance_factor),
          r.checksum,
          bitwise};
}

// Serial single-worker reference run compared bit for bit with `report`.
std::string bitwise_against_serial(const SimulationConfig& sim, const SimulationReport& report) {
  if (!report.final_state) return "skipped";
  SimulationConfig ref = sim;
  ref.n_workers = 1;
  ref.repeats = 1;
  ref.policy.kind = ScheduleKind::Static;
  ref.plan.mode = ExecutionMode::HostSerial;
  const auto expected = run_simulation(ref);
  return bitwise_equal(*expected.final_state, *report.final_state) ? "pass" : "fail";
}

int finish(const GlobalFlags& g, const ReportTable& table, const json& config, std::ostream& out) {
  write_report(g.out_dir, table, config);
  out << to_csv(table);
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (table.columns[i] == "bitwise_check" && row[i] == "fail") return 1;
    }
  }
  return 0;
}

int cmd_run(const GlobalFlags& g, std::ostream& out) {
  const RunConfig cfg = load_config(g);
  const auto report = run_simulation(cfg.sim);
  const std::string bitwise = g.bitwise_check ? bitwise_against_serial(cfg.sim, report) : "skipped";
  ReportTable table{"run", kRunColumns, {}};
  table.add_row(run_row("run", cfg.sim, report, bitwise));
  return finish(g, table, to_json(cfg), out);
}

int cmd_sweep(const GlobalFlags& g, const std::vector<std::int64_t>& axis, std::ostream& out) {
  if (axis.empty()) throw InvalidConfig("--columns", "sweep axis is empty");
  RunConfig cfg = load_config(g);
  ReportTable table{"sweep", kRunColumns, {}};
  for (std::int64_t columns : axis) {
    if (columns < 1) throw InvalidConfig("--columns", "column counts must be positive");
    const auto [nx, ny] = grid_extents_for(static_cast<long>(columns));
    SimulationConfig sim = cfg.sim;
    sim.grid = build_grid(nx, ny, cfg.sim.grid.nz, cfg.sim.grid.dz);
    const auto report = run_simulation(sim);
    const std::string bitwise = g.bitwise_check ? bitwise_against_serial(sim, report) : "skipped";
    table.add_row(run_row("sweep", sim, report, bitwise));
  }
  json echo = to_json(cfg);
  echo["sweep_columns"] = axis;
  return finish(g, table, echo, out);
}

int cmd_sched_compare(const GlobalFlags& g, const std::vector<std::string>& policies, std::ostream& out) {
  if (policies.empty()) throw InvalidConfig("--policies", "no policies given");
  std::vector<ScheduleKind> kinds;
  for (const auto& p : policies) {
    const auto kind = parse_schedule(p);
    if (!kind) throw InvalidConfig("--policies", "unknown policy '" + p + "'");
    kinds.push_back(*kind);
  }
  RunConfig cfg = load_config(g);
  ReportTable table{"sched-compare", kRunColumns, {}};
  std::optional<ModelState<double>> first;
  for (ScheduleKind kind : kinds) {
    SimulationConfig sim = cfg.sim;
    sim.policy.kind = kind;
    const auto report = run_simulation(sim);
    std::string bitwise = "skipped";
    if (g.bitwise_check && report.final_state) {
      if (!first) first = report.final_state;
      bitwise = bitwise_equal(*first, *report.final_state) ? "pass" : "fail";
    }
    table.add_row(run_row("sched-compare", sim, report, bitwise));
  }
  json echo = to_json(cfg);
  echo["policies"] = policies;
  return finish(g, table, echo, out);
}

CalibratedModel calibrated_for(const std::string& calibration, const DeviceSpec& device) {
  const CalibrationData data = load_calibration(calibration);
  if (data.empty()) throw InvalidConfig("calibration", "no rows in '" + calibration + "'");
  return calibrate(data, TransferVolumes{}, device);
}

void apply_offload_flags(RunConfig& cfg, const OffloadFlags& f, std::string& calibration) {
  if (!f.device.empty()) cfg.device = load_device(f.device);
  if (f.columns) {
    if (*f.columns < 0) throw InvalidConfig("--columns", "must be >= 0");
    cfg.predict.columns = *f.columns;
  }
  if (f.mode) {
    const auto mode = parse_mode(*f.mode);
    if (!mode) throw InvalidConfig("--mode", "expected warm or cold, got '" + *f.mode + "'");
    cfg.predict.mode = *mode;
  }
  if (f.regs) {
    if (*f.regs < 1) throw InvalidConfig("--regs", "must be >= 1");
    cfg.predict.regs = *f.regs;
  }
  if (!f.space.empty()) {
    std::ifstream in(f.space);
    if (!in) throw InvalidConfig("--space", "cannot open '" + f.space + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw InvalidConfig("--space", e.what());
    }
    cfg.space = parse_space(j, "space");
  }
  calibration = !f.calibration.empty() ? f.calibration : cfg.calibration_path.value_or("");
}

int cmd_predict(const GlobalFlags& g, const OffloadFlags& f, std::ostream& out) {
  RunConfig cfg = load_config(g);
  std::string calibration;
  apply_offload_flags(cfg, f, calibration);
  if (calibration.empty()) throw InvalidConfig("--calibration", "predict needs a calibration table");
  const CalibratedModel model = calibrated_for(calibration, cfg.device);
  const PredictSettings& ps = cfg.predict;

  const Occupancy occ = occupancy(cfg.device, ps.regs);
  const std::int64_t concurrent = max_concurrent_threads(cfg.device, ps.regs);
  const PhaseTimes phases = predict_phases(model, ps.columns, ps.mode);
  const HybridTimeline hybrid =
      hybrid_step_time(ps.cpu_overlap, model.volumes.bytes_in(ps.columns, ps.mode),
                       model.volumes.bytes_out(ps.columns, ps.mode), phases.t_kernel, cfg.sim.plan.hybrid.combine,
                       model.link);
  const double device_time = phases.total();
  std::optional<int> be;
  if (device_time > 0.0) {
    be = break_even_cores(device_time, ps.cpu_1core_factor * device_time,
                          EfficiencyCurve::linear(1.0, 1.0, 12.0, ps.cpu_efficiency_at_12),
                          EfficiencyCurve::constant(ps.gpu_sharing_efficiency));
  }
  const MemoryEstimate mem = device_memory_required(ps.columns, ps.memory, cfg.device);
  const double total = phases.total();
  auto share = [&](double t) { return num(total > 0.0 ? 100.0 * t / total : 0.0); };

  ReportTable table{"predict",
                    {"device", "mode", "columns", "regs", "threads_per_sm", "occupancy", "max_concurrent_threads",
                     "waves", "t_in_s", "t_kernel_s", "t_out_s", "in_share_pct", "kernel_share_pct",
                     "out_share_pct", "hybrid_total_s", "break_even_cores", "memory_bytes", "oom",
                     "calibration_max_rel_error"},
                    {}};
  table.add_row({cfg.device.name, std::string(mode_name(ps.mode)), num(ps.columns), num(std::int64_t(ps.regs)),
                 num(std::int64_t(occ.threads_per_sm)), num(occ.occupancy), num(concurrent),
                 num(wave_count(ps.columns, concurrent)), num(phases.t_in), num(phases.t_kernel), num(phases.t_out),
                 share(phases.t_in), share(phases.t_kernel), share(phases.t_out), num(hybrid.total),
                 be ? num(std::int64_t(*be)) : std::string("none"), num(mem.bytes),
                 mem.out_of_memory ? "true" : "false", num(model.max_relative_error)});
  json echo = to_json(cfg);
  echo["calibration"] = calibration;
  echo["link"] = to_json(model.link);
  return finish(g, table, echo, out);
}

int cmd_calibrate(const GlobalFlags& g, const OffloadFlags& f, std::ostream& out) {
  RunConfig cfg = load_config(g);
  std::string calibration;
  apply_offload_flags(cfg, f, calibration);
  if (calibration.empty()) throw InvalidConfig("--calibration", "calibrate needs a calibration table");
  const CalibratedModel model = calibrated_for(calibration, cfg.device);

  ReportTable table{"calibrate",
                    {"columns", "config", "t_in_s", "t_kernel_s", "t_out_s", "pred_t_in_s", "pred_t_kernel_s",
                     "pred_t_out_s", "max_rel_error", "bandwidth_to_dev", "bandwidth_from_dev", "latency_s",
                     "resident_threads", "per_column_work"},
                    {}};
  for (const auto& r : model.residuals) {
    const auto& launch = model.launch(r.row.config);
    table.add_row({num(r.row.columns), std::string(mode_name(r.row.config)), num(r.row.t_in), num(r.row.t_kernel),
                   num(r.row.t_out), num(r.predicted.t_in), num(r.predicted.t_kernel), num(r.predicted.t_out),
                   num(r.max_relative_error), num(model.link.bandwidth_to_dev), num(model.link.bandwidth_from_dev),
                   num(model.link.latency), num(resident_threads(model.device, launch)),
                   num(model.cost(r.row.config).per_column_work)});
  }
  json echo = to_json(cfg);
  echo["calibration"] = calibration;
  return finish(g, table, echo, out);
}

int cmd_autotune(const GlobalFlags& g, const OffloadFlags& f, std::ostream& out) {
  RunConfig cfg = load_config(g);
  std::string calibration;
  apply_offload_flags(cfg, f, calibration);
  const CalibrationData data = calibration.empty() ? reference_phase_table() : load_calibration(calibration);
  if (data.empty()) throw InvalidConfig("calibration", "no rows");
  const CalibratedModel model = calibrate(data, TransferVolumes{}, cfg.device);
  if (cfg.space.size() == 0) throw InvalidConfig("space", "search space is empty");
  const auto r = autotune(cfg.predict.columns, cfg.device, model.cost(cfg.predict.mode), cfg.space);

  ReportTable table{"autotune",
                    {"device", "mode", "columns", "space_size", "evaluated", "infeasible", "best_gangs",
                     "best_vector_length", "best_regs", "best_time_s", "worst_gangs", "worst_vector_length",
                     "worst_regs", "worst_time_s", "spread"},
                    {}};
  table.add_row({cfg.device.name, std::string(mode_name(cfg.predict.mode)), num(cfg.predict.columns),
                 num(std::int64_t(cfg.space.size())), num(std::int64_t(r.evaluated)),
                 num(std::int64_t(r.infeasible)), num(r.best.gangs), num(std::int64_t(r.best.vector_length)),
                 num(std::int64_t(r.best.regs_per_thread)), num(r.best_time), num(r.worst.gangs),
                 num(std::int64_t(r.worst.vector_length)), num(std::int64_t(r.worst.regs_per_thread)),
                 num(r.worst_time), num(r.spread)});
  json echo = to_json(cfg);
  if (!calibration.empty()) echo["calibration"] = calibration;
  return finish(g, table, echo, out);
}

}  // namespace

std::pair<long, long> grid_extents_for(long columns) {
  if (columns < 1) throw std::invalid_argument("grid_extents_for: columns must be positive");
  long nx = static_cast<long>(std::sqrt(static_cast<double>(columns)));
  while (nx > 1 && columns % nx != 0) --nx;
  if (nx < 1) nx = 1;
  return {nx, columns / nx};
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Column-physics benchmark and offload model", "colphys-bench"};
  app.require_subcommand(1);

  GlobalFlags g;
  app.add_option("--config", g.config_path, "JSON run config");
  app.add_option("--out", g.out_dir, "Directory for report.csv and report.json");
  app.add_option("--seed", g.seed, "Scenario seed");
  app.add_option("--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--policy", g.policy, "static, dynamic or guided");
  app.add_option("--chunk", g.chunk, "Columns per grab (dynamic) or minimum grab (guided)")
      ->check(CLI::PositiveNumber);
  app.add_option("--repeats", g.repeats, "Whole-run repeats")->check(CLI::PositiveNumber);
  app.add_flag("--bitwise-check", g.bitwise_check, "Compare final states bit for bit");

  auto* run = app.add_subcommand("run", "Run the simulation");
  auto* sweep = app.add_subcommand("sweep", "Run once per column count");
  std::vector<std::int64_t> axis;
  sweep->add_option("--columns", axis, "Column counts, e.g. 2000,4000")->delimiter(',')->required();
  auto* sched = app.add_subcommand("sched-compare", "Run once per scheduling policy");
  std::vector<std::string> policies{"static", "dynamic", "guided"};
  sched->add_option("--policies", policies, "Policies to compare")->delimiter(',');

  OffloadFlags f;
  auto add_offload = [&](CLI::App* sub, bool with_space) {
    sub->add_option("--device", f.device, "k20x, p100 or a device JSON file");
    sub->add_option("--calibration", f.calibration, "Phase-time table (.csv or .json)");
    sub->add_option("--columns", f.columns, "Column count");
    sub->add_option("--mode", f.mode, "warm or cold");
    sub->add_option("--regs", f.regs, "Registers per thread");
    if (with_space) sub->add_option("--space", f.space, "Search-space JSON file");
  };
  auto* predict = app.add_subcommand("predict", "Offload prediction report");
  add_offload(predict, false);
  auto* calib = app.add_subcommand("calibrate", "Fit the offload model to a phase-time table");
  add_offload(calib, false);
  auto* tune = app.add_subcommand("autotune", "Exhaustive launch-configuration search");
  add_offload(tune, true);
  for (auto* sub : {run, sweep, sched, predict, calib, tune}) sub->fallthrough();

  std::vector<std::string> argv_storage{"colphys-bench"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(g, out);
    if (sweep->parsed()) return cmd_sweep(g, axis, out);
    if (sched->parsed()) return cmd_sched_compare(g, policies, out);
    if (predict->parsed()) return cmd_predict(g, f, out);
    if (calib->parsed()) return cmd_calibrate(g, f, out);
    if (tune->parsed()) return cmd_autotune(g, f, out);
  } catch (const InvalidConfig& e) {
    err << "invalid config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << "error: no subcommand\n";
  return 2;
}

}  // namespace colphys
