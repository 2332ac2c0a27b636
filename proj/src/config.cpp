#include "colphys/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "colphys/errors.hpp"

namespace colphys {
namespace {

using nlohmann::json;

// Reads keys from one JSON object and rejects any key that was never asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw InvalidConfig(where_, "expected an object");
  }

  ObjectReader(const ObjectReader&) = delete;
  ObjectReader& operator=(const ObjectReader&) = delete;

  ~ObjectReader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items()) {
      if (!known_.count(key)) throw InvalidConfig(path(key), "unknown key");
    }
  }

  std::string path(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

  const json* find(const std::string& key) {
    known_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    const json* v = find(key);
    if (!v) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) throw InvalidConfig(path(key), "expected a boolean");
      } else if constexpr (std::is_unsigned_v<T>) {
        if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<std::int64_t>() < 0)) {
          throw InvalidConfig(path(key), "expected a non-negative integer");
        }
      } else if constexpr (std::is_integral_v<T>) {
        if (!v->is_number_integer()) throw InvalidConfig(path(key), "expected an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) throw InvalidConfig(path(key), "expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v->is_string()) throw InvalidConfig(path(key), "expected a string");
      }
      out = v->get<T>();
    } catch (const json::exception& e) {
      throw InvalidConfig(path(key), e.what());
    }
  }

  template <typename T>
  void positive(const std::string& key, T& out) {
    get(key, out);
    if (!(out > T(0))) throw InvalidConfig(path(key), "must be positive");
  }

  template <typename T>
  void non_negative(const std::string& key, T& out) {
    get(key, out);
    if (!(out >= T(0))) throw InvalidConfig(path(key), "must be >= 0");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> known_;
};

json read_json_file(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig(what, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidConfig(what, std::string("malformed JSON in '") + path + "': " + e.what());
  }
}

MoistureMode read_mode(ObjectReader& r, const std::string& key, MoistureMode fallback) {
  std::string text(mode_name(fallback));
  r.get(key, text);
  const auto mode = parse_mode(text);
  if (!mode) throw InvalidConfig(r.path(key), "expected warm or cold, got '" + text + "'");
  return *mode;
}

std::string layout_name(CloudLayout layout) { return layout == CloudLayout::Deck ? "deck" : "independent"; }

void parse_constants(const json& j, MicrophysicsConstants& c, const std::string& where) {
  ObjectReader r(j, where);
  r.positive("k_auto", c.k_auto);
  r.non_negative("qc_crit", c.qc_crit);
  r.positive("k_acc", c.k_acc);
  r.positive("tau_cond", c.tau_cond);
  r.positive("tau_frz", c.tau_frz);
  r.positive("a", c.a);
  r.positive("b", c.b);
  r.positive("rho_w", c.rho_w);
  r.positive("eps", c.eps);
  r.positive("tau_dep", c.tau_dep);
  r.positive("tau_melt", c.tau_melt);
  r.positive("t_frz", c.t_frz);
  r.positive("t_melt", c.t_melt);
  r.positive("v_max", c.v_max);
}

json constants_json(const MicrophysicsConstants& c) {
  return {{"k_auto", c.k_auto},     {"qc_crit", c.qc_crit}, {"k_acc", c.k_acc},       {"tau_cond", c.tau_cond},
          {"tau_frz", c.tau_frz},   {"a", c.a},             {"b", c.b},               {"rho_w", c.rho_w},
          {"eps", c.eps},           {"tau_dep", c.tau_dep}, {"tau_melt", c.tau_melt}, {"t_frz", c.t_frz},
          {"t_melt", c.t_melt},     {"v_max", c.v_max}};
}

ComponentSpec parse_component(const json& j, const std::string& where) {
  ObjectReader r(j, where);
  ComponentSpec c;
  r.non_negative("index", c.component_index);
  std::string kind = "microphysics";
  r.get("kind", kind);
  if (kind == "microphysics") {
    c.kind = ComponentKind::Microphysics;
  } else if (kind == "stub") {
    c.kind = ComponentKind::SyntheticStub;
  } else {
    throw InvalidConfig(r.path("kind"), "expected microphysics or stub, got '" + kind + "'");
  }
  r.non_negative("stub_cost", c.stub_cost);
  r.get("stub_magnitude", c.stub_magnitude);
  return c;
}

std::vector<std::int64_t> int_list(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw InvalidConfig(where, "expected a non-empty array of integers");
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_integer() || j[i].get<std::int64_t>() < 1) {
      throw InvalidConfig(where + "[" + std::to_string(i) + "]", "expected a positive integer");
    }
    out.push_back(j[i].get<std::int64_t>());
  }
  return out;
}

}  // namespace

DeviceSpec parse_device(const json& j, const std::string& where) {
  if (j.is_string()) return load_device(j.get<std::string>());
  ObjectReader r(j, where);
  DeviceSpec d;
  r.get("name", d.name);
  r.positive("sm_count", d.sm_count);
  r.positive("regs_per_sm", d.regs_per_sm);
  r.positive("max_threads_per_sm", d.max_threads_per_sm);
  r.positive("reg_alloc_granularity", d.reg_alloc_granularity);
  r.positive("warp_size", d.warp_size);
  r.positive("max_regs_per_thread", d.max_regs_per_thread);
  r.positive("mem_bytes", d.mem_bytes);
  return d;
}

json to_json(const DeviceSpec& d) {
  return {{"name", d.name},
          {"sm_count", d.sm_count},
          {"regs_per_sm", d.regs_per_sm},
          {"max_threads_per_sm", d.max_threads_per_sm},
          {"reg_alloc_granularity", d.reg_alloc_granularity},
          {"warp_size", d.warp_size},
          {"max_regs_per_thread", d.max_regs_per_thread},
          {"mem_bytes", d.mem_bytes}};
}

DeviceSpec load_device(const std::string& name_or_path) {
  std::string lower = name_or_path;
  for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (lower == "k20x") return k20x();
  if (lower == "p100") return p100();
  return parse_device(read_json_file(name_or_path, "device"), "device");
}

LinkSpec parse_link(const json& j, const std::string& where) {
  ObjectReader r(j, where);
  LinkSpec l;
  r.positive("bandwidth_to_dev", l.bandwidth_to_dev);
  r.positive("bandwidth_from_dev", l.bandwidth_from_dev);
  r.non_negative("latency", l.latency);
  return l;
}

json to_json(const LinkSpec& l) {
  return {{"bandwidth_to_dev", l.bandwidth_to_dev}, {"bandwidth_from_dev", l.bandwidth_from_dev},
          {"latency", l.latency}};
}

CalibrationData parse_calibration(const json& j, const std::string& where) {
  ObjectReader r(j, where);
  const json* rows = r.find("rows");
  if (!rows || !rows->is_array()) throw InvalidConfig(r.path("rows"), "expected an array");
  CalibrationData data;
  for (std::size_t i = 0; i < rows->size(); ++i) {
    ObjectReader row((*rows)[i], r.path("rows") + "[" + std::to_string(i) + "]");
    CalibrationRow c;
    row.non_negative("columns", c.columns);
    c.config = read_mode(row, "config", MoistureMode::Warm);
    double in = 0.0, kernel = 0.0, out = 0.0;
    row.non_negative("t_in_ms", in);
    row.non_negative("t_kernel_ms", kernel);
    row.non_negative("t_out_ms", out);
    c.t_in = in * 1e-3;
    c.t_kernel = kernel * 1e-3;
    c.t_out = out * 1e-3;
    data.push_back(c);
  }
  return data;
}

CalibrationData load_calibration(const std::string& path) {
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    return parse_calibration(read_json_file(path, "calibration"));
  }
  std::ifstream in(path);
  if (!in) throw InvalidConfig("calibration", "cannot open '" + path + "'");
  return read_calibration_csv(in);
}

SearchSpace parse_space(const json& j, const std::string& where) {
  ObjectReader r(j, where);
  SearchSpace s = SearchSpace::defaults();
  if (const json* g = r.find("gangs")) s.gangs = int_list(*g, r.path("gangs"));
  if (const json* v = r.find("vector_lengths")) {
    s.vector_lengths.clear();
    for (auto x : int_list(*v, r.path("vector_lengths"))) s.vector_lengths.push_back(static_cast<int>(x));
  }
  if (const json* g = r.find("regs")) {
    s.regs.clear();
    for (auto x : int_list(*g, r.path("regs"))) s.regs.push_back(static_cast<int>(x));
  }
  return s;
}

json to_json(const SearchSpace& s) {
  return {{"gangs", s.gangs}, {"vector_lengths", s.vector_lengths}, {"regs", s.regs}};
}

RunConfig parse_run_config(const json& j) {
  RunConfig cfg;
  SimulationConfig& sim = cfg.sim;
  ObjectReader r(j, "");

  if (const json* g = r.find("grid")) {
    ObjectReader gr(*g, "grid");
    Index nx = sim.grid.nx, ny = sim.grid.ny, nz = sim.grid.nz;
    double dz = sim.grid.dz;
    gr.positive("nx", nx);
    gr.positive("ny", ny);
    gr.positive("nz", nz);
    gr.positive("dz", dz);
    if (nz < 2) throw InvalidConfig("grid.nz", "must be >= 2");
    sim.grid = build_grid(nx, ny, nz, dz);
  }
  sim.mode = read_mode(r, "mode", sim.mode);

  if (const json* s = r.find("scenario")) {
    ObjectReader sr(*s, "scenario");
    sr.get("cloudy_fraction", sim.scenario.cloudy_fraction);
    std::string layout = layout_name(sim.scenario.layout);
    sr.get("layout", layout);
    if (layout == "independent") {
      sim.scenario.layout = CloudLayout::Independent;
    } else if (layout == "deck") {
      sim.scenario.layout = CloudLayout::Deck;
    } else {
      throw InvalidConfig("scenario.layout", "expected independent or deck, got '" + layout + "'");
    }
    sr.non_negative("cloud_peak", sim.scenario.cloud_peak);
    sr.non_negative("cloud_jitter", sim.scenario.cloud_jitter);
  }
  r.get("seed", sim.scenario.seed);
  r.positive("dt", sim.plan.dt);
  r.non_negative("n_timesteps", sim.plan.n_timesteps);
  r.positive("n_substeps", sim.plan.n_substeps);
  r.positive("repeats", sim.repeats);
  r.positive("workers", sim.n_workers);

  if (const json* p = r.find("policy")) {
    ObjectReader pr(*p, "policy");
    std::string kind(schedule_name(sim.policy.kind));
    pr.get("kind", kind);
    const auto parsed = parse_schedule(kind);
    if (!parsed) throw InvalidConfig("policy.kind", "expected static, dynamic or guided, got '" + kind + "'");
    sim.policy.kind = *parsed;
    pr.positive("chunk", sim.policy.chunk);
    pr.positive("min_chunk", sim.policy.min_chunk);
  }

  std::string exec(execution_mode_name(sim.plan.mode));
  r.get("execution_mode", exec);
  const auto em = parse_execution_mode(exec);
  if (!em) throw InvalidConfig("execution_mode", "expected host-serial, host-threaded or hybrid-sim");
  sim.plan.mode = *em;

  if (const json* cs = r.find("components")) {
    if (!cs->is_array() || cs->empty()) throw InvalidConfig("components", "expected a non-empty array");
    sim.plan.components.clear();
    for (std::size_t i = 0; i < cs->size(); ++i) {
      sim.plan.components.push_back(parse_component((*cs)[i], "components[" + std::to_string(i) + "]"));
    }
  }
  if (const json* c = r.find("constants")) parse_constants(*c, sim.plan.constants, "constants");

  if (const json* d = r.find("device")) cfg.device = parse_device(*d, "device");
  if (const json* c = r.find("calibration")) {
    if (!c->is_string()) throw InvalidConfig("calibration", "expected a path");
    cfg.calibration_path = c->get<std::string>();
  }

  if (const json* h = r.find("hybrid")) {
    ObjectReader hr(*h, "hybrid");
    double combine_ms = sim.plan.hybrid.combine * 1e3;
    hr.non_negative("combine_ms", combine_ms);
    sim.plan.hybrid.combine = combine_ms * 1e-3;
  }

  if (const json* p = r.find("predict")) {
    ObjectReader pr(*p, "predict");
    PredictSettings& ps = cfg.predict;
    pr.non_negative("columns", ps.columns);
    ps.mode = read_mode(pr, "mode", ps.mode);
    pr.positive("regs", ps.regs);
    pr.positive("cpu_1core_factor", ps.cpu_1core_factor);
    pr.positive("cpu_efficiency_at_12", ps.cpu_efficiency_at_12);
    pr.positive("gpu_sharing_efficiency", ps.gpu_sharing_efficiency);
    double overlap_ms = ps.cpu_overlap * 1e3;
    pr.non_negative("cpu_overlap_ms", overlap_ms);
    ps.cpu_overlap = overlap_ms * 1e-3;
    if (const json* m = pr.find("memory")) {
      ObjectReader mr(*m, "predict.memory");
      mr.non_negative("input_bytes_per_column", ps.memory.input_bytes_per_column);
      mr.non_negative("temp_bytes_per_column", ps.memory.temp_bytes_per_column);
      mr.non_negative("fixed_bytes", ps.memory.fixed_bytes);
    }
  }
  if (const json* s = r.find("space")) cfg.space = parse_space(*s, "space");

  validate_config(sim);
  return cfg;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_json_file(path, "config")); }

json to_json(const RunConfig& cfg) {
  const SimulationConfig& sim = cfg.sim;
  json components = json::array();
  for (const auto& c : sim.plan.components) {
    json cj = {{"index", c.component_index},
               {"kind", c.kind == ComponentKind::Microphysics ? "microphysics" : "stub"}};
    if (c.kind == ComponentKind::SyntheticStub) {
      cj["stub_cost"] = c.stub_cost;
      cj["stub_magnitude"] = c.stub_magnitude;
    }
    components.push_back(cj);
  }
  json j = {
      {"grid", {{"nx", sim.grid.nx}, {"ny", sim.grid.ny}, {"nz", sim.grid.nz}, {"dz", sim.grid.dz}}},
      {"mode", mode_name(sim.mode)},
      {"scenario",
       {{"cloudy_fraction", sim.scenario.cloudy_fraction},
        {"layout", layout_name(sim.scenario.layout)},
        {"cloud_peak", sim.scenario.cloud_peak},
        {"cloud_jitter", sim.scenario.cloud_jitter}}},
      {"seed", sim.scenario.seed},
      {"dt", sim.plan.dt},
      {"n_timesteps", sim.plan.n_timesteps},
      {"n_substeps", sim.plan.n_substeps},
      {"repeats", sim.repeats},
      {"workers", sim.n_workers},
      {"policy",
       {{"kind", schedule_name(sim.policy.kind)}, {"chunk", sim.policy.chunk}, {"min_chunk", sim.policy.min_chunk}}},
      {"execution_mode", execution_mode_name(sim.plan.mode)},
      {"components", components},
      {"constants", constants_json(sim.plan.constants)},
      {"hybrid", {{"combine_ms", sim.plan.hybrid.combine * 1e3}}},
      {"device", to_json(cfg.device)},
      {"predict",
       {{"columns", cfg.predict.columns},
        {"mode", mode_name(cfg.predict.mode)},
        {"regs", cfg.predict.regs},
        {"cpu_1core_factor", cfg.predict.cpu_1core_factor},
        {"cpu_efficiency_at_12", cfg.predict.cpu_efficiency_at_12},
        {"gpu_sharing_efficiency", cfg.predict.gpu_sharing_efficiency},
        {"cpu_overlap_ms", cfg.predict.cpu_overlap * 1e3},
        {"memory",
         {{"input_bytes_per_column", cfg.predict.memory.input_bytes_per_column},
          {"temp_bytes_per_column", cfg.predict.memory.temp_bytes_per_column},
          {"fixed_bytes", cfg.predict.memory.fixed_bytes}}}}},
      {"space", to_json(cfg.space)},
  };
  if (cfg.calibration_path) j["calibration"] = *cfg.calibration_path;
  return j;
}

}  // namespace colphys
