#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "colphys/errors.hpp"
#include "colphys/executor.hpp"
#include "colphys/offload.hpp"

namespace colphys {

enum class ComponentKind { Microphysics, SyntheticStub };

struct ComponentSpec {
  int component_index = 0;
  ComponentKind kind = ComponentKind::Microphysics;
  double stub_cost = 0.0;         // s of arithmetic per column
  double stub_magnitude = 1e-5;   // K/s peak theta tendency
};

enum class ExecutionMode { HostSerial, HostThreaded, HybridSim };

std::string_view execution_mode_name(ExecutionMode mode) noexcept;
std::optional<ExecutionMode> parse_execution_mode(std::string_view name) noexcept;

/// Device side of the HybridSim lane. The model defaults to a fit of the reference phase table.
struct HybridSettings {
  CalibratedModel model = calibrate(reference_phase_table());
  double combine = 1.0e-3;  // s to merge device and host source terms
};

enum class GroupKind { HaloSwap, SubGrid, Dynamics, PressureSolve, Misc };

std::string_view group_name(GroupKind kind) noexcept;

struct TimestepPlan {
  std::vector<GroupKind> groups{GroupKind::HaloSwap, GroupKind::SubGrid, GroupKind::Dynamics,
                                GroupKind::PressureSolve, GroupKind::Misc};
  std::vector<ComponentSpec> components{{0, ComponentKind::Microphysics, 0.0, 0.0}};  ///< run in listed order
  double dt = 10.0;
  int n_timesteps = 1;
  int n_substeps = 2;
  ExecutionMode mode = ExecutionMode::HostThreaded;
  MicrophysicsConstants constants{};
  HybridSettings hybrid{};
};

/// Throws InvalidConfig naming the offending field.
void validate_plan(const TimestepPlan& plan);

struct GroupSpan {
  GroupKind kind = GroupKind::Misc;
  double start = 0.0;  // s since step start
  double end = 0.0;
};

struct ComponentTiming {
  int component_index = 0;
  ComponentKind kind = ComponentKind::Microphysics;
  double wall_time = 0.0;
};

struct StepReport {
  std::vector<ComponentTiming> components;
  std::vector<GroupSpan> groups;
  double microphysics_time = 0.0;
  double accumulate_time = 0.0;  // accumulate + integrate
  std::optional<HybridTimeline> hybrid;
  ImbalanceReport imbalance;  // microphysics component
  ClipReport clip;
  bool terminated = false;
  double total = 0.0;
};

// Synthetic stub internals live in stub_work.cpp.
double burn_iterations(std::uint64_t iterations) noexcept;
std::uint64_t stub_iterations(double seconds);

/// Busy-work component with a smooth, deterministic theta and vapour tendency.
template <typename Scalar>
ColumnKernel<Scalar> stub_kernel(const ComponentSpec& spec) {
  const std::uint64_t iterations = stub_iterations(spec.stub_cost);
  const double magnitude = spec.stub_magnitude;
  const int salt = spec.component_index;
  return [iterations, magnitude, salt](const ModelState<Scalar>& state, Index c) {
    auto s = ColumnSources<Scalar>::zeros(state.grid.nz, state.mode);
    const double sink = burn_iterations(iterations);
    const Index nz = state.grid.nz;
    const double phase = 0.37 * static_cast<double>(c) + 1.3 * salt;
    for (Index k = 0; k < nz; ++k) {
      const double shape = std::sin(thermo::kPi * (static_cast<double>(k) + 0.5) / static_cast<double>(nz));
      s.theta(k) = Scalar(magnitude * shape * std::cos(phase));
      s.q(k, 0) = Scalar(1e-4 * magnitude * shape * std::sin(phase));
    }
    // `sink` is always 0 but the compiler cannot prove it, which keeps the busy-work alive.
    s.theta(0) += Scalar(sink);
    s.work_units = 1.0;
    return s;
  };
}

/// True once the model clock has reached the planned end time.
template <typename Scalar>
bool check_termination(const ModelState<Scalar>& state, const TimestepPlan& plan) {
  const double end = plan.dt * plan.n_timesteps;
  return state.time >= end - 1e-9 * plan.dt;
}

/// One timestep: groups in order, dynamics components each producing a source buffer,
/// canonical accumulation, a single integration.
template <typename Scalar>
StepReport run_timestep(ModelState<Scalar>& state, const TimestepPlan& plan, const SchedulePolicy& policy,
                        Index n_workers) {
  using clock = std::chrono::steady_clock;
  const Index workers = plan.mode == ExecutionMode::HostSerial ? 1 : n_workers;
  StepReport report;
  const auto step_start = clock::now();
  auto since = [&](clock::time_point t) { return std::chrono::duration<double>(t - step_start).count(); };

  double stub_wall = 0.0;
  for (GroupKind group : plan.groups) {
    GroupSpan span{group, since(clock::now()), 0.0};
    if (group == GroupKind::Dynamics) {
      std::vector<SourceBuffer<Scalar>> buffers;
      buffers.reserve(plan.components.size());
      for (const auto& spec : plan.components) {
        const ColumnKernel<Scalar> kernel =
            spec.kind == ComponentKind::Microphysics
                ? microphysics_kernel<Scalar>(plan.constants, plan.dt, plan.n_substeps)
                : stub_kernel<Scalar>(spec);
        auto run = execute(state, kernel, policy, workers, spec.component_index);
        report.components.push_back({spec.component_index, spec.kind, run.wall_time});
        if (spec.kind == ComponentKind::Microphysics) {
          report.microphysics_time += run.wall_time;
          report.imbalance = imbalance(run.timings, run.wall_time);
        } else {
          stub_wall += run.wall_time;
        }
        buffers.push_back(std::move(run.sources));
      }
      const auto t0 = clock::now();
      if (!buffers.empty()) report.clip = integrate(state, accumulate_sources(buffers), plan.dt);
      else state.time += plan.dt;
      report.accumulate_time = std::chrono::duration<double>(clock::now() - t0).count();
    } else if (group == GroupKind::Misc) {
      report.terminated = check_termination(state, plan);
    }
    span.end = since(clock::now());
    report.groups.push_back(span);
  }
  report.total = since(clock::now());

  if (plan.mode == ExecutionMode::HybridSim) {
    const auto& m = plan.hybrid.model;
    const std::int64_t n = state.grid.columns();
    const double kernel = kernel_time(n, m.launch(state.mode), m.device, m.cost(state.mode));
    const auto timeline = hybrid_step_time(stub_wall, m.volumes.bytes_in(n, state.mode),
                                           m.volumes.bytes_out(n, state.mode), kernel, plan.hybrid.combine, m.link);
    report.hybrid = timeline;
    report.total = timeline.total + report.accumulate_time;
  }
  return report;
}

/// Fixed-order sum of every prognostic value, printed to 17 significant digits.
template <typename Scalar>
std::string checksum(const ModelState<Scalar>& state) {
  long double sum = 0.0L;
  for (const auto& f : state.q) {
    for (Index i = 0; i < f.size(); ++i) sum += static_cast<long double>(f.data()[i]);
  }
  for (Index i = 0; i < state.theta.size(); ++i) sum += static_cast<long double>(state.theta.data()[i]);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(sum));
  return buf;
}

struct SimulationConfig {
  Grid grid = build_grid(32, 32, 60, 100.0);
  MoistureMode mode = MoistureMode::Warm;
  Scenario scenario{};
  TimestepPlan plan{};
  SchedulePolicy policy{};
  int n_workers = 1;
  int repeats = 3;
};

void validate_config(const SimulationConfig& config);

struct Summary {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct SimulationReport {
  int n_timesteps = 0;
  int repeats = 0;
  Summary microphysics_per_step;  // s
  Summary total_per_step;         // s
  double imbalance_factor = 1.0;  // mean over every microphysics launch
  std::vector<StepReport> last_run;
  std::string checksum;
  std::optional<ModelState<double>> final_state;
};

/// Runs the whole simulation `repeats` times from the same initial state.
inline SimulationReport run_simulation(const SimulationConfig& config) {
  validate_config(config);
  SimulationReport report;
  report.n_timesteps = config.plan.n_timesteps;
  report.repeats = config.repeats;
  const auto initial = init_state<double>(config.grid, config.mode, config.scenario);
  if (config.plan.n_timesteps == 0) {
    report.checksum = checksum(initial);
    return report;
  }

  std::vector<double> micro;
  std::vector<double> total;
  double imbalance_sum = 0.0;
  int launches = 0;
  for (int r = 0; r < config.repeats; ++r) {
    auto state = initial;
    std::vector<StepReport> steps;
    double micro_sum = 0.0;
    double total_sum = 0.0;
    for (int t = 0; t < config.plan.n_timesteps; ++t) {
      steps.push_back(run_timestep(state, config.plan, config.policy, config.n_workers));
      micro_sum += steps.back().microphysics_time;
      total_sum += steps.back().total;
      imbalance_sum += steps.back().imbalance.imbalance_factor;
      ++launches;
    }
    micro.push_back(micro_sum / config.plan.n_timesteps);
    total.push_back(total_sum / config.plan.n_timesteps);
    if (r + 1 == config.repeats) {
      report.last_run = std::move(steps);
      report.checksum = checksum(state);
      report.final_state = std::move(state);
    }
  }
  auto summarise = [](const std::vector<double>& v) {
    Summary s;
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    s.min = *std::min_element(v.begin(), v.end());
    s.max = *std::max_element(v.begin(), v.end());
    return s;
  };
  report.microphysics_per_step = summarise(micro);
  report.total_per_step = summarise(total);
  report.imbalance_factor = imbalance_sum / launches;
  return report;
}

}  // namespace colphys
