#include <chrono>
#include <cmath>
#include <mutex>
#include <set>

#include "colphys/driver.hpp"

namespace colphys {

double burn_iterations(std::uint64_t iterations) noexcept {
  // A dependent chain of multiply-adds the optimiser cannot drop or vectorise away.
  thread_local volatile double sink = 0.0;
  double x = sink + 1.0;
  for (std::uint64_t i = 0; i < iterations; ++i) x = x * 0.999999 + 1e-7;
  sink = x;
  return sink * 0.0;
}

namespace {

double iterations_per_second() {
  static std::once_flag once;
  static double rate = 0.0;
  std::call_once(once, [] {
    using clock = std::chrono::steady_clock;
    std::uint64_t n = 1u << 16;
    for (;;) {
      const auto t0 = clock::now();
      burn_iterations(n);
      const double s = std::chrono::duration<double>(clock::now() - t0).count();
      if (s > 0.02 || n > (1ull << 34)) {
        rate = static_cast<double>(n) / std::max(s, 1e-9);
        return;
      }
      n *= 2;
    }
  });
  return rate;
}

}  // namespace

std::uint64_t stub_iterations(double seconds) {
  if (!(seconds > 0.0)) return 0;
  return static_cast<std::uint64_t>(std::llround(seconds * iterations_per_second()));
}

std::string_view execution_mode_name(ExecutionMode mode) noexcept {
  switch (mode) {
    case ExecutionMode::HostSerial:
      return "host-serial";
    case ExecutionMode::HostThreaded:
      return "host-threaded";
    case ExecutionMode::HybridSim:
      return "hybrid-sim";
  }
  return "host-threaded";
}

std::optional<ExecutionMode> parse_execution_mode(std::string_view name) noexcept {
  for (auto m : {ExecutionMode::HostSerial, ExecutionMode::HostThreaded, ExecutionMode::HybridSim}) {
    if (name == execution_mode_name(m)) return m;
  }
  return std::nullopt;
}

std::string_view group_name(GroupKind kind) noexcept {
  switch (kind) {
    case GroupKind::HaloSwap:
      return "halo-swap";
    case GroupKind::SubGrid:
      return "sub-grid";
    case GroupKind::Dynamics:
      return "dynamics";
    case GroupKind::PressureSolve:
      return "pressure-solve";
    case GroupKind::Misc:
      return "misc";
  }
  return "misc";
}

void validate_plan(const TimestepPlan& plan) {
  if (!(plan.dt > 0.0)) throw InvalidConfig("dt", "must be positive");
  if (plan.n_timesteps < 0) throw InvalidConfig("n_timesteps", "must be >= 0");
  if (plan.n_substeps < 1) throw InvalidConfig("n_substeps", "must be >= 1");
  std::set<int> seen;
  for (std::size_t i = 0; i < plan.components.size(); ++i) {
    const auto& c = plan.components[i];
    const std::string where = "components[" + std::to_string(i) + "]";
    if (!seen.insert(c.component_index).second) {
      throw InvalidConfig(where + ".index", "duplicate component index " + std::to_string(c.component_index));
    }
    if (c.stub_cost < 0.0) throw InvalidConfig(where + ".stub_cost", "must be >= 0");
  }
  if (plan.hybrid.combine < 0.0) throw InvalidConfig("hybrid.combine_ms", "must be >= 0");
}

void validate_config(const SimulationConfig& config) {
  if (config.grid.nx < 1) throw InvalidConfig("grid.nx", "must be >= 1");
  if (config.grid.ny < 1) throw InvalidConfig("grid.ny", "must be >= 1");
  if (config.grid.nz < 2) throw InvalidConfig("grid.nz", "must be >= 2");
  if (!(config.grid.dz > 0.0)) throw InvalidConfig("grid.dz", "must be positive");
  const double f = config.scenario.cloudy_fraction;
  if (!(f >= 0.0 && f <= 1.0)) throw InvalidConfig("scenario.cloudy_fraction", "must lie in [0, 1]");
  if (config.n_workers < 1) throw InvalidConfig("workers", "must be >= 1");
  if (config.repeats < 1) throw InvalidConfig("repeats", "must be >= 1");
  if (config.policy.chunk < 1) throw InvalidConfig("policy.chunk", "must be >= 1");
  if (config.policy.min_chunk < 1) throw InvalidConfig("policy.min_chunk", "must be >= 1");
  validate_plan(config.plan);
}

}  // namespace colphys
