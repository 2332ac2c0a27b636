#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "colphys/roster.hpp"

namespace colphys {

struct DeviceSpec {
  std::string name = "device";
  int sm_count = 1;
  int regs_per_sm = 65536;
  int max_threads_per_sm = 2048;
  int reg_alloc_granularity = 8;
  int warp_size = 32;
  int max_regs_per_thread = 255;
  std::uint64_t mem_bytes = 0;
};

DeviceSpec k20x();
DeviceSpec p100();

struct Occupancy {
  int threads_per_sm = 0;
  double occupancy = 0.0;
};

/// Register-limited residency of one SM, rounded down to whole warps.
Occupancy occupancy(const DeviceSpec& device, int regs_per_thread);
std::int64_t max_concurrent_threads(const DeviceSpec& device, int regs_per_thread);
std::int64_t wave_count(std::int64_t n_columns, std::int64_t max_concurrent);

struct LaunchConfig {
  std::int64_t gangs = 1;
  int vector_length = 32;
  int regs_per_thread = 64;

  bool operator==(const LaunchConfig&) const = default;
};

/// A block fits on an SM only if vector_length <= threads_per_sm for its register count.
bool launch_feasible(const DeviceSpec& device, const LaunchConfig& launch);

/// Threads resident at once: whole blocks per SM across the device, capped by the launch size.
/// Throws std::invalid_argument for an infeasible launch.
std::int64_t resident_threads(const DeviceSpec& device, const LaunchConfig& launch);

struct KernelCostModel {
  double per_column_work = 1.0;  // work units per column
  double frac_int = 0.46;
  double frac_fp = 0.20;
  double frac_idle = 0.06;
  double rate_int = 1.0;  // work units per second per resident thread
  double rate_fp = 1.0;
  double rate_other = 1.0;

  double frac_other() const noexcept { return 1.0 - frac_int - frac_fp - frac_idle; }
  /// Seconds one thread spends on one unit of work.
  double seconds_per_unit() const;
  double per_thread_time() const { return per_column_work * seconds_per_unit(); }
};

double kernel_time(std::int64_t n_columns, const LaunchConfig& launch, const DeviceSpec& device,
                   const KernelCostModel& cost);

enum class Direction { ToDevice, FromDevice };

struct LinkSpec {
  double bandwidth_to_dev = 12.0e9;  // bytes/s
  double bandwidth_from_dev = 12.0e9;
  double latency = 0.0;  // s
};

double transfer_time(double bytes, Direction direction, const LinkSpec& link);

struct MemoryEstimate {
  double bytes = 0.0;
  bool out_of_memory = false;
};

/// Default per-column footprint: cold input fields plus replicated temporaries.
struct MemoryFootprint {
  double input_bytes_per_column = 13422.0;
  double temp_bytes_per_column = 845571.0;
  double fixed_bytes = 0.0;
};

MemoryEstimate device_memory_required(std::int64_t n_columns, double per_column_input_bytes,
                                      double per_column_temp_bytes, double fixed_bytes, const DeviceSpec& device);
MemoryEstimate device_memory_required(std::int64_t n_columns, const MemoryFootprint& footprint,
                                      const DeviceSpec& device);

struct HybridTimeline {
  double transfer_in = 0.0;
  double kernel = 0.0;
  double transfer_out = 0.0;
  double cpu_overlap = 0.0;
  double combine = 0.0;
  double total = 0.0;

  double device_pipeline() const noexcept { return transfer_in + kernel + transfer_out; }
  double kernel_share() const noexcept {
    const double p = device_pipeline();
    return p > 0.0 ? kernel / p : 0.0;
  }
};

HybridTimeline hybrid_step_time(double cpu_overlap, double bytes_in, double bytes_out, double kernel, double combine,
                                const LinkSpec& link);

/// Bytes moved per column. Inputs carry the prognostic inventory (and, cold, the extra
/// per-column state the kernel needs); outputs carry the 26 returned source fields.
struct TransferVolumes {
  double bytes_per_field_column = 268435456.0 / (20000.0 * 73.0);
  int input_fields_warm = 60;
  int input_fields_cold = 73;
  int output_fields = 26;

  double bytes_in(std::int64_t n_columns, MoistureMode mode) const;
  double bytes_out(std::int64_t n_columns, MoistureMode mode) const;
};

struct CalibrationRow {
  std::int64_t columns = 0;
  MoistureMode config = MoistureMode::Warm;
  double t_in = 0.0;  // s
  double t_kernel = 0.0;
  double t_out = 0.0;
};

using CalibrationData = std::vector<CalibrationRow>;

/// Reads `columns,config,t_in_ms,t_kernel_ms,t_out_ms` (header required). Throws InvalidConfig.
CalibrationData read_calibration_csv(std::istream& in);
void write_calibration_csv(std::ostream& out, const CalibrationData& data);

/// The phase table the model is anchored to.
CalibrationData reference_phase_table();

struct PhaseTimes {
  double t_in = 0.0;
  double t_kernel = 0.0;
  double t_out = 0.0;

  double total() const noexcept { return t_in + t_kernel + t_out; }
  double kernel_share() const noexcept { return total() > 0.0 ? t_kernel / total() : 0.0; }
};

struct RowResidual {
  CalibrationRow row;
  PhaseTimes predicted;
  double max_relative_error = 0.0;
};

struct CalibratedModel {
  DeviceSpec device;
  TransferVolumes volumes;
  LinkSpec link;
  KernelCostModel warm;
  KernelCostModel cold;
  LaunchConfig launch_warm;
  LaunchConfig launch_cold;
  std::vector<RowResidual> residuals;
  double max_relative_error = 0.0;

  const KernelCostModel& cost(MoistureMode mode) const { return mode == MoistureMode::Cold ? cold : warm; }
  const LaunchConfig& launch(MoistureMode mode) const { return mode == MoistureMode::Cold ? launch_cold : launch_warm; }
};

/// Fits link latency and bandwidths to the transfer columns and, per mode, an effective
/// residency and per-column work to the kernel column. Throws std::invalid_argument on empty data.
CalibratedModel calibrate(const CalibrationData& data, const TransferVolumes& volumes = {},
                          const DeviceSpec& device = p100(), int regs_per_thread = 128);

PhaseTimes predict_phases(const CalibratedModel& model, std::int64_t n_columns, MoistureMode mode);

/// Piecewise-linear efficiency versus core count, held constant outside the given points.
struct EfficiencyCurve {
  std::vector<std::pair<double, double>> points{{1.0, 1.0}};

  double operator()(double cores) const;
  static EfficiencyCurve constant(double value);
  static EfficiencyCurve linear(double n0, double e0, double n1, double e1);
};

/// Smallest core count at which the host run is no slower than the shared device.
std::optional<int> break_even_cores(double device_time, double cpu_1core_time, const EfficiencyCurve& cpu_efficiency,
                                    const EfficiencyCurve& gpu_sharing = EfficiencyCurve::constant(1.0),
                                    int max_cores = 4096);

struct SearchSpace {
  std::vector<std::int64_t> gangs;
  std::vector<int> vector_lengths;
  std::vector<int> regs;

  std::size_t size() const noexcept { return gangs.size() * vector_lengths.size() * regs.size(); }
  static SearchSpace defaults();
};

struct AutotuneResult {
  LaunchConfig best;
  LaunchConfig worst;
  double best_time = 0.0;
  double worst_time = 0.0;
  double spread = 1.0;
  std::size_t evaluated = 0;
  std::size_t infeasible = 0;
};

AutotuneResult autotune(std::int64_t n_columns, const DeviceSpec& device, const KernelCostModel& cost,
                        const SearchSpace& space);

struct FieldInventory {
  int arrays = 0;
  int scalars = 0;
};

struct ArgEstimate {
  int count = 0;
  bool warning = false;
};

inline constexpr int kKernelArgumentLimit = 532;

ArgEstimate kernel_arg_estimate(const FieldInventory& inventory, int args_per_array, bool packed);

}  // namespace colphys
