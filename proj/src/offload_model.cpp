#include "colphys/offload.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace colphys {

DeviceSpec k20x() {
  DeviceSpec d;
  d.name = "K20X";
  d.sm_count = 14;
  d.mem_bytes = 6ull << 30;
  return d;
}

DeviceSpec p100() {
  DeviceSpec d;
  d.name = "P100";
  d.sm_count = 56;
  d.mem_bytes = 16ull << 30;
  return d;
}

Occupancy occupancy(const DeviceSpec& device, int regs_per_thread) {
  if (regs_per_thread < 1) throw std::invalid_argument("occupancy: regs_per_thread must be >= 1");
  if (device.sm_count < 1 || device.regs_per_sm < 1 || device.max_threads_per_sm < 1 ||
      device.reg_alloc_granularity < 1 || device.warp_size < 1) {
    throw std::invalid_argument("occupancy: device fields must be positive");
  }
  const int g = device.reg_alloc_granularity;
  const int allocated = (regs_per_thread + g - 1) / g * g;
  int threads = std::min(device.max_threads_per_sm, device.regs_per_sm / allocated);
  threads -= threads % device.warp_size;
  return {threads, static_cast<double>(threads) / device.max_threads_per_sm};
}

std::int64_t max_concurrent_threads(const DeviceSpec& device, int regs_per_thread) {
  return static_cast<std::int64_t>(device.sm_count) * occupancy(device, regs_per_thread).threads_per_sm;
}

std::int64_t wave_count(std::int64_t n_columns, std::int64_t max_concurrent) {
  if (max_concurrent < 1) throw std::invalid_argument("wave_count: max_concurrent must be >= 1");
  if (n_columns < 0) throw std::invalid_argument("wave_count: n_columns must be >= 0");
  return (n_columns + max_concurrent - 1) / max_concurrent;
}

bool launch_feasible(const DeviceSpec& device, const LaunchConfig& launch) {
  if (launch.gangs < 1 || launch.vector_length < 1 || launch.regs_per_thread < 1) return false;
  if (launch.regs_per_thread > device.max_regs_per_thread) return false;
  return launch.vector_length <= occupancy(device, launch.regs_per_thread).threads_per_sm;
}

std::int64_t resident_threads(const DeviceSpec& device, const LaunchConfig& launch) {
  if (!launch_feasible(device, launch)) throw std::invalid_argument("resident_threads: launch does not fit an SM");
  const int per_sm = occupancy(device, launch.regs_per_thread).threads_per_sm;
  const std::int64_t blocks_per_sm = per_sm / launch.vector_length;
  const std::int64_t on_device = device.sm_count * blocks_per_sm * launch.vector_length;
  return std::min(on_device, launch.gangs * launch.vector_length);
}

double KernelCostModel::seconds_per_unit() const {
  for (double f : {frac_int, frac_fp, frac_idle}) {
    if (f < 0.0 || f > 1.0) throw std::invalid_argument("KernelCostModel: fractions must lie in [0, 1]");
  }
  if (frac_other() < -1e-12) throw std::invalid_argument("KernelCostModel: fractions sum above 1");
  if (!(rate_int > 0.0 && rate_fp > 0.0 && rate_other > 0.0)) {
    throw std::invalid_argument("KernelCostModel: rates must be positive");
  }
  if (frac_idle >= 1.0) throw std::invalid_argument("KernelCostModel: idle fraction must be below 1");
  const double busy = frac_int / rate_int + frac_fp / rate_fp + std::max(0.0, frac_other()) / rate_other;
  return busy / (1.0 - frac_idle);
}

double kernel_time(std::int64_t n_columns, const LaunchConfig& launch, const DeviceSpec& device,
                   const KernelCostModel& cost) {
  return static_cast<double>(wave_count(n_columns, resident_threads(device, launch))) * cost.per_thread_time();
}

double transfer_time(double bytes, Direction direction, const LinkSpec& link) {
  if (bytes < 0.0) throw std::invalid_argument("transfer_time: bytes must be >= 0");
  const double bw = direction == Direction::ToDevice ? link.bandwidth_to_dev : link.bandwidth_from_dev;
  if (!(bw > 0.0)) throw std::invalid_argument("transfer_time: bandwidth must be positive");
  return link.latency + bytes / bw;
}

MemoryEstimate device_memory_required(std::int64_t n_columns, double per_column_input_bytes,
                                      double per_column_temp_bytes, double fixed_bytes, const DeviceSpec& device) {
  if (n_columns < 0 || per_column_input_bytes < 0.0 || per_column_temp_bytes < 0.0 || fixed_bytes < 0.0) {
    throw std::invalid_argument("device_memory_required: sizes must be non-negative");
  }
  MemoryEstimate m;
  m.bytes = fixed_bytes + static_cast<double>(n_columns) * (per_column_input_bytes + per_column_temp_bytes);
  m.out_of_memory = m.bytes > static_cast<double>(device.mem_bytes);
  return m;
}

MemoryEstimate device_memory_required(std::int64_t n_columns, const MemoryFootprint& f, const DeviceSpec& device) {
  return device_memory_required(n_columns, f.input_bytes_per_column, f.temp_bytes_per_column, f.fixed_bytes, device);
}

HybridTimeline hybrid_step_time(double cpu_overlap, double bytes_in, double bytes_out, double kernel, double combine,
                                const LinkSpec& link) {
  if (cpu_overlap < 0.0 || kernel < 0.0 || combine < 0.0) {
    throw std::invalid_argument("hybrid_step_time: times must be non-negative");
  }
  HybridTimeline t;
  t.transfer_in = transfer_time(bytes_in, Direction::ToDevice, link);
  t.kernel = kernel;
  t.transfer_out = transfer_time(bytes_out, Direction::FromDevice, link);
  t.cpu_overlap = cpu_overlap;
  t.combine = combine;
  t.total = std::max(cpu_overlap, t.device_pipeline()) + combine;
  return t;
}

double TransferVolumes::bytes_in(std::int64_t n_columns, MoistureMode mode) const {
  const int fields = mode == MoistureMode::Cold ? input_fields_cold : input_fields_warm;
  return static_cast<double>(n_columns) * fields * bytes_per_field_column;
}

double TransferVolumes::bytes_out(std::int64_t n_columns, MoistureMode) const {
  return static_cast<double>(n_columns) * output_fields * bytes_per_field_column;
}

double EfficiencyCurve::operator()(double cores) const {
  if (points.empty()) return 1.0;
  if (cores <= points.front().first) return points.front().second;
  if (cores >= points.back().first) return points.back().second;
  auto hi = std::upper_bound(points.begin(), points.end(), cores,
                             [](double x, const auto& p) { return x < p.first; });
  auto lo = hi - 1;
  const double t = (cores - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

EfficiencyCurve EfficiencyCurve::constant(double value) { return EfficiencyCurve{{{1.0, value}}}; }

EfficiencyCurve EfficiencyCurve::linear(double n0, double e0, double n1, double e1) {
  if (!(n1 > n0)) throw std::invalid_argument("EfficiencyCurve::linear: points must be increasing");
  return EfficiencyCurve{{{n0, e0}, {n1, e1}}};
}

std::optional<int> break_even_cores(double device_time, double cpu_1core_time, const EfficiencyCurve& cpu_efficiency,
                                    const EfficiencyCurve& gpu_sharing, int max_cores) {
  if (device_time < 0.0 || !(cpu_1core_time > 0.0)) {
    throw std::invalid_argument("break_even_cores: times must be positive");
  }
  if (device_time == 0.0) return std::nullopt;
  for (int n = 1; n <= max_cores; ++n) {
    const double cpu = cpu_1core_time / (n * cpu_efficiency(n));
    const double shared = device_time / gpu_sharing(n);
    if (cpu <= shared) return n;
  }
  return std::nullopt;
}

ArgEstimate kernel_arg_estimate(const FieldInventory& inventory, int args_per_array, bool packed) {
  if (inventory.arrays < 0 || inventory.scalars < 0 || args_per_array < 0) {
    throw std::invalid_argument("kernel_arg_estimate: counts must be non-negative");
  }
  const int arrays = packed ? std::min(inventory.arrays, 1) : inventory.arrays;
  ArgEstimate e;
  e.count = inventory.scalars + arrays * args_per_array;
  e.warning = e.count > kKernelArgumentLimit;
  return e;
}

}  // namespace colphys
