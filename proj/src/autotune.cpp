#include <stdexcept>
#include <tuple>

#include "colphys/offload.hpp"

namespace colphys {

SearchSpace SearchSpace::defaults() {
  SearchSpace s;
  s.gangs = {1,   2,   4,   8,   16,  32,  48,  64,  80,  96,  112, 128,  160,
             192, 224, 256, 320, 384, 448, 512, 640, 768, 896, 1024, 2048};
  for (int v = 32; v <= 1024; v += 32) s.vector_lengths.push_back(v);
  s.regs = {32, 40, 48, 56, 64, 72, 80, 96, 112, 128, 255};
  return s;
}

AutotuneResult autotune(std::int64_t n_columns, const DeviceSpec& device, const KernelCostModel& cost,
                        const SearchSpace& space) {
  if (space.size() == 0) throw std::invalid_argument("autotune: empty search space");
  AutotuneResult r;
  bool any = false;
  // Ties go to the smaller (gangs, vector_length, regs) key whatever order the space lists them in.
  auto key = [](const LaunchConfig& c) { return std::tie(c.gangs, c.vector_length, c.regs_per_thread); };
  for (auto g : space.gangs) {
    for (int v : space.vector_lengths) {
      for (int regs : space.regs) {
        const LaunchConfig launch{g, v, regs};
        if (!launch_feasible(device, launch)) {
          ++r.infeasible;
          continue;
        }
        ++r.evaluated;
        const double t = kernel_time(n_columns, launch, device, cost);
        if (!any) {
          r.best = r.worst = launch;
          r.best_time = r.worst_time = t;
          any = true;
          continue;
        }
        if (t < r.best_time || (t == r.best_time && key(launch) < key(r.best))) {
          r.best = launch;
          r.best_time = t;
        }
        if (t > r.worst_time || (t == r.worst_time && key(launch) < key(r.worst))) {
          r.worst = launch;
          r.worst_time = t;
        }
      }
    }
  }
  if (!any) throw std::invalid_argument("autotune: no feasible launch configuration in the search space");
  r.spread = r.best_time > 0.0 ? r.worst_time / r.best_time : 1.0;
  return r;
}

}  // namespace colphys
