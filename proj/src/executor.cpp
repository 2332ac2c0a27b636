#include "colphys/executor.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

namespace colphys {

std::string_view schedule_name(ScheduleKind kind) noexcept {
  switch (kind) {
    case ScheduleKind::Static:
      return "static";
    case ScheduleKind::Dynamic:
      return "dynamic";
    case ScheduleKind::Guided:
      return "guided";
  }
  return "static";
}

std::optional<ScheduleKind> parse_schedule(std::string_view name) noexcept {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "static") return ScheduleKind::Static;
  if (lower == "dynamic") return ScheduleKind::Dynamic;
  if (lower == "guided") return ScheduleKind::Guided;
  return std::nullopt;
}

std::vector<IndexRange> plan_static(Index n_items, Index n_workers) {
  if (n_workers < 1) throw std::invalid_argument("plan_static: n_workers must be >= 1");
  if (n_items < 0) throw std::invalid_argument("plan_static: n_items must be >= 0");
  std::vector<IndexRange> ranges(static_cast<std::size_t>(n_workers));
  const Index base = n_items / n_workers;
  const Index extra = n_items % n_workers;
  Index begin = 0;
  for (Index w = 0; w < n_workers; ++w) {
    const Index size = base + (w < extra ? 1 : 0);
    ranges[static_cast<std::size_t>(w)] = {begin, begin + size};
    begin += size;
  }
  return ranges;
}

ImbalanceReport imbalance(const std::vector<WorkerTiming>& timings, double wall) {
  if (timings.empty()) throw std::invalid_argument("imbalance: no worker timings");
  ImbalanceReport r;
  r.wall_time = wall;
  double sum = 0.0;
  for (const auto& t : timings) {
    r.max_busy = std::max(r.max_busy, t.busy_time);
    sum += t.busy_time;
  }
  r.mean_busy = sum / static_cast<double>(timings.size());
  r.imbalance_factor = r.mean_busy > 0.0 ? std::max(1.0, r.max_busy / r.mean_busy) : 1.0;
  return r;
}

}  // namespace colphys
