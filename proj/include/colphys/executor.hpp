#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "colphys/errors.hpp"
#include "colphys/microphysics/column.hpp"
#include "colphys/sources.hpp"

namespace colphys {

enum class ScheduleKind { Static, Dynamic, Guided };

struct SchedulePolicy {
  ScheduleKind kind = ScheduleKind::Static;
  Index chunk = 16;     // Dynamic
  Index min_chunk = 1;  // Guided
};

std::string_view schedule_name(ScheduleKind kind) noexcept;
std::optional<ScheduleKind> parse_schedule(std::string_view name) noexcept;

struct IndexRange {
  Index begin = 0;
  Index end = 0;
  Index size() const noexcept { return end - begin; }
};

/// Contiguous split of [0, n_items); the first n_items % n_workers ranges get one extra item.
std::vector<IndexRange> plan_static(Index n_items, Index n_workers);

struct WorkerTiming {
  int worker_id = 0;
  double busy_time = 0.0;  // s, kernel calls only
  Index columns_processed = 0;
  Index grabs = 0;
};

struct ImbalanceReport {
  double wall_time = 0.0;
  double max_busy = 0.0;
  double mean_busy = 0.0;
  double imbalance_factor = 1.0;
};

ImbalanceReport imbalance(const std::vector<WorkerTiming>& timings, double wall);

template <typename Scalar>
using ColumnKernel = std::function<ColumnSources<Scalar>(const ModelState<Scalar>&, Index)>;

template <typename Scalar>
struct ExecutionResult {
  SourceBuffer<Scalar> sources;
  std::vector<WorkerTiming> timings;
  double wall_time = 0.0;
};

namespace detail {

/// Hands out column ranges to workers for one execute() call.
class ColumnQueue {
 public:
  ColumnQueue(Index n_items, Index n_workers, const SchedulePolicy& policy)
      : n_items_(n_items), n_workers_(n_workers), policy_(policy) {
    if (policy.kind == ScheduleKind::Static) ranges_ = plan_static(n_items, n_workers);
  }

  std::optional<IndexRange> next(int worker, bool& static_taken) {
    switch (policy_.kind) {
      case ScheduleKind::Static: {
        if (static_taken) return std::nullopt;
        static_taken = true;
        const auto r = ranges_[static_cast<std::size_t>(worker)];
        if (r.size() == 0) return std::nullopt;
        return r;
      }
      case ScheduleKind::Dynamic: {
        const Index b = cursor_.fetch_add(policy_.chunk, std::memory_order_relaxed);
        if (b >= n_items_) return std::nullopt;
        return IndexRange{b, std::min(n_items_, b + policy_.chunk)};
      }
      case ScheduleKind::Guided: {
        Index b = cursor_.load(std::memory_order_relaxed);
        while (b < n_items_) {
          const Index remaining = n_items_ - b;
          const Index take = std::max((remaining + 2 * n_workers_ - 1) / (2 * n_workers_), policy_.min_chunk);
          const Index e = std::min(n_items_, b + take);
          if (cursor_.compare_exchange_weak(b, e, std::memory_order_relaxed)) return IndexRange{b, e};
        }
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

 private:
  Index n_items_;
  Index n_workers_;
  SchedulePolicy policy_;
  std::vector<IndexRange> ranges_;
  std::atomic<Index> cursor_{0};
};

template <typename Scalar>
void store_column(SourceBuffer<Scalar>& out, Index column, const ColumnSources<Scalar>& s) {
  for (std::size_t f = 0; f < out.q.size(); ++f) out.q[f].col(column) = s.q.col(static_cast<Index>(f));
  out.theta.col(column) = s.theta;
  out.surface_precip(column) = s.surface_precip_flux;
}

}  // namespace detail

/// Runs `kernel` on every column of `state` with n_workers threads. Each column writes only
/// its own cells of the result, so the buffer does not depend on policy or worker count.
template <typename Scalar>
ExecutionResult<Scalar> execute(const ModelState<Scalar>& state, const ColumnKernel<Scalar>& kernel,
                                const SchedulePolicy& policy, Index n_workers, int component_index = 0) {
  if (n_workers < 1) throw std::invalid_argument("execute: n_workers must be >= 1");
  if (policy.chunk < 1) throw std::invalid_argument("execute: chunk must be >= 1");
  if (policy.min_chunk < 1) throw std::invalid_argument("execute: min_chunk must be >= 1");
  if (!kernel) throw std::invalid_argument("execute: empty kernel");

  using clock = std::chrono::steady_clock;
  const Index n_columns = state.grid.columns();
  const Index nz = state.grid.nz;
  const Index nfields = static_cast<Index>(state.q.size());

  ExecutionResult<Scalar> result;
  result.sources = SourceBuffer<Scalar>::zeros(component_index, state.grid, state.mode);
  result.timings.resize(static_cast<std::size_t>(n_workers));

  detail::ColumnQueue queue(n_columns, n_workers, policy);
  std::atomic<bool> abort{false};
  std::mutex failure_mutex;
  std::exception_ptr failure;
  Index failed_column = -1;

  auto work = [&](int worker) {
    WorkerTiming& timing = result.timings[static_cast<std::size_t>(worker)];
    timing.worker_id = worker;
    bool static_taken = false;
    while (!abort.load(std::memory_order_relaxed)) {
      const auto range = queue.next(worker, static_taken);
      if (!range) break;
      ++timing.grabs;
      for (Index c = range->begin; c < range->end; ++c) {
        const auto t0 = clock::now();
        try {
          const ColumnSources<Scalar> s = kernel(state, c);
          if (s.q.rows() != nz || s.q.cols() != nfields || s.theta.size() != nz) {
            throw std::length_error("kernel returned sources of the wrong shape");
          }
          detail::store_column(result.sources, c, s);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) {
            failure = std::current_exception();
            failed_column = c;
          }
          abort.store(true, std::memory_order_relaxed);
          return;
        }
        timing.busy_time += std::chrono::duration<double>(clock::now() - t0).count();
        ++timing.columns_processed;
      }
    }
  };

  const auto start = clock::now();
  if (n_workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (Index w = 0; w < n_workers; ++w) pool.emplace_back(work, static_cast<int>(w));
  }
  result.wall_time = std::chrono::duration<double>(clock::now() - start).count();

  if (failure) {
    std::string what = "unknown error";
    try {
      std::rethrow_exception(failure);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    throw ColumnFailure(failed_column, what);
  }
  return result;
}

/// Kernel adapter for the microphysics component.
template <typename Scalar>
ColumnKernel<Scalar> microphysics_kernel(MicrophysicsConstants constants, double dt, int n_substeps = 2) {
  return [constants, dt, n_substeps](const ModelState<Scalar>& state, Index c) {
    return microphysics_column(extract_column(state, c), constants, dt, n_substeps);
  };
}

}  // namespace colphys
