#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "colphys/state.hpp"

namespace colphys {

/// Tendencies (field units per second) produced by one component over the whole grid.
template <typename Scalar>
struct SourceBuffer {
  int component_index = 0;
  Grid grid;
  MoistureMode mode = MoistureMode::Warm;
  std::vector<Field<Scalar>> q;  ///< one per roster slot
  Field<Scalar> theta;
  Eigen::Array<Scalar, 1, Eigen::Dynamic> surface_precip;  ///< kg/m^2/s per column

  static SourceBuffer zeros(int component_index, const Grid& grid, MoistureMode mode) {
    SourceBuffer b;
    b.component_index = component_index;
    b.grid = grid;
    b.mode = mode;
    b.q.assign(roster_size(mode), Field<Scalar>::Zero(grid.nz, grid.columns()));
    b.theta = Field<Scalar>::Zero(grid.nz, grid.columns());
    b.surface_precip = Eigen::Array<Scalar, 1, Eigen::Dynamic>::Zero(grid.columns());
    return b;
  }

  bool same_layout(const SourceBuffer& other) const noexcept {
    return grid == other.grid && mode == other.mode && q.size() == other.q.size();
  }
};

/// Amount removed by the positivity clip, per roster slot, in field units summed over cells.
struct ClipReport {
  std::vector<double> clipped;

  double total() const {
    double sum = 0.0;
    for (double c : clipped) sum += c;
    return sum;
  }
};

/// Sums `buffers` in ascending component_index order, whatever order they arrive in.
/// The result carries the lowest component index.
template <typename Scalar>
SourceBuffer<Scalar> accumulate_sources(std::span<const SourceBuffer<Scalar>> buffers) {
  if (buffers.empty()) throw std::invalid_argument("accumulate_sources: no buffers");
  std::vector<const SourceBuffer<Scalar>*> ordered;
  ordered.reserve(buffers.size());
  for (const auto& b : buffers) ordered.push_back(&b);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto* a, const auto* b) { return a->component_index < b->component_index; });
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    if (ordered[i]->component_index == ordered[i - 1]->component_index) {
      throw std::invalid_argument("accumulate_sources: duplicate component_index " +
                                  std::to_string(ordered[i]->component_index));
    }
    if (!ordered[i]->same_layout(*ordered[0])) {
      throw std::invalid_argument("accumulate_sources: buffer extents differ");
    }
  }

  SourceBuffer<Scalar> total = *ordered.front();
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    const auto& b = *ordered[i];
    for (std::size_t f = 0; f < total.q.size(); ++f) total.q[f] += b.q[f];
    total.theta += b.theta;
    total.surface_precip += b.surface_precip;
  }
  return total;
}

template <typename Scalar>
SourceBuffer<Scalar> accumulate_sources(const std::vector<SourceBuffer<Scalar>>& buffers) {
  return accumulate_sources(std::span<const SourceBuffer<Scalar>>(buffers));
}

/// Forward-Euler update of `state` by `total` over dt, then clips mass and number
/// fields at zero. Shape fields are not clipped.
template <typename Scalar>
ClipReport integrate(ModelState<Scalar>& state, const SourceBuffer<Scalar>& total, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");
  if (!(total.grid == state.grid) || total.mode != state.mode || total.q.size() != state.q.size()) {
    throw std::invalid_argument("integrate: source buffer does not match state extents or roster");
  }
  const Scalar step = static_cast<Scalar>(dt);
  ClipReport report;
  report.clipped.assign(state.q.size(), 0.0);
  const auto ids = state.fields();
  for (std::size_t f = 0; f < state.q.size(); ++f) {
    Field<Scalar>& q = state.q[f];
    q += step * total.q[f];
    if (field_kind(ids[f]) == FieldKind::Shape) continue;
    report.clipped[f] = -static_cast<double>(q.min(Scalar(0)).sum());
    q = q.max(Scalar(0));
  }
  state.theta += step * total.theta;
  state.time += dt;
  return report;
}

}  // namespace colphys
