#pragma once

#include <Eigen/Core>

namespace colphys {

using Index = Eigen::Index;

/// Horizontal extent is nx by ny columns, each nz levels deep with uniform spacing dz (m).
struct Grid {
  Index nx = 1;
  Index ny = 1;
  Index nz = 60;
  double dz = 100.0;

  Index columns() const noexcept { return nx * ny; }
  Index points() const noexcept { return nx * ny * nz; }

  /// Column ordinal with j varying fastest.
  Index column_index(Index i, Index j) const noexcept { return i * ny + j; }

  /// Height of the centre of level k above the surface.
  double level_height(Index k) const noexcept { return (static_cast<double>(k) + 0.5) * dz; }

  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Throws std::invalid_argument for non-positive extents or spacing.
Grid build_grid(Index nx, Index ny, Index nz = 60, double dz = 100.0);

}  // namespace colphys
