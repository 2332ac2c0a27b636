#include "colphys/grid.hpp"

#include <stdexcept>
#include <string>

namespace colphys {

Grid build_grid(Index nx, Index ny, Index nz, double dz) {
  if (nx < 1 || ny < 1 || nz < 1) {
    throw std::invalid_argument("grid extents must be >= 1, got " + std::to_string(nx) + "x" +
                                std::to_string(ny) + "x" + std::to_string(nz));
  }
  if (!(dz > 0.0)) {
    throw std::invalid_argument("grid spacing dz must be positive");
  }
  return Grid{nx, ny, nz, dz};
}

}  // namespace colphys
