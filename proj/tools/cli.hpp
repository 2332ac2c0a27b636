#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace colphys {

/// Entry point of colphys-bench. `args` excludes the program name.
/// Returns 0 on success, 1 on runtime failure, 2 on configuration or usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Closest-to-square (nx, ny) with nx * ny == columns and nx <= ny.
std::pair<long, long> grid_extents_for(long columns);

}  // namespace colphys
