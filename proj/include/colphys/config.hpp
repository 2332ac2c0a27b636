#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "colphys/driver.hpp"
#include "colphys/offload.hpp"

namespace colphys {

/// Settings for the offload prediction report.
struct PredictSettings {
  std::int64_t columns = 20000;
  MoistureMode mode = MoistureMode::Cold;
  int regs = 64;                       // for the occupancy and wave report
  double cpu_1core_factor = 7.4;       // one host core is this many times slower than the device
  double cpu_efficiency_at_12 = 11.0 / 12.0;
  double gpu_sharing_efficiency = 1.0;
  double cpu_overlap = 0.0;            // s of host work overlapping the device pipeline
  MemoryFootprint memory{};
};

struct RunConfig {
  SimulationConfig sim{};
  DeviceSpec device = p100();
  std::optional<std::string> calibration_path;
  PredictSettings predict{};
  SearchSpace space = SearchSpace::defaults();
};

/// Parses a run config. Unknown keys and bad values raise InvalidConfig naming the key path.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
nlohmann::json to_json(const RunConfig& config);

/// A preset name ("k20x", "p100") or a path to a device JSON file.
DeviceSpec load_device(const std::string& name_or_path);
DeviceSpec parse_device(const nlohmann::json& j, const std::string& where = "device");
nlohmann::json to_json(const DeviceSpec& device);

LinkSpec parse_link(const nlohmann::json& j, const std::string& where = "link");
nlohmann::json to_json(const LinkSpec& link);

/// Reads calibration rows from `.csv` or `.json` (`{"rows": [...]}` with the CSV column names).
CalibrationData load_calibration(const std::string& path);
CalibrationData parse_calibration(const nlohmann::json& j, const std::string& where = "calibration");

SearchSpace parse_space(const nlohmann::json& j, const std::string& where = "space");
nlohmann::json to_json(const SearchSpace& space);

}  // namespace colphys
