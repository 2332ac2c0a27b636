#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace colphys {

/// A report: fixed column schema, one string cell per column per row.
struct ReportTable {
  std::string experiment;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);  // throws std::invalid_argument on width mismatch
};

/// Shortest decimal form that round-trips to the same double.
std::string format_number(double value);

std::string to_csv(const ReportTable& table);
/// {"experiment", "columns", "rows": [{column: value}], "config": config}; numeric cells stay numbers.
nlohmann::json to_json(const ReportTable& table, const nlohmann::json& config);

/// Writes report.csv and report.json into `dir`, creating it if needed.
void write_report(const std::string& dir, const ReportTable& table, const nlohmann::json& config);

}  // namespace colphys
