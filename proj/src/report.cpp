#include "colphys/report.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace colphys {

void ReportTable::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size()) {
    throw std::invalid_argument("report row has " + std::to_string(row.size()) + " cells, schema has " +
                                std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

std::string format_number(double value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

namespace {

std::string csv_cell(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

nlohmann::json typed_cell(const std::string& cell) {
  if (cell == "true") return true;
  if (cell == "false") return false;
  // Checksums are kept as text so their 17 digits survive any JSON reader.
  double v = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec == std::errc() && ptr == last && !cell.empty()) return v;
  return cell;
}

}  // namespace

std::string to_csv(const ReportTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) out += (i ? "," : "") + csv_cell(table.columns[i]);
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_cell(row[i]);
    out += '\n';
  }
  return out;
}

nlohmann::json to_json(const ReportTable& table, const nlohmann::json& config) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json r = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      r[table.columns[i]] = table.columns[i] == "checksum" ? nlohmann::json(row[i]) : typed_cell(row[i]);
    }
    rows.push_back(r);
  }
  return {{"experiment", table.experiment}, {"columns", table.columns}, {"rows", rows}, {"config", config}};
}

void write_report(const std::string& dir, const ReportTable& table, const nlohmann::json& config) {
  std::filesystem::create_directories(dir);
  const auto base = std::filesystem::path(dir);
  std::ofstream csv(base / "report.csv", std::ios::binary);
  std::ofstream js(base / "report.json", std::ios::binary);
  if (!csv || !js) throw std::runtime_error("cannot write report files in '" + dir + "'");
  csv << to_csv(table);
  js << to_json(table, config).dump(2) << '\n';
  if (!csv || !js) throw std::runtime_error("failed writing report files in '" + dir + "'");
}

}  // namespace colphys
