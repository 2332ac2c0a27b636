#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "colphys/errors.hpp"
#include "colphys/offload.hpp"

namespace colphys {
namespace {

constexpr const char* kCsvHeader = "columns,config,t_in_ms,t_kernel_ms,t_out_ms";

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_ms(const std::string& text, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw InvalidConfig(where, "not a number: '" + text + "'");
  }
  if (used != text.size()) throw InvalidConfig(where, "not a number: '" + text + "'");
  if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidConfig(where, "must be a non-negative time");
  return v * 1e-3;
}

// Relative least squares for t = latency + bytes * inverse_bandwidth; returns (latency, 1/bw).
std::pair<double, double> fit_link_direction(const std::vector<std::pair<double, double>>& samples) {
  std::vector<std::pair<double, double>> used;
  for (const auto& s : samples) {
    if (s.second > 0.0) used.push_back(s);
  }
  if (used.empty()) return {0.0, 0.0};

  constexpr double gb = 1e-9;  // keeps the two columns on similar scales
  bool distinct = false;
  for (const auto& s : used) distinct = distinct || s.first != used.front().first;

  double latency = -1.0;
  double inverse = 0.0;
  if (distinct) {
    const Eigen::Index m = static_cast<Eigen::Index>(used.size());
    Eigen::MatrixXd a(m, 2);
    Eigen::VectorXd b = Eigen::VectorXd::Ones(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& [x, t] = used[static_cast<std::size_t>(i)];
      a(i, 0) = 1.0 / t;
      a(i, 1) = x * gb / t;
    }
    const Eigen::Vector2d sol = a.colPivHouseholderQr().solve(b);
    latency = sol(0);
    inverse = sol(1) * gb;
  }
  if (latency < 0.0 || !(inverse > 0.0)) {
    double sxy = 0.0;
    double sxx = 0.0;
    for (const auto& [x, t] : used) {
      sxy += x / t;
      sxx += (x / t) * (x / t);
    }
    latency = 0.0;
    inverse = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  return {latency, inverse};
}

struct KernelFit {
  std::int64_t residency = 0;
  double per_wave = 0.0;
  double score = 0.0;
};

// Chooses the residency (a multiple of the warp size) and per-wave time that best explain
// the observed kernel times as a step function of the column count.
KernelFit fit_kernel(const std::vector<CalibrationRow>& rows, std::int64_t max_residency, int step) {
  KernelFit best;
  best.score = std::numeric_limits<double>::infinity();
  for (std::int64_t r = step; r <= max_residency; r += step) {
    double sa = 0.0;
    double saa = 0.0;
    for (const auto& row : rows) {
      const double a = static_cast<double>(wave_count(row.columns, r)) / row.t_kernel;
      sa += a;
      saa += a * a;
    }
    if (saa == 0.0) continue;
    const double w = sa / saa;
    double score = 0.0;
    for (const auto& row : rows) {
      const double pred = static_cast<double>(wave_count(row.columns, r)) * w;
      score = std::max(score, std::abs(pred - row.t_kernel) / row.t_kernel);
    }
    if (score < best.score) best = {r, w, score};
  }
  return best;
}

double relative_error(double predicted, double observed) {
  if (observed == 0.0) return predicted == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(predicted - observed) / observed;
}

}  // namespace

CalibrationData read_calibration_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kCsvHeader) {
    throw InvalidConfig("calibration", std::string("expected header '") + kCsvHeader + "'");
  }
  CalibrationData data;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    const std::string where = "calibration[line " + std::to_string(line_no) + "]";
    if (cells.size() != 5) throw InvalidConfig(where, "expected 5 columns");
    CalibrationRow row;
    try {
      std::size_t used = 0;
      row.columns = std::stoll(cells[0], &used);
      if (used != cells[0].size() || row.columns < 0) throw std::invalid_argument("columns");
    } catch (const std::exception&) {
      throw InvalidConfig(where + ".columns", "not a non-negative integer: '" + cells[0] + "'");
    }
    const auto mode = parse_mode(cells[1]);
    if (!mode) throw InvalidConfig(where + ".config", "expected warm or cold, got '" + cells[1] + "'");
    row.config = *mode;
    row.t_in = parse_ms(cells[2], where + ".t_in_ms");
    row.t_kernel = parse_ms(cells[3], where + ".t_kernel_ms");
    row.t_out = parse_ms(cells[4], where + ".t_out_ms");
    data.push_back(row);
  }
  return data;
}

void write_calibration_csv(std::ostream& out, const CalibrationData& data) {
  out << kCsvHeader << '\n';
  out.precision(17);
  for (const auto& r : data) {
    out << r.columns << ',' << mode_name(r.config) << ',' << r.t_in * 1e3 << ',' << r.t_kernel * 1e3 << ','
        << r.t_out * 1e3 << '\n';
  }
}

CalibrationData reference_phase_table() {
  using M = MoistureMode;
  return {
      {2000, M::Warm, 1.5e-3, 29e-3, 0.8e-3},     {10000, M::Warm, 7e-3, 88e-3, 4.6e-3},
      {20000, M::Warm, 18e-3, 224e-3, 8e-3},      {2000, M::Cold, 1.82e-3, 39e-3, 0.74e-3},
      {10000, M::Cold, 11.2e-3, 214e-3, 4.6e-3},  {20000, M::Cold, 22.56e-3, 395e-3, 8.1e-3},
  };
}

CalibratedModel calibrate(const CalibrationData& data, const TransferVolumes& volumes, const DeviceSpec& device,
                          int regs_per_thread) {
  if (data.empty()) throw std::invalid_argument("calibrate: no calibration rows");
  CalibratedModel model;
  model.device = device;
  model.volumes = volumes;

  std::vector<std::pair<double, double>> in_samples;
  std::vector<std::pair<double, double>> out_samples;
  for (const auto& r : data) {
    in_samples.emplace_back(volumes.bytes_in(r.columns, r.config), r.t_in);
    out_samples.emplace_back(volumes.bytes_out(r.columns, r.config), r.t_out);
  }
  const auto [lat_in, inv_in] = fit_link_direction(in_samples);
  const auto [lat_out, inv_out] = fit_link_direction(out_samples);
  if (inv_in > 0.0) model.link.bandwidth_to_dev = 1.0 / inv_in;
  if (inv_out > 0.0) model.link.bandwidth_from_dev = 1.0 / inv_out;
  // One latency serves both directions; take the mean of the two fits.
  model.link.latency = 0.5 * (lat_in + lat_out);
  if (lat_in != lat_out) {
    // Refit each bandwidth with the shared latency so both directions stay consistent.
    auto refit = [&](const std::vector<std::pair<double, double>>& samples, double fallback) {
      double sxy = 0.0;
      double sxx = 0.0;
      for (const auto& [x, t] : samples) {
        if (!(t > 0.0)) continue;
        const double y = std::max(t - model.link.latency, 0.0);
        sxy += (x / t) * (y / t);
        sxx += (x / t) * (x / t);
      }
      return sxy > 0.0 ? sxx / sxy : fallback;
    };
    model.link.bandwidth_to_dev = refit(in_samples, model.link.bandwidth_to_dev);
    model.link.bandwidth_from_dev = refit(out_samples, model.link.bandwidth_from_dev);
  }

  const int step = device.warp_size;
  const std::int64_t max_res = max_concurrent_threads(device, regs_per_thread) / step * step;
  std::optional<KernelFit> fits[2];
  for (MoistureMode mode : {MoistureMode::Warm, MoistureMode::Cold}) {
    std::vector<CalibrationRow> rows;
    for (const auto& r : data) {
      if (r.config == mode && r.t_kernel > 0.0) rows.push_back(r);
    }
    if (!rows.empty()) fits[static_cast<int>(mode)] = fit_kernel(rows, max_res, step);
  }
  if (!fits[0] && fits[1]) fits[0] = fits[1];
  if (!fits[1] && fits[0]) fits[1] = fits[0];

  for (MoistureMode mode : {MoistureMode::Warm, MoistureMode::Cold}) {
    KernelCostModel& cost = mode == MoistureMode::Cold ? model.cold : model.warm;
    LaunchConfig& launch = mode == MoistureMode::Cold ? model.launch_cold : model.launch_warm;
    launch.vector_length = step;
    launch.regs_per_thread = regs_per_thread;
    const auto& fit = fits[static_cast<int>(mode)];
    if (!fit) {
      launch.gangs = max_res / step;
      cost.per_column_work = 0.0;
      continue;
    }
    launch.gangs = fit->residency / step;
    cost.per_column_work = fit->per_wave / cost.seconds_per_unit();
  }

  for (const auto& r : data) {
    RowResidual res;
    res.row = r;
    res.predicted = predict_phases(model, r.columns, r.config);
    res.max_relative_error = std::max({relative_error(res.predicted.t_in, r.t_in),
                                       relative_error(res.predicted.t_kernel, r.t_kernel),
                                       relative_error(res.predicted.t_out, r.t_out)});
    model.max_relative_error = std::max(model.max_relative_error, res.max_relative_error);
    model.residuals.push_back(res);
  }
  return model;
}

PhaseTimes predict_phases(const CalibratedModel& model, std::int64_t n_columns, MoistureMode mode) {
  PhaseTimes p;
  p.t_in = transfer_time(model.volumes.bytes_in(n_columns, mode), Direction::ToDevice, model.link);
  p.t_kernel = kernel_time(n_columns, model.launch(mode), model.device, model.cost(mode));
  p.t_out = transfer_time(model.volumes.bytes_out(n_columns, mode), Direction::FromDevice, model.link);
  return p;
}

}  // namespace colphys
