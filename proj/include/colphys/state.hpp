#pragma once

#include <cmath>
#include <cstring>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "colphys/grid.hpp"
#include "colphys/roster.hpp"
#include "colphys/thermo.hpp"

namespace colphys {

/// 3D field stored nz x columns, column-major, so every column is contiguous in z.
template <typename Scalar>
using Field = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Profile = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/// Reference atmosphere: exponential pressure decay, linear potential temperature,
/// relative humidity varying linearly from surface to model top.
struct Sounding {
  double surface_pressure = 1.0e5;
  double scale_height = 8000.0;
  double surface_theta = 285.0;
  double theta_lapse = 0.004;
  double surface_rh = 0.8;
  double top_rh = 0.5;
};

enum class CloudLayout {
  Independent,  ///< each column cloudy with probability cloudy_fraction
  Deck,         ///< one contiguous band of x-rows covering cloudy_fraction of the domain
};

struct Scenario {
  double cloudy_fraction = 0.3;
  CloudLayout layout = CloudLayout::Independent;
  std::uint64_t seed = 1;
  double cloud_peak = 2.0e-3;  ///< kg/kg at the centre of the liquid bubble
  double cloud_jitter = 0.5;   ///< relative spread of bubble amplitude across cloudy columns
  Sounding sounding{};
};

template <typename Scalar>
struct ModelState {
  Grid grid;
  MoistureMode mode = MoistureMode::Warm;
  std::vector<Field<Scalar>> q;  ///< one field per roster slot
  Field<Scalar> theta;
  Profile<Scalar> pressure;  ///< Pa by level, strictly decreasing
  Profile<Scalar> exner;
  Profile<Scalar> density;   ///< kg/m^3 reference air density by level
  double time = 0.0;

  std::span<const FieldId> fields() const noexcept { return roster(mode); }

  Field<Scalar>& field(FieldId id) { return q.at(checked_slot(id)); }
  const Field<Scalar>& field(FieldId id) const { return q.at(checked_slot(id)); }

 private:
  std::size_t checked_slot(FieldId id) const {
    const int s = slot_of(mode, id);
    if (s < 0) throw std::out_of_range("field not in roster");
    return static_cast<std::size_t>(s);
  }
};

namespace detail {

// Uniform double in [0,1) built from the top 53 bits, identical on every platform.
inline double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Deterministic synthetic stratus scenario for `grid` under `mode`.
template <typename Scalar = double>
ModelState<Scalar> init_state(const Grid& grid, MoistureMode mode, const Scenario& scenario) {
  if (!(scenario.cloudy_fraction >= 0.0 && scenario.cloudy_fraction <= 1.0)) {
    throw std::invalid_argument("cloudy_fraction must lie in [0, 1]");
  }
  if (grid.nx < 1 || grid.ny < 1 || grid.nz < 1 || !(grid.dz > 0.0)) {
    throw std::invalid_argument("invalid grid");
  }
  const Sounding& snd = scenario.sounding;
  const Index nz = grid.nz;
  const Index ncol = grid.columns();

  ModelState<Scalar> state;
  state.grid = grid;
  state.mode = mode;
  state.pressure.resize(nz);
  state.exner.resize(nz);
  state.density.resize(nz);

  Profile<Scalar> theta_ref(nz);
  Profile<Scalar> qv_ref(nz);
  Profile<Scalar> temperature(nz);
  const double top = static_cast<double>(nz) * grid.dz;
  for (Index k = 0; k < nz; ++k) {
    const double z = grid.level_height(k);
    const double p = snd.surface_pressure * std::exp(-z / snd.scale_height);
    const double th = snd.surface_theta + snd.theta_lapse * z;
    const double ex = thermo::exner(p);
    const double t = th * ex;
    const double rh = snd.surface_rh + (snd.top_rh - snd.surface_rh) * z / top;
    state.pressure(k) = Scalar(p);
    state.exner(k) = Scalar(ex);
    state.density(k) = Scalar(p / (thermo::kGasConstantDry * t));
    theta_ref(k) = Scalar(th);
    temperature(k) = Scalar(t);
    qv_ref(k) = Scalar(rh * thermo::qsat_liquid(t, p));
  }

  const std::size_t nfields = roster_size(mode);
  state.q.assign(nfields, Field<Scalar>::Zero(nz, ncol));
  state.theta = theta_ref.replicate(1, ncol);

  auto set_all = [&](FieldId id, Scalar value) {
    if (carries(mode, id)) state.field(id).setConstant(value);
  };
  state.field(FieldId::VapourMass) = qv_ref.replicate(1, ncol);
  set_all(FieldId::RainShape, Scalar(1));
  set_all(FieldId::IceShape, Scalar(0));
  set_all(FieldId::SnowShape, Scalar(0));
  set_all(FieldId::AerosolAccumulationMass, Scalar(1e-9));
  set_all(FieldId::AerosolCoarseMass, Scalar(1e-10));

  const Index band_lo = nz / 4;
  const Index band_hi = (3 * nz) / 5;
  const Index band_len = band_hi - band_lo + 1;

  std::mt19937_64 rng(scenario.seed);
  Index deck_start = 0;
  Index deck_rows = 0;
  if (scenario.layout == CloudLayout::Deck) {
    deck_start = static_cast<Index>(detail::unit_draw(rng) * static_cast<double>(grid.nx));
    deck_rows = static_cast<Index>(std::llround(scenario.cloudy_fraction * static_cast<double>(grid.nx)));
  }

  const bool cold = mode == MoistureMode::Cold;
  for (Index i = 0; i < grid.nx; ++i) {
    for (Index j = 0; j < grid.ny; ++j) {
      const Index c = grid.column_index(i, j);
      bool cloudy = false;
      if (scenario.layout == CloudLayout::Independent) {
        cloudy = detail::unit_draw(rng) < scenario.cloudy_fraction;
      } else {
        cloudy = ((i - deck_start + grid.nx) % grid.nx) < deck_rows;
      }
      const double amplitude = scenario.cloud_peak * (1.0 + scenario.cloud_jitter * (detail::unit_draw(rng) - 0.5));
      if (!cloudy) continue;

      for (Index k = band_lo; k <= band_hi; ++k) {
        const double shape = std::sin(thermo::kPi * static_cast<double>(k - band_lo + 1) /
                                      static_cast<double>(band_len + 1));
        const Scalar qc = Scalar(amplitude * shape);
        const Scalar qr = Scalar(0.25) * qc;
        state.field(FieldId::CloudMass)(k, c) = qc;
        state.field(FieldId::RainMass)(k, c) = qr;
        state.field(FieldId::CloudNumber)(k, c) = qc / Scalar(1e-11);
        state.field(FieldId::RainNumber)(k, c) = qr / Scalar(5e-8);
        if (!cold) continue;
        state.field(FieldId::AerosolCloudBorneMass)(k, c) = Scalar(1e-10);
        if (temperature(k) < Scalar(thermo::kFreezingPoint)) {
          const Scalar qi = Scalar(0.2) * qc;
          const Scalar qs = Scalar(0.1) * qc;
          const Scalar qg = Scalar(0.05) * qc;
          state.field(FieldId::IceMass)(k, c) = qi;
          state.field(FieldId::SnowMass)(k, c) = qs;
          state.field(FieldId::GraupelMass)(k, c) = qg;
          state.field(FieldId::IceNumber)(k, c) = qi / Scalar(1e-11);
          state.field(FieldId::SnowNumber)(k, c) = qs / Scalar(1e-9);
          state.field(FieldId::GraupelNumber)(k, c) = qg / Scalar(1e-8);
        }
      }
    }
  }
  return state;
}

/// A private copy of one column plus the reference profiles the kernel needs.
template <typename Scalar>
struct ColumnData {
  MoistureMode mode = MoistureMode::Warm;
  double dz = 100.0;
  Field<Scalar> q;  ///< nz x roster_size(mode)
  Profile<Scalar> theta;
  Profile<Scalar> pressure;
  Profile<Scalar> exner;
  Profile<Scalar> density;

  Index levels() const noexcept { return theta.size(); }
  auto field(FieldId id) { return q.col(slot_of(mode, id)); }
  auto field(FieldId id) const { return q.col(slot_of(mode, id)); }
};

template <typename Scalar>
ColumnData<Scalar> extract_column(const ModelState<Scalar>& state, Index column) {
  ColumnData<Scalar> out;
  out.mode = state.mode;
  out.dz = state.grid.dz;
  const Index nz = state.grid.nz;
  out.q.resize(nz, static_cast<Index>(state.q.size()));
  for (std::size_t f = 0; f < state.q.size(); ++f) out.q.col(static_cast<Index>(f)) = state.q[f].col(column);
  out.theta = state.theta.col(column);
  out.pressure = state.pressure;
  out.exner = state.exner;
  out.density = state.density;
  return out;
}

/// Bitwise comparison of every prognostic array and the clock.
template <typename Scalar>
bool bitwise_equal(const ModelState<Scalar>& a, const ModelState<Scalar>& b) {
  auto same = [](const auto& x, const auto& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() &&
           std::memcmp(x.data(), y.data(), sizeof(Scalar) * static_cast<std::size_t>(x.size())) == 0;
  };
  if (!(a.grid == b.grid) || a.mode != b.mode || a.q.size() != b.q.size()) return false;
  for (std::size_t f = 0; f < a.q.size(); ++f) {
    if (!same(a.q[f], b.q[f])) return false;
  }
  return same(a.theta, b.theta) && same(a.pressure, b.pressure) && same(a.density, b.density) &&
         a.time == b.time;
}

}  // namespace colphys
