#pragma once

#include <algorithm>
#include <array>
#include <stdexcept>

#include "colphys/microphysics/constants.hpp"
#include "colphys/microphysics/processes.hpp"
#include "colphys/microphysics/sedimentation.hpp"
#include "colphys/state.hpp"

namespace colphys {

/// Per-column output of a component: tendency profiles for every roster field.
template <typename Scalar>
struct ColumnSources {
  Field<Scalar> q;  ///< nz x roster_size(mode), field units per second
  Profile<Scalar> theta;
  Scalar surface_precip_flux = 0;  ///< kg/m^2/s
  double work_units = 1.0;

  static ColumnSources zeros(Index nz, MoistureMode mode) {
    ColumnSources s;
    s.q = Field<Scalar>::Zero(nz, static_cast<Index>(roster_size(mode)));
    s.theta = Profile<Scalar>::Zero(nz);
    return s;
  }
};

/// A sedimenting hydrometeor category and where its moments live.
struct FallCategory {
  FieldId mass;
  FieldId number;
  FieldId shape;  ///< only consulted when the mode carries it
  bool has_shape;
  FallParams params;
};

inline std::array<FallCategory, 4> fall_categories(const MicrophysicsConstants& c) {
  return {{
      {FieldId::RainMass, FieldId::RainNumber, FieldId::RainShape, true, {c.a, c.b, c.rho_w, c.v_max, c.eps}},
      {FieldId::IceMass, FieldId::IceNumber, FieldId::IceShape, true, {700.0, 1.0, 500.0, c.v_max, c.eps}},
      {FieldId::SnowMass, FieldId::SnowNumber, FieldId::SnowShape, true, {11.72, 0.41, 100.0, c.v_max, c.eps}},
      {FieldId::GraupelMass, FieldId::GraupelNumber, FieldId::GraupelMass, false, {19.3, 0.37, 400.0, c.v_max, c.eps}},
  }};
}

namespace detail {

// Relative cost of each conditional branch, in units of one cheap rate evaluation.
inline constexpr double kCostCondensation = 1.0;
inline constexpr double kCostAutoconversion = 1.0;
inline constexpr double kCostAccretion = 2.0;
inline constexpr double kCostFreezing = 1.0;
inline constexpr double kCostDeposition = 2.0;
inline constexpr double kCostMelting = 1.0;
inline constexpr double kCostFallSpeed = 4.0;

template <typename Scalar>
LevelState<Scalar> load_level(const Field<Scalar>& q, std::span<const FieldId> ids, const Profile<Scalar>& theta,
                              const ColumnData<Scalar>& column, Index k) {
  LevelState<Scalar> s;
  for (std::size_t f = 0; f < ids.size(); ++f) s[ids[f]] = q(k, static_cast<Index>(f));
  s.theta = theta(k);
  s.pressure = column.pressure(k);
  s.exner = column.exner(k);
  return s;
}

}  // namespace detail

/// Work units the kernel tallies for `column`: 1 for a column with no active branch, plus
/// the cost of every branch active in the entry state, repeated per substep and
/// normalised by column height.
template <typename Scalar>
double work_estimate(const ColumnData<Scalar>& column, const MicrophysicsConstants& c, int n_substeps = 2) {
  const auto ids = roster(column.mode);
  const Index nz = column.levels();
  const Scalar eps = Scalar(c.eps);
  double weight = 0.0;
  for (Index k = 0; k < nz; ++k) {
    const auto level = detail::load_level(column.q, ids, column.theta, column, k);
    const ActiveBranches a = active_branches(level, column.mode, c);
    weight += a.condensation * detail::kCostCondensation + a.autoconversion * detail::kCostAutoconversion +
              a.accretion * detail::kCostAccretion + a.freezing * detail::kCostFreezing +
              a.deposition * detail::kCostDeposition +
              (a.melting[0] + a.melting[1] + a.melting[2]) * detail::kCostMelting;
    for (const auto& cat : fall_categories(c)) {
      if (!carries(column.mode, cat.mass)) continue;
      if (level[cat.mass] > eps && level[cat.number] > eps) weight += detail::kCostFallSpeed;
    }
  }
  return 1.0 + static_cast<double>(n_substeps) * weight / static_cast<double>(nz);
}

/// The column kernel. Runs n_substeps passes of process rates followed by sedimentation on
/// a private copy of the column and returns the mean tendencies over dt.
template <typename Scalar>
ColumnSources<Scalar> microphysics_column(const ColumnData<Scalar>& column, const MicrophysicsConstants& c,
                                          double dt, int n_substeps = 2) {
  if (!(dt > 0.0)) throw std::invalid_argument("microphysics_column: dt must be positive");
  if (n_substeps < 1) throw std::invalid_argument("microphysics_column: n_substeps must be >= 1");
  const MoistureMode mode = column.mode;
  const auto ids = roster(mode);
  const Index nz = column.levels();
  const Scalar sub_dt = Scalar(dt / n_substeps);

  Field<Scalar> q = column.q;
  Profile<Scalar> theta = column.theta;
  Scalar ground = 0;
  const Profile<Scalar> no_shape = Profile<Scalar>::Zero(nz);
  const auto categories = fall_categories(c);

  for (int step = 0; step < n_substeps; ++step) {
    for (Index k = 0; k < nz; ++k) {
      const auto level = detail::load_level(q, ids, theta, column, k);
      ProcessRates<Scalar> rates = warm_rates(level, c);
      if (mode == MoistureMode::Cold) rates.append(cold_rates(level, mode, c));
      if (rates.count == 0) continue;

      // Scale every sink on a field by the same factor when together they would exhaust it.
      std::array<Scalar, kFieldIdCount> sink{};
      for (const auto& t : rates) sink[static_cast<std::size_t>(t.source)] += t.rate;
      std::array<Scalar, kFieldIdCount> scale{};
      for (std::size_t f = 0; f < kFieldIdCount; ++f) {
        const Scalar demand = sink[f] * sub_dt;
        scale[f] = demand > level.value[f] ? level.value[f] / demand : Scalar(1);
      }

      std::array<Scalar, kFieldIdCount> delta{};
      Scalar heating = 0;
      for (const auto& t : rates) {
        const Scalar factor = sub_dt * scale[static_cast<std::size_t>(t.source)];
        const Scalar amount = t.rate * factor;
        delta[static_cast<std::size_t>(t.source)] -= amount;
        delta[static_cast<std::size_t>(t.destination)] += amount;
        for (int i = 0; i < t.companion_count; ++i) {
          delta[static_cast<std::size_t>(t.companions[i].field)] += t.companions[i].rate * factor;
        }
        heating += Scalar(latent_heating(t.process)) * amount;
      }
      for (std::size_t f = 0; f < ids.size(); ++f) {
        const Scalar d = delta[static_cast<std::size_t>(ids[f])];
        if (d == Scalar(0)) continue;
        Scalar& cell = q(k, static_cast<Index>(f));
        cell = std::max(cell + d, Scalar(0));
      }
      theta(k) += heating / column.exner(k);
    }

    for (const auto& cat : categories) {
      if (!carries(mode, cat.mass)) continue;
      const bool shaped = cat.has_shape && carries(mode, cat.shape);
      ground += sediment_in_place<Scalar>(q.col(slot_of(mode, cat.mass)), q.col(slot_of(mode, cat.number)),
                                          shaped ? Profile<Scalar>(q.col(slot_of(mode, cat.shape))) : no_shape,
                                          column.density, sub_dt, Scalar(column.dz), cat.params);
    }
  }

  ColumnSources<Scalar> out;
  const Scalar inv_dt = Scalar(1.0 / dt);
  out.q = (q - column.q) * inv_dt;
  out.theta = (theta - column.theta) * inv_dt;
  out.surface_precip_flux = ground * inv_dt;
  out.work_units = work_estimate(column, c, n_substeps);
  return out;
}

}  // namespace colphys
