#pragma once

#include <array>
#include <cmath>

#include "colphys/errors.hpp"
#include "colphys/microphysics/constants.hpp"
#include "colphys/roster.hpp"
#include "colphys/thermo.hpp"

namespace colphys {

enum class Process { Condensation, Autoconversion, Accretion, Freezing, Deposition, Melting };

/// Thermodynamic state of one grid level. Fields the mode does not carry read as zero.
template <typename Scalar>
struct LevelState {
  std::array<Scalar, kFieldIdCount> value{};
  Scalar theta = 0;
  Scalar pressure = 0;
  Scalar exner = 1;

  Scalar& operator[](FieldId id) noexcept { return value[static_cast<std::size_t>(id)]; }
  Scalar operator[](FieldId id) const noexcept { return value[static_cast<std::size_t>(id)]; }
  Scalar temperature() const noexcept { return theta * exner; }
};

/// Signed tendency on a number or aerosol field that rides along with a mass transfer.
template <typename Scalar>
struct Companion {
  FieldId field = FieldId::CloudNumber;
  Scalar rate = 0;
};

/// Mass moving from `source` to `destination` at `rate` (kg/kg/s, >= 0).
template <typename Scalar>
struct Transfer {
  Process process = Process::Condensation;
  FieldId source = FieldId::VapourMass;
  FieldId destination = FieldId::CloudMass;
  Scalar rate = 0;
  std::array<Companion<Scalar>, 4> companions{};
  int companion_count = 0;

  void add_companion(FieldId field, Scalar r) noexcept { companions[companion_count++] = {field, r}; }
};

template <typename Scalar>
struct ProcessRates {
  std::array<Transfer<Scalar>, 8> transfers{};
  int count = 0;

  Transfer<Scalar>& add(Process p, FieldId from, FieldId to, Scalar rate) noexcept {
    auto& t = transfers[count++];
    t = Transfer<Scalar>{};
    t.process = p;
    t.source = from;
    t.destination = to;
    t.rate = rate;
    return t;
  }

  void append(const ProcessRates& other) noexcept {
    for (int i = 0; i < other.count; ++i) transfers[count++] = other.transfers[i];
  }

  /// Total rate of every transfer tagged `p`.
  Scalar rate(Process p) const noexcept {
    Scalar sum = 0;
    for (int i = 0; i < count; ++i) {
      if (transfers[i].process == p) sum += transfers[i].rate;
    }
    return sum;
  }

  const Transfer<Scalar>* begin() const noexcept { return transfers.data(); }
  const Transfer<Scalar>* end() const noexcept { return transfers.data() + count; }
};

/// Which conditional branches fire at a level. Shared by the rate functions and the work tally.
struct ActiveBranches {
  bool condensation = false;
  bool autoconversion = false;
  bool accretion = false;
  bool freezing = false;
  bool deposition = false;
  std::array<bool, 3> melting{};  // ice, snow, graupel
};

namespace detail {

inline constexpr double kRainEmbryoMass = 2.6e-10;  // kg, new drop from autoconversion
inline constexpr double kIceEmbryoMass = 1.0e-12;   // kg, crystal nucleated by deposition

template <typename Scalar>
ActiveBranches warm_branches(const LevelState<Scalar>& s, const MicrophysicsConstants& c, Scalar qsat) {
  const Scalar eps = Scalar(c.eps);
  ActiveBranches a;
  a.condensation = s[FieldId::VapourMass] > qsat;
  a.autoconversion = s[FieldId::CloudMass] > Scalar(c.qc_crit);
  a.accretion = s[FieldId::CloudMass] > eps && s[FieldId::RainMass] > eps;
  return a;
}

template <typename Scalar>
void cold_branches(ActiveBranches& a, const LevelState<Scalar>& s, const MicrophysicsConstants& c) {
  const Scalar eps = Scalar(c.eps);
  const Scalar t = s.temperature();
  if (t < Scalar(c.t_frz)) {
    a.freezing = s[FieldId::RainMass] > eps;
    a.deposition = s[FieldId::VapourMass] > thermo::qsat_ice(t, s.pressure);
  }
  if (t > Scalar(c.t_melt)) {
    a.melting = {s[FieldId::IceMass] > eps, s[FieldId::SnowMass] > eps, s[FieldId::GraupelMass] > eps};
  }
}

}  // namespace detail

template <typename Scalar>
ActiveBranches active_branches(const LevelState<Scalar>& s, MoistureMode mode, const MicrophysicsConstants& c) {
  const Scalar qsat = thermo::qsat_liquid(s.temperature(), s.pressure);
  ActiveBranches a = detail::warm_branches(s, c, qsat);
  if (mode == MoistureMode::Cold) detail::cold_branches(a, s, c);
  return a;
}

/// Condensation, autoconversion and accretion with their number and aerosol companions.
template <typename Scalar>
ProcessRates<Scalar> warm_rates(const LevelState<Scalar>& s, const MicrophysicsConstants& c) {
  ProcessRates<Scalar> r;
  const Scalar qv = s[FieldId::VapourMass];
  const Scalar qc = s[FieldId::CloudMass];
  const Scalar qr = s[FieldId::RainMass];
  const Scalar qsat = thermo::qsat_liquid(s.temperature(), s.pressure);
  const ActiveBranches a = detail::warm_branches(s, c, qsat);

  if (a.condensation) {
    r.add(Process::Condensation, FieldId::VapourMass, FieldId::CloudMass, (qv - qsat) / Scalar(c.tau_cond));
  }
  // Fraction of cloud-borne number and aerosol leaving with each unit of cloud mass.
  const Scalar per_mass_nc = qc > Scalar(0) ? s[FieldId::CloudNumber] / qc : Scalar(0);
  const Scalar per_mass_aer = qc > Scalar(0) ? s[FieldId::AerosolCloudBorneMass] / qc : Scalar(0);
  auto cloud_companions = [&](Transfer<Scalar>& t) {
    t.add_companion(FieldId::CloudNumber, -t.rate * per_mass_nc);
    if (per_mass_aer > Scalar(0)) {
      t.add_companion(FieldId::AerosolCloudBorneMass, -t.rate * per_mass_aer);
      t.add_companion(FieldId::AerosolRainBorneMass, t.rate * per_mass_aer);
    }
  };
  if (a.autoconversion) {
    auto& t = r.add(Process::Autoconversion, FieldId::CloudMass, FieldId::RainMass,
                    Scalar(c.k_auto) * (qc - Scalar(c.qc_crit)));
    cloud_companions(t);
    t.add_companion(FieldId::RainNumber, t.rate / Scalar(detail::kRainEmbryoMass));
  }
  if (a.accretion) {
    auto& t = r.add(Process::Accretion, FieldId::CloudMass, FieldId::RainMass,
                    Scalar(c.k_acc) * qc * std::pow(qr, Scalar(0.875)));
    cloud_companions(t);
  }
  return r;
}

/// Freezing, deposition and melting. Throws InvalidMode unless `mode` is Cold.
template <typename Scalar>
ProcessRates<Scalar> cold_rates(const LevelState<Scalar>& s, MoistureMode mode, const MicrophysicsConstants& c) {
  if (mode != MoistureMode::Cold) throw InvalidMode("cold_rates requires the cold configuration");
  ProcessRates<Scalar> r;
  ActiveBranches a;
  detail::cold_branches(a, s, c);
  const Scalar t = s.temperature();

  if (a.freezing) {
    auto& tr = r.add(Process::Freezing, FieldId::RainMass, FieldId::GraupelMass,
                     s[FieldId::RainMass] / Scalar(c.tau_frz));
    const Scalar dn = s[FieldId::RainNumber] / Scalar(c.tau_frz);
    tr.add_companion(FieldId::RainNumber, -dn);
    tr.add_companion(FieldId::GraupelNumber, dn);
  }
  if (a.deposition) {
    const Scalar excess = s[FieldId::VapourMass] - thermo::qsat_ice(t, s.pressure);
    auto& tr = r.add(Process::Deposition, FieldId::VapourMass, FieldId::IceMass, excess / Scalar(c.tau_dep));
    if (s[FieldId::IceNumber] < Scalar(c.eps)) {
      tr.add_companion(FieldId::IceNumber, tr.rate / Scalar(detail::kIceEmbryoMass));
    }
  }
  constexpr std::array<FieldId, 3> frozen = {FieldId::IceMass, FieldId::SnowMass, FieldId::GraupelMass};
  constexpr std::array<FieldId, 3> frozen_number = {FieldId::IceNumber, FieldId::SnowNumber,
                                                    FieldId::GraupelNumber};
  for (std::size_t i = 0; i < frozen.size(); ++i) {
    if (!a.melting[i]) continue;
    auto& tr = r.add(Process::Melting, frozen[i], FieldId::RainMass, s[frozen[i]] / Scalar(c.tau_melt));
    const Scalar dn = s[frozen_number[i]] / Scalar(c.tau_melt);
    tr.add_companion(frozen_number[i], -dn);
    tr.add_companion(FieldId::RainNumber, dn);
  }
  return r;
}

/// Latent heating per unit mass transferred, divided by cp (K per kg/kg).
constexpr double latent_heating(Process p) noexcept {
  switch (p) {
    case Process::Condensation:
      return thermo::kLatentVaporisation / thermo::kHeatCapacity;
    case Process::Deposition:
      return thermo::kLatentSublimation / thermo::kHeatCapacity;
    case Process::Freezing:
      return thermo::kLatentFusion / thermo::kHeatCapacity;
    case Process::Melting:
      return -thermo::kLatentFusion / thermo::kHeatCapacity;
    default:
      return 0.0;
  }
}

}  // namespace colphys
