#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

#include "colphys/microphysics/psd.hpp"
#include "colphys/state.hpp"

namespace colphys {

/// Power-law fall speed v(D) = a D^b for one hydrometeor category.
struct FallParams {
  double a = 841.99;
  double b = 0.8;
  double rho_particle = 1000.0;
  double v_max = 20.0;
  double eps = 1.0e-12;
};

template <typename Scalar>
struct FallSpeeds {
  Scalar mass = 0;    ///< mass-weighted, m/s
  Scalar number = 0;  ///< number-weighted, m/s
};

/// Mass weighted: a Gamma(mu+4+b)/Gamma(mu+4) lambda^-b; number weighted uses mu+1.
/// Both are capped at v_max; an empty distribution does not fall.
template <typename Scalar>
FallSpeeds<Scalar> fall_speeds(const ParticleDistribution<Scalar>& psd, const FallParams& p) {
  FallSpeeds<Scalar> v;
  if (psd.empty()) return v;
  const Scalar a = Scalar(p.a);
  const Scalar b = Scalar(p.b);
  const Scalar mu = psd.mu;
  const Scalar scale = std::pow(psd.lambda, -b);
  const Scalar cap = Scalar(p.v_max);
  v.mass = std::min(cap, a * std::tgamma(mu + Scalar(4) + b) / std::tgamma(mu + Scalar(4)) * scale);
  v.number = std::min(cap, a * std::tgamma(mu + Scalar(1) + b) / std::tgamma(mu + Scalar(1)) * scale);
  return v;
}

/// First-order upwind sedimentation of one category over dt, updating q and n in place.
/// Level 0 is the surface level. Substeps internally so no level empties more than
/// once per substep. Returns the mass reaching the ground (kg/m^2).
template <typename Scalar>
Scalar sediment_in_place(Eigen::Ref<Profile<Scalar>> q, Eigen::Ref<Profile<Scalar>> n,
                         const Eigen::Ref<const Profile<Scalar>>& mu, const Eigen::Ref<const Profile<Scalar>>& rho,
                         Scalar dt, Scalar dz, const FallParams& params) {
  if (!(dz > Scalar(0))) throw std::invalid_argument("sedimentation: dz must be positive");
  const Index nz = q.size();
  const Scalar eps = Scalar(params.eps);

  Profile<Scalar> v_mass = Profile<Scalar>::Zero(nz);
  Profile<Scalar> v_number = Profile<Scalar>::Zero(nz);
  Scalar fastest = 0;
  for (Index k = 0; k < nz; ++k) {
    if (!(q(k) > eps && n(k) > eps)) continue;
    const auto psd = diagnose_psd(q(k), n(k), mu(k), rho(k), Scalar(params.rho_particle), eps);
    const auto v = fall_speeds(psd, params);
    v_mass(k) = v.mass;
    v_number(k) = v.number;
    fastest = std::max(fastest, std::max(v.mass, v.number));
  }
  if (fastest == Scalar(0)) return Scalar(0);

  const int substeps = std::max(1, static_cast<int>(std::ceil(fastest * dt / dz)));
  const Scalar step = dt / Scalar(substeps);
  const Profile<Scalar> courant_mass = (v_mass * (step / dz)).min(Scalar(1));
  const Profile<Scalar> courant_number = (v_number * (step / dz)).min(Scalar(1));

  Scalar ground = 0;
  for (int s = 0; s < substeps; ++s) {
    Scalar inflow_q = 0;
    Scalar inflow_n = 0;
    for (Index k = nz - 1; k >= 0; --k) {
      const Scalar out_q = courant_mass(k) * q(k);
      const Scalar out_n = courant_number(k) * n(k);
      q(k) = (q(k) - out_q) + inflow_q;
      n(k) = (n(k) - out_n) + inflow_n;
      if (k > 0) {
        const Scalar ratio = rho(k) / rho(k - 1);
        inflow_q = out_q * ratio;
        inflow_n = out_n * ratio;
      } else {
        ground += out_q * rho(0) * dz;
      }
    }
  }
  return ground;
}

template <typename Scalar>
struct SedimentationResult {
  Profile<Scalar> q_tendency;
  Profile<Scalar> n_tendency;
  Scalar surface_precip_flux = 0;  ///< kg/m^2/s
};

/// Tendency form of sediment_in_place for a standalone profile.
template <typename Scalar>
SedimentationResult<Scalar> sedimentation(const Profile<Scalar>& q, const Profile<Scalar>& n,
                                          const Profile<Scalar>& mu, const Profile<Scalar>& rho, double dt,
                                          double dz, const FallParams& params) {
  if (!(dz > 0.0)) throw std::invalid_argument("sedimentation: dz must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("sedimentation: dt must be positive");
  if (n.size() != q.size() || mu.size() != q.size() || rho.size() != q.size()) {
    throw std::invalid_argument("sedimentation: profile lengths differ");
  }
  Profile<Scalar> q_new = q;
  Profile<Scalar> n_new = n;
  const Scalar ground = sediment_in_place<Scalar>(q_new, n_new, mu, rho, Scalar(dt), Scalar(dz), params);
  SedimentationResult<Scalar> r;
  r.q_tendency = (q_new - q) / Scalar(dt);
  r.n_tendency = (n_new - n) / Scalar(dt);
  r.surface_precip_flux = ground / Scalar(dt);
  return r;
}

}  // namespace colphys
