#pragma once

#include <cmath>
#include <stdexcept>

#include "colphys/thermo.hpp"

namespace colphys {

/// Gamma size distribution N(D) = n0 D^mu exp(-lambda D). The empty distribution has lambda == 0.
template <typename Scalar>
struct ParticleDistribution {
  Scalar n0 = 0;
  Scalar mu = 0;
  Scalar lambda = 0;

  bool empty() const noexcept { return lambda == Scalar(0); }
};

/// Closes the distribution from mass q and number n with fixed shape mu.
///   lambda = [ (pi/6) rho_p n Gamma(mu+4) / (rho_air q Gamma(mu+1)) ]^(1/3)
///   n0     = n lambda^(mu+1) / Gamma(mu+1)
/// Returns the empty distribution when q < eps or n < eps.
template <typename Scalar>
ParticleDistribution<Scalar> diagnose_psd(Scalar q, Scalar n, Scalar mu, Scalar rho_air,
                                          Scalar rho_particle = Scalar(1000), Scalar eps = Scalar(1e-12)) {
  if (q < Scalar(0) || n < Scalar(0)) throw std::invalid_argument("diagnose_psd: negative moment");
  ParticleDistribution<Scalar> psd;
  psd.mu = mu;
  if (q < eps || n < eps) return psd;
  const Scalar g1 = std::tgamma(mu + Scalar(1));
  const Scalar g4 = std::tgamma(mu + Scalar(4));
  psd.lambda = std::cbrt(Scalar(thermo::kPi / 6.0) * rho_particle * n * g4 / (rho_air * q * g1));
  psd.n0 = n * std::pow(psd.lambda, mu + Scalar(1)) / g1;
  return psd;
}

}  // namespace colphys
