#pragma once

namespace colphys {

/// Tunable constants of the stand-in process rates. Names match the JSON `constants` block.
struct MicrophysicsConstants {
  double k_auto = 1.0e-3;   // 1/s
  double qc_crit = 1.0e-3;  // kg/kg
  double k_acc = 2.2;
  double tau_cond = 20.0;   // s
  double tau_frz = 100.0;   // s
  double a = 841.99;        // rain fall-speed prefactor
  double b = 0.8;           // rain fall-speed exponent
  double rho_w = 1000.0;    // kg/m^3
  double eps = 1.0e-12;

  double tau_dep = 200.0;   // s
  double tau_melt = 100.0;  // s
  double t_frz = 273.15;    // K
  double t_melt = 273.15;   // K
  double v_max = 20.0;      // m/s cap on any fall speed
};

}  // namespace colphys
