#pragma once

#include <cmath>

namespace colphys::thermo {

inline constexpr double kGasConstantDry = 287.04;   // J/(kg K)
inline constexpr double kHeatCapacity = 1004.0;     // J/(kg K)
inline constexpr double kKappa = kGasConstantDry / kHeatCapacity;
inline constexpr double kReferencePressure = 1.0e5;  // Pa
inline constexpr double kLatentVaporisation = 2.5e6;  // J/kg
inline constexpr double kLatentSublimation = 2.834e6;
inline constexpr double kLatentFusion = kLatentSublimation - kLatentVaporisation;
inline constexpr double kFreezingPoint = 273.15;
inline constexpr double kPi = 3.14159265358979323846;

template <typename Scalar>
Scalar exner(Scalar pressure) {
  return std::pow(pressure / Scalar(kReferencePressure), Scalar(kKappa));
}

// Tetens-style saturation vapour pressure over liquid water (Pa).
template <typename Scalar>
Scalar saturation_pressure_liquid(Scalar temperature) {
  return Scalar(610.78) *
         std::exp(Scalar(17.27) * (temperature - Scalar(kFreezingPoint)) / (temperature - Scalar(35.86)));
}

template <typename Scalar>
Scalar saturation_pressure_ice(Scalar temperature) {
  return Scalar(610.78) *
         std::exp(Scalar(21.875) * (temperature - Scalar(kFreezingPoint)) / (temperature - Scalar(7.66)));
}

template <typename Scalar>
Scalar mixing_ratio_from_pressure(Scalar vapour_pressure, Scalar pressure) {
  return Scalar(0.622) * vapour_pressure / (pressure - vapour_pressure);
}

template <typename Scalar>
Scalar qsat_liquid(Scalar temperature, Scalar pressure) {
  return mixing_ratio_from_pressure(saturation_pressure_liquid(temperature), pressure);
}

template <typename Scalar>
Scalar qsat_ice(Scalar temperature, Scalar pressure) {
  return mixing_ratio_from_pressure(saturation_pressure_ice(temperature), pressure);
}

}  // namespace colphys::thermo
