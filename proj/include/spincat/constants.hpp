#pragma once

#include <numbers>

// CODATA 2018 values, SI units.
namespace spincat::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double speed_of_light = 299792458.0;              // m/s
inline constexpr double vacuum_permittivity = 8.8541878128e-12;    // F/m
inline constexpr double planck = 6.62607015e-34;                   // J s
inline constexpr double hbar = 1.054571817e-34;                    // J s
inline constexpr double nuclear_magneton = 5.0507837461e-27;       // J/T
inline constexpr double au_polarizability = 1.64877727436e-41;     // C m^2 / V

/// 173Yb ground-state gyromagnetic ratio in units of mu_N / hbar (signed).
inline constexpr double yb173_gamma_in_nuclear_magnetons = -0.27196;

/// Signed gamma(173Yb) in rad s^-1 T^-1.
inline constexpr double yb173_gamma = yb173_gamma_in_nuclear_magnetons * nuclear_magneton / hbar;

}  // namespace spincat::constants
