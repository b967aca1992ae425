#pragma once

#include <numbers>

namespace rydgate {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// CODATA 2018 exact value, J/K.
inline constexpr double boltzmann = 1.380649e-23;

// Frequencies on the command line and in config files are quoted as f = Ω/2π
// in MHz; internally everything is SI (rad/s, rad/m, s, m).
constexpr double mhz_to_rad_per_s(double f_mhz) { return two_pi * f_mhz * 1e6; }
constexpr double rad_per_s_to_mhz(double omega) { return omega / (two_pi * 1e6); }

// C6/2π in THz·μm⁶ -> rad·μm⁶/s.
constexpr double thz_um6_to_rad_per_s(double c6_thz) { return two_pi * c6_thz * 1e12; }

// Wavenumber in cm⁻¹ -> m⁻¹.
constexpr double per_cm_to_per_m(double sigma) { return sigma * 100.0; }

}  // namespace rydgate
