#pragma once

#include <numbers>

namespace spinnet {

inline constexpr double pi = std::numbers::pi;

// SI units; gyromagnetic ratios in rad s^-1 T^-1.
inline constexpr double hbar = 1.054571817e-34;
inline constexpr double mu0_over_4pi = 1e-7;
inline constexpr double k_B = 1.380649e-23;
inline constexpr double gamma_C = 2.0 * pi * 10.7084e6;
inline constexpr double gamma_e = 2.0 * pi * 28.024e9;

inline constexpr double angstrom = 1e-10;
inline constexpr double diamond_lattice_constant = 3.567; // Å

inline double hz_to_rad(double hz) { return 2.0 * pi * hz; }
inline double rad_to_hz(double w) { return w / (2.0 * pi); }

} // namespace spinnet
