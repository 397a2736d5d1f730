#pragma once

#include <numbers>

namespace nvsense::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// gyromagnetic ratios, rad s^-1 T^-1
inline constexpr double gamma_e = 1.760859e11;
inline constexpr double gamma_h = 2.675222e8;
inline constexpr double gamma_c13 = 6.728284e7;

inline constexpr double hbar = 1.054571817e-34;  // J s
inline constexpr double mu0_over_4pi = 1e-7;     // T m / A

// NV axis relative to the surface normal of a (100)-cut crystal: acos(1/sqrt(3))
inline constexpr double nv_axis_tilt_rad = 0.9553166181245093;

inline constexpr double c13_natural_abundance = 0.0107;

inline constexpr double gauss_to_tesla = 1e-4;
inline constexpr double us = 1e-6;
inline constexpr double nm = 1e-9;

}  // namespace nvsense::constants
