#pragma once

#include <numbers>

// CODATA 2018 (SI-exact where defined).
namespace resokit::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double planck = 6.62607015e-34;           // J s
inline constexpr double hbar = planck / (2.0 * pi);         // J s
inline constexpr double boltzmann = 1.380649e-23;           // J/K
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double mu0 = 1.25663706212e-6;             // H/m
inline constexpr double epsilon0 = 8.8541878128e-12;        // F/m
inline constexpr double flux_quantum = planck / (2.0 * elementary_charge);  // Wb

/// BCS weak-coupling ratio Delta / (k_B T_c).
inline constexpr double bcs_gap_ratio = 1.76;

}  // namespace resokit::constants
