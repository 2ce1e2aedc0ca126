#pragma once

#include <numbers>

namespace kita {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// 2019 SI exact values
inline constexpr double k_boltzmann = 1.380649e-23;      // J/K
inline constexpr double q_electron = 1.602176634e-19;    // C
inline constexpr double h_planck = 6.62607015e-34;       // J s
inline constexpr double hbar = h_planck / two_pi;        // J s/rad

}  // namespace kita
