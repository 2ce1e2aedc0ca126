#pragma once

#include <cmath>
#include <limits>

#include "kita/constants.hpp"
#include "kita/errors.hpp"

namespace kita {

// All internal quantities are SI base units. dB/dBm appear only at I/O
// boundaries, through the helpers below.

// Two power conventions are in circulation for a peak current amplitude I on
// an impedance Z: P = Z I^2 / 2 (half) and P = Z I^2 (full). The toolkit
// computes with `half` by default and accepts `full` where measured dBm
// values follow that scale.
enum class PowerConvention { half, full };

inline double amplitude_to_watt(double i_amp, double z_ohm,
                                PowerConvention pc = PowerConvention::half) {
  if (z_ohm <= 0.0) throw DomainError("amplitude_to_watt: impedance must be positive");
  if (i_amp < 0.0) throw DomainError("amplitude_to_watt: amplitude must be nonnegative");
  double p = z_ohm * i_amp * i_amp;
  return pc == PowerConvention::half ? 0.5 * p : p;
}

// 0 A maps to -inf dBm
inline double amplitude_to_dbm(double i_amp, double z_ohm,
                               PowerConvention pc = PowerConvention::half) {
  double p = amplitude_to_watt(i_amp, z_ohm, pc);
  if (p == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(p / 1e-3);
}

inline double dbm_to_amplitude(double dbm, double z_ohm,
                               PowerConvention pc = PowerConvention::half) {
  if (z_ohm <= 0.0) throw DomainError("dbm_to_amplitude: impedance must be positive");
  if (std::isinf(dbm) && dbm < 0.0) return 0.0;
  double p = 1e-3 * std::pow(10.0, dbm / 10.0);
  double i2 = (pc == PowerConvention::half ? 2.0 * p : p) / z_ohm;
  return std::sqrt(i2);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

// noise quanta at angular frequency w <-> equivalent temperature, T = N hbar w / kB
inline double quanta_to_kelvin(double n_quanta, double omega) {
  if (omega <= 0.0) throw DomainError("quanta_to_kelvin: omega must be positive");
  return n_quanta * hbar * omega / k_boltzmann;
}

inline double kelvin_to_quanta(double t_kelvin, double omega) {
  if (omega <= 0.0) throw DomainError("kelvin_to_quanta: omega must be positive");
  return t_kelvin * k_boltzmann / (hbar * omega);
}

// insertion loss (dB, >= 0) <-> transmission efficiency in (0, 1]
inline double il_to_efficiency(double il_db) {
  if (il_db < 0.0) throw DomainError("il_to_efficiency: insertion loss must be >= 0 dB");
  return std::pow(10.0, -il_db / 10.0);
}

inline double efficiency_to_il(double eta) {
  if (eta <= 0.0 || eta > 1.0) throw DomainError("efficiency_to_il: eta must be in (0, 1]");
  return -10.0 * std::log10(eta);
}

}  // namespace kita
