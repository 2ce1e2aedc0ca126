#pragma once

#include <cmath>
#include <utility>

#include "kita/errors.hpp"

namespace kita {

// One unloaded cell of the artificial line: series inductance l_d, total
// shunt capacitance c (split over the two finger resonators, c/2 each), and
// finger inductance l_f.
struct CellParams {
  double l_d;  // H per cell
  double c;    // F per cell
  double l_f;  // H per finger

  CellParams(double l_d_henry, double c_farad, double l_f_henry)
      : l_d(l_d_henry), c(c_farad), l_f(l_f_henry) {
    if (!(l_d > 0.0) || !(c > 0.0) || !(l_f > 0.0))
      throw DomainError("CellParams: all parameters must be strictly positive");
  }

  double impedance() const { return std::sqrt(l_d / c); }              // ohm
  double finger_resonance() const { return 1.0 / std::sqrt(l_f * c / 2.0); }  // rad/s
  double finger_q() const { return std::sqrt(l_f / (c / 2.0)) / impedance(); }
  double phase_velocity() const { return 1.0 / std::sqrt(l_d * c); }   // cells/s
};

// Periodic loading: each supercell is n_unloaded/2 plain cells, n_loaded
// impedance-loaded cells, then n_unloaded/2 plain cells again.
struct LoadingPattern {
  int n_unloaded;      // per supercell, must be even
  int n_loaded;        // per supercell
  double z_load;       // ohm
  double l_load;       // H, loaded-cell finger inductance
  int n_supercells;

  LoadingPattern(int n_u, int n_l, double z_l_ohm, double l_l_henry, int n_sc)
      : n_unloaded(n_u), n_loaded(n_l), z_load(z_l_ohm), l_load(l_l_henry),
        n_supercells(n_sc) {
    if (n_unloaded <= 0 || n_unloaded % 2 != 0)
      throw DomainError("LoadingPattern: n_unloaded must be positive and even");
    if (n_loaded < 0) throw DomainError("LoadingPattern: n_loaded must be >= 0");
    if (!(z_load > 0.0)) throw DomainError("LoadingPattern: z_load must be positive");
    if (!(l_load > 0.0)) throw DomainError("LoadingPattern: l_load must be positive");
    if (n_supercells <= 0) throw DomainError("LoadingPattern: n_supercells must be positive");
  }

  int cells_per_supercell() const { return n_unloaded + n_loaded; }
  long total_cells() const { return static_cast<long>(n_supercells) * cells_per_supercell(); }

  // loaded-cell capacitance to ground, c_l = l_d / z_load^2
  double loaded_capacitance(const CellParams& cell) const {
    return cell.l_d / (z_load * z_load);
  }
};

// epsilon = 2 i_dc / (i_star^2 + i_dc^2), xi = 1 / (i_star^2 + i_dc^2)
inline std::pair<double, double> nonlinearity_coefficients(double i_dc, double i_star) {
  if (!(i_star > 0.0)) throw DomainError("nonlinearity_coefficients: i_star must be positive");
  if (i_dc < 0.0 || i_dc >= i_star)
    throw DomainError("nonlinearity_coefficients: i_dc must satisfy 0 <= i_dc < i_star");
  double xi = 1.0 / (i_star * i_star + i_dc * i_dc);
  return {2.0 * i_dc * xi, xi};
}

// dc bias + rf pump working point
struct PumpDrive {
  double i_dc;       // A
  double i_star;     // A, nonlinearity scale current
  double i_pump;     // A, rf pump amplitude at the input
  double omega_pump; // rad/s

  PumpDrive(double i_dc_ampere, double i_star_ampere, double i_pump_ampere,
            double omega_pump_rad)
      : i_dc(i_dc_ampere), i_star(i_star_ampere), i_pump(i_pump_ampere),
        omega_pump(omega_pump_rad) {
    nonlinearity_coefficients(i_dc, i_star);  // validates i_dc, i_star
    if (i_pump < 0.0 || i_pump >= i_star)
      throw DomainError("PumpDrive: i_pump must satisfy 0 <= i_pump < i_star");
    if (!(omega_pump > 0.0)) throw DomainError("PumpDrive: omega_pump must be positive");
  }

  double epsilon() const { return nonlinearity_coefficients(i_dc, i_star).first; }  // 1/A
  double xi() const { return nonlinearity_coefficients(i_dc, i_star).second; }      // 1/A^2
  // relative inductance modulation amplitude from the rf pump
  double delta_l() const { return epsilon() * i_pump; }
};

// pump/signal/idler frequencies with omega_pump = omega_signal + omega_idler
// held exactly on the stored doubles
struct ToneTriplet {
  double omega_pump;
  double omega_signal;
  double omega_idler;

  static ToneTriplet from_pump_signal(double omega_p, double omega_s) {
    return ToneTriplet(omega_p, omega_s, omega_p - omega_s);
  }

  ToneTriplet(double omega_p, double omega_s, double omega_i)
      : omega_pump(omega_p), omega_signal(omega_s), omega_idler(omega_i) {
    if (!(omega_pump > 0.0) || !(omega_signal > 0.0) || !(omega_idler > 0.0))
      throw DomainError("ToneTriplet: all frequencies must be positive");
    if (omega_pump - omega_signal != omega_idler)
      throw DomainError("ToneTriplet: requires omega_pump == omega_signal + omega_idler");
  }
};

}  // namespace kita
