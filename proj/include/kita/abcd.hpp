#pragma once

#include <complex>

#include "kita/model.hpp"

namespace kita {

using cplx = std::complex<double>;

// Two-port ABCD (chain) matrix. For the deep stopband the cascade entries
// overflow double range, so matrices carry a separate log-magnitude scale:
// the physical matrix is e^{log_scale} * [[a, b], [c, d]].
struct AbcdMatrix {
  cplx a{1.0, 0.0};
  cplx b{0.0, 0.0};  // ohm
  cplx c{0.0, 0.0};  // siemens
  cplx d{1.0, 0.0};
  double log_scale = 0.0;

  static AbcdMatrix identity() { return {}; }

  AbcdMatrix operator*(const AbcdMatrix& o) const;

  // determinant of the scaled matrix, det = (ad - bc) e^{2 log_scale};
  // reciprocity means det == 1 for every lossless network here
  cplx det() const;

  void normalize();  // move magnitude into log_scale when entries grow large
};

// matrix power by repeated squaring
AbcdMatrix abcd_pow(AbcdMatrix base, long exponent);

// Single unloaded cell at angular frequency omega:
//   [[1, i l_d w], [i 2 c w / (2 - l_f c w^2), 1 - 2 l_d c w^2 / (2 - l_f c w^2)]]
// Throws PoleError within `pole_rel_tol` (relative) of the finger resonance.
AbcdMatrix unloaded_cell_abcd(double omega, const CellParams& cell,
                              double pole_rel_tol = 1e-9);

// Loaded cell: same form with (c_l, l_load) in place of (c, l_f); series l_d
// is unchanged.
AbcdMatrix loaded_cell_abcd(double omega, const CellParams& cell,
                            const LoadingPattern& loading,
                            double pole_rel_tol = 1e-9);

// One supercell: n_unloaded/2 plain cells, n_loaded loaded cells, n_unloaded/2
// plain cells.
AbcdMatrix supercell_abcd(double omega, const CellParams& cell,
                          const LoadingPattern& loading);

// s21 is also reported as (phase, log magnitude) so deep-stopband values keep
// a usable phase after the cascade scaling.
struct SParams {
  cplx s11;
  cplx s21;
  double s21_phase;    // rad, principal value
  double s21_log_mag;  // ln |s21|

  double s21_mag() const { return std::exp(s21_log_mag); }
};

// S-parameters of a cascade ABCD between ports of impedance z0:
//   s21 = 2 / (A + B/z0 + C z0 + D)
SParams abcd_to_sparams(const AbcdMatrix& m, double z0);

// Full line: n supercells when loaded, n plain cells otherwise.
AbcdMatrix line_abcd(double omega, const CellParams& cell,
                     const LoadingPattern* loading, long n);

SParams line_sparams(double omega, const CellParams& cell,
                     const LoadingPattern* loading, long n, double z0);

inline cplx line_s21(double omega, const CellParams& cell,
                     const LoadingPattern* loading, long n, double z0) {
  return line_sparams(omega, cell, loading, n, z0).s21;
}

}  // namespace kita
