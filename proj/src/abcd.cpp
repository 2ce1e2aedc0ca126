#include "kita/abcd.hpp"

#include <algorithm>
#include <cmath>

namespace kita {

void AbcdMatrix::normalize() {
  double mx = std::max(std::max(std::abs(a), std::abs(b)),
                       std::max(std::abs(c), std::abs(d)));
  if (mx > 1e100 || (mx > 0.0 && mx < 1e-100)) {
    a /= mx; b /= mx; c /= mx; d /= mx;
    log_scale += std::log(mx);
  }
}

AbcdMatrix AbcdMatrix::operator*(const AbcdMatrix& o) const {
  AbcdMatrix r;
  r.a = a * o.a + b * o.c;
  r.b = a * o.b + b * o.d;
  r.c = c * o.a + d * o.c;
  r.d = c * o.b + d * o.d;
  r.log_scale = log_scale + o.log_scale;
  r.normalize();
  return r;
}

cplx AbcdMatrix::det() const {
  return (a * d - b * c) * std::exp(2.0 * log_scale);
}

AbcdMatrix abcd_pow(AbcdMatrix base, long exponent) {
  if (exponent < 0) throw DomainError("abcd_pow: exponent must be >= 0");
  AbcdMatrix r = AbcdMatrix::identity();
  while (exponent) {
    if (exponent & 1) r = r * base;
    exponent >>= 1;
    if (exponent) base = base * base;
  }
  return r;
}

namespace {

AbcdMatrix resonator_loaded_cell(double omega, double l_series, double c_shunt,
                                 double l_finger, double pole_rel_tol) {
  if (!(omega > 0.0)) throw DomainError("cell abcd: omega must be positive");
  double pole = 2.0 - l_finger * c_shunt * omega * omega;
  double omega_pole = std::sqrt(2.0 / (l_finger * c_shunt));
  if (std::abs(omega - omega_pole) < pole_rel_tol * omega_pole)
    throw PoleError("cell abcd: frequency at the finger resonance pole");
  AbcdMatrix m;
  m.a = {1.0, 0.0};
  m.b = {0.0, l_series * omega};
  m.c = {0.0, 2.0 * c_shunt * omega / pole};
  m.d = {1.0 - 2.0 * l_series * c_shunt * omega * omega / pole, 0.0};
  return m;
}

}  // namespace

AbcdMatrix unloaded_cell_abcd(double omega, const CellParams& cell, double pole_rel_tol) {
  return resonator_loaded_cell(omega, cell.l_d, cell.c, cell.l_f, pole_rel_tol);
}

AbcdMatrix loaded_cell_abcd(double omega, const CellParams& cell,
                            const LoadingPattern& loading, double pole_rel_tol) {
  return resonator_loaded_cell(omega, cell.l_d, loading.loaded_capacitance(cell),
                               loading.l_load, pole_rel_tol);
}

AbcdMatrix supercell_abcd(double omega, const CellParams& cell,
                          const LoadingPattern& loading) {
  AbcdMatrix half = abcd_pow(unloaded_cell_abcd(omega, cell), loading.n_unloaded / 2);
  AbcdMatrix mid = abcd_pow(loaded_cell_abcd(omega, cell, loading), loading.n_loaded);
  return half * mid * half;
}

SParams abcd_to_sparams(const AbcdMatrix& m, double z0) {
  if (!(z0 > 0.0)) throw DomainError("abcd_to_sparams: z0 must be positive");
  cplx sum = m.a + m.b / z0 + m.c * z0 + m.d;
  cplx dif = m.a + m.b / z0 - m.c * z0 - m.d;
  SParams sp;
  sp.s11 = dif / sum;
  sp.s21_phase = std::arg(2.0 / sum);
  sp.s21_log_mag = std::log(2.0) - std::log(std::abs(sum)) - m.log_scale;
  sp.s21 = std::polar(std::exp(sp.s21_log_mag), sp.s21_phase);
  return sp;
}

AbcdMatrix line_abcd(double omega, const CellParams& cell,
                     const LoadingPattern* loading, long n) {
  if (n < 0) throw DomainError("line_abcd: cell count must be >= 0");
  if (loading) return abcd_pow(supercell_abcd(omega, cell, *loading), n);
  return abcd_pow(unloaded_cell_abcd(omega, cell), n);
}

SParams line_sparams(double omega, const CellParams& cell,
                     const LoadingPattern* loading, long n, double z0) {
  return abcd_to_sparams(line_abcd(omega, cell, loading, n), z0);
}

}  // namespace kita
