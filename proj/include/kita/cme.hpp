#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "kita/model.hpp"

namespace kita {

using cplx = std::complex<double>;

// pump/signal/idler complex amplitudes at position x (cells)
struct CmeState {
  double x = 0.0;
  cplx i_pump;
  cplx i_signal;
  cplx i_idler;
};

// frozen per-run wavenumbers (rad/cell)
struct Wavenumbers {
  double k_pump;
  double k_signal;
  double k_idler;

  double delta_k() const { return k_pump - k_signal - k_idler; }
};

// Right-hand side of the three-tone coupled-mode equations, in the frame
// where the e^{+-i delta_k x} factors are kept explicit:
//   dIp/dx = i kp eps/4 Is Ii e^{-i dk x} + i kp xi/8 Ip (|Ip|^2 + 2|Is|^2 + 2|Ii|^2)
//   dIs/dx = i ks eps/4 Ip Ii* e^{+i dk x} + i ks xi/8 Is (2|Ip|^2 + |Is|^2 + 2|Ii|^2)
//   dIi/dx = i ki eps/4 Ip Is* e^{+i dk x} + i ki xi/8 Ii (2|Ip|^2 + 2|Is|^2 + |Ii|^2)
std::array<cplx, 3> cme_rhs(const CmeState& state, const Wavenumbers& k,
                            double epsilon, double xi);

struct CmeControls {
  double rtol = 1e-9;
  double atol_scale = 1e-12;  // absolute tolerance = atol_scale * i_pump(0)
  int samples = 1000;         // evenly spaced output positions (plus x = 0)
  long max_steps = 20'000'000;
};

struct CmeSolution {
  std::vector<CmeState> trajectory;  // sampled, trajectory.front().x == 0
  Wavenumbers k;
  double epsilon = 0.0;
  double xi = 0.0;
  cplx i_pump0, i_signal0, i_idler0;
  std::vector<std::string> warnings;

  const CmeState& back() const { return trajectory.back(); }

  // photon-flux (Manley-Rowe) combinations; both are conserved by the CME
  double flux_difference(const CmeState& s) const;  // |Is|^2/ks - |Ii|^2/ki
  double flux_pump_signal(const CmeState& s) const; // |Ip|^2/kp + |Is|^2/ks
  double total_flux(const CmeState& s) const;

  // worst relative drift of the two invariants over the trajectory
  double manley_rowe_drift() const;

  double signal_power_gain() const;     // |Is(end)/Is(0)|^2
  double signal_power_gain_db() const;

  std::string to_csv() const;
};

// Adaptive Dormand-Prince 5(4) integration from x = 0 to x = n_cells.
// Output is sampled at `controls.samples` evenly spaced positions (the
// integrator lands on them exactly). Throws IntegrationError when the step
// size collapses; appends a warning when Manley-Rowe drift exceeds 1e-6.
CmeSolution integrate_cme(const Wavenumbers& k, double epsilon, double xi,
                          cplx i_pump0, cplx i_signal0, cplx i_idler0,
                          double n_cells, const CmeControls& controls = {});

// convenience: drive supplies epsilon/xi and the pump amplitude
CmeSolution integrate_cme(const PumpDrive& drive, const Wavenumbers& k,
                          cplx i_signal0, cplx i_idler0, double n_cells,
                          const CmeControls& controls = {});

// Phase-matched small-signal power gain, cosh^2(g3 x) with
// g3 = eps i_pump sqrt(ks ki) / 4.
double analytic_gain(const PumpDrive& drive, double k_signal, double k_idler,
                     double x_cells);

// Undepleted-pump solution of the strong-pump equations at arbitrary
// detuning delta_beta (testing branch; magnitudes only depend on |g|):
//   |Is(x)/Is0|^2 = |cosh(g x) - i (db/2g) sinh(g x)|^2,
//   g = sqrt(g3^2 - (db/2)^2)
double undepleted_gain(const PumpDrive& drive, double k_signal, double k_idler,
                       double delta_beta, double x_cells);

// delta_beta = dk + (xi ip0^2 / 8)(kp - 2 ks - 2 ki); phase matching <=> 0
double phase_mismatch(const Wavenumbers& k, double xi, double i_pump0);

}  // namespace kita
