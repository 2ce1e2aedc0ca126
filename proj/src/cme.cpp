#include "kita/cme.hpp"

#include <algorithm>
#include <cmath>

#include "kita/constants.hpp"
#include "kita/errors.hpp"
#include "kita/io.hpp"

namespace kita {

std::array<cplx, 3> cme_rhs(const CmeState& s, const Wavenumbers& k,
                            double epsilon, double xi) {
  if (!(k.k_pump > 0.0) || !(k.k_signal > 0.0) || !(k.k_idler > 0.0))
    throw DomainError("cme_rhs: wavenumbers must be positive");
  const double p2 = std::norm(s.i_pump);
  const double s2 = std::norm(s.i_signal);
  const double i2 = std::norm(s.i_idler);
  const double dk = k.delta_k();
  const cplx ei_minus = std::polar(1.0, -dk * s.x);
  const cplx ei_plus = std::polar(1.0, dk * s.x);
  const cplx j(0.0, 1.0);
  return {
      j * k.k_pump * epsilon / 4.0 * s.i_signal * s.i_idler * ei_minus +
          j * k.k_pump * xi / 8.0 * s.i_pump * (p2 + 2.0 * s2 + 2.0 * i2),
      j * k.k_signal * epsilon / 4.0 * s.i_pump * std::conj(s.i_idler) * ei_plus +
          j * k.k_signal * xi / 8.0 * s.i_signal * (2.0 * p2 + s2 + 2.0 * i2),
      j * k.k_idler * epsilon / 4.0 * s.i_pump * std::conj(s.i_signal) * ei_plus +
          j * k.k_idler * xi / 8.0 * s.i_idler * (2.0 * p2 + 2.0 * s2 + i2),
  };
}

double CmeSolution::flux_difference(const CmeState& s) const {
  return std::norm(s.i_signal) / k.k_signal - std::norm(s.i_idler) / k.k_idler;
}

double CmeSolution::flux_pump_signal(const CmeState& s) const {
  return std::norm(s.i_pump) / k.k_pump + std::norm(s.i_signal) / k.k_signal;
}

double CmeSolution::total_flux(const CmeState& s) const {
  return std::norm(s.i_pump) / k.k_pump + std::norm(s.i_signal) / k.k_signal +
         std::norm(s.i_idler) / k.k_idler;
}

double CmeSolution::manley_rowe_drift() const {
  const CmeState& s0 = trajectory.front();
  double tot = total_flux(s0);
  if (tot <= 0.0) return 0.0;
  double d1 = flux_difference(s0), d2 = flux_pump_signal(s0);
  double worst = 0.0;
  for (const CmeState& s : trajectory) {
    worst = std::max(worst, std::abs(flux_difference(s) - d1) / tot);
    worst = std::max(worst, std::abs(flux_pump_signal(s) - d2) / tot);
  }
  return worst;
}

double CmeSolution::signal_power_gain() const {
  double s0 = std::norm(i_signal0);
  if (s0 == 0.0) throw DomainError("signal_power_gain: zero signal seed");
  return std::norm(trajectory.back().i_signal) / s0;
}

double CmeSolution::signal_power_gain_db() const {
  return 10.0 * std::log10(signal_power_gain());
}

std::string CmeSolution::to_csv() const {
  std::string s = "x_cells,re_ip,im_ip,re_is,im_is,re_ii,im_ii\n";
  for (const CmeState& st : trajectory) {
    s += format_double(st.x);
    s += ',';
    s += format_double(st.i_pump.real());
    s += ',';
    s += format_double(st.i_pump.imag());
    s += ',';
    s += format_double(st.i_signal.real());
    s += ',';
    s += format_double(st.i_signal.imag());
    s += ',';
    s += format_double(st.i_idler.real());
    s += ',';
    s += format_double(st.i_idler.imag());
    s += '\n';
  }
  return s;
}

namespace {

using Y = std::array<cplx, 3>;

Y axpy(const Y& y, double h, std::initializer_list<std::pair<double, const Y*>> terms) {
  Y r = y;
  for (const auto& [cc, kk] : terms)
    for (int i = 0; i < 3; i++) r[i] += h * cc * (*kk)[i];
  return r;
}

}  // namespace

CmeSolution integrate_cme(const Wavenumbers& k, double epsilon, double xi,
                          cplx i_pump0, cplx i_signal0, cplx i_idler0,
                          double n_cells, const CmeControls& controls) {
  if (!(n_cells >= 1.0)) throw DomainError("integrate_cme: n_cells must be >= 1");
  if (!(controls.rtol > 0.0) || !(controls.atol_scale > 0.0))
    throw DomainError("integrate_cme: tolerances must be positive");
  if (controls.samples < 1) throw DomainError("integrate_cme: samples must be >= 1");

  // Dormand-Prince 5(4) coefficients
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  CmeSolution sol;
  sol.k = k;
  sol.epsilon = epsilon;
  sol.xi = xi;
  sol.i_pump0 = i_pump0;
  sol.i_signal0 = i_signal0;
  sol.i_idler0 = i_idler0;
  sol.trajectory.reserve(controls.samples + 1);
  sol.trajectory.push_back({0.0, i_pump0, i_signal0, i_idler0});

  const double atol = controls.atol_scale * std::max(std::abs(i_pump0), 1e-300);
  Y y = {i_pump0, i_signal0, i_idler0};
  double x = 0.0;
  double h = n_cells / 100.0;
  long steps = 0;
  int next_sample = 1;
  double sample_dx = n_cells / controls.samples;

  auto rhs = [&](double xx, const Y& yy) {
    CmeState st{xx, yy[0], yy[1], yy[2]};
    return cme_rhs(st, k, epsilon, xi);
  };

  Y k1 = rhs(x, y);

  while (x < n_cells) {
    double x_target = std::min(n_cells, next_sample * sample_dx);
    bool hits_target = (x + h >= x_target);
    double h_try = hits_target ? x_target - x : h;

    const double hh = h_try;
    Y k2 = rhs(x + c2 * hh, axpy(y, hh, {{a21, &k1}}));
    Y k3 = rhs(x + c3 * hh, axpy(y, hh, {{a31, &k1}, {a32, &k2}}));
    Y k4 = rhs(x + c4 * hh, axpy(y, hh, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    Y k5 = rhs(x + c5 * hh, axpy(y, hh, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    Y k6 = rhs(x + hh, axpy(y, hh, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    Y y5 = axpy(y, hh, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    Y k7 = rhs(x + hh, y5);

    double err = 0.0;
    for (int i = 0; i < 3; i++) {
      cplx e = hh * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                     e7 * k7[i]);
      double sc = atol + controls.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
      err = std::max(err, std::abs(e) / sc);
    }

    if (err <= 1.0) {
      x = hits_target ? x_target : x + hh;
      y = y5;
      k1 = k7;  // FSAL
      for (int i = 0; i < 3; i++)
        if (!std::isfinite(y[i].real()) || !std::isfinite(y[i].imag()))
          throw IntegrationError("integrate_cme: non-finite state", x);
      if (hits_target) {
        sol.trajectory.push_back({x, y[0], y[1], y[2]});
        next_sample++;
      }
    }

    double grow = 0.9 * std::pow(std::max(err, 1e-12), -0.2);
    h = hh * std::clamp(grow, 0.2, 5.0);
    if (h < 1e-10 * n_cells)
      throw IntegrationError("integrate_cme: step size collapsed", x);
    if (++steps > controls.max_steps)
      throw IntegrationError("integrate_cme: step budget exhausted", x);
  }

  double drift = sol.manley_rowe_drift();
  if (drift > 1e-6)
    sol.warnings.push_back("Manley-Rowe drift " + format_double(drift) +
                           " exceeds 1e-6; tighten tolerances");
  return sol;
}

CmeSolution integrate_cme(const PumpDrive& drive, const Wavenumbers& k,
                          cplx i_signal0, cplx i_idler0, double n_cells,
                          const CmeControls& controls) {
  return integrate_cme(k, drive.epsilon(), drive.xi(), cplx(drive.i_pump, 0.0),
                       i_signal0, i_idler0, n_cells, controls);
}

double analytic_gain(const PumpDrive& drive, double k_signal, double k_idler,
                     double x_cells) {
  if (!(k_signal > 0.0) || !(k_idler > 0.0))
    throw DomainError("analytic_gain: wavenumbers must be positive");
  double g3 = drive.epsilon() * drive.i_pump * std::sqrt(k_signal * k_idler) / 4.0;
  double ch = std::cosh(g3 * x_cells);
  return ch * ch;
}

double undepleted_gain(const PumpDrive& drive, double k_signal, double k_idler,
                       double delta_beta, double x_cells) {
  if (!(k_signal > 0.0) || !(k_idler > 0.0))
    throw DomainError("undepleted_gain: wavenumbers must be positive");
  double g3 = drive.epsilon() * drive.i_pump * std::sqrt(k_signal * k_idler) / 4.0;
  cplx g = std::sqrt(cplx(g3 * g3 - 0.25 * delta_beta * delta_beta, 0.0));
  if (std::abs(g) < 1e-300) {  // degenerate g -> 0 limit: Is = (1 - i db x / 2) Is0
    double u = 0.5 * delta_beta * x_cells;
    return 1.0 + u * u;
  }
  cplx ch = std::cosh(g * x_cells);
  cplx sh = std::sinh(g * x_cells);
  cplx amp = ch - cplx(0.0, 0.5 * delta_beta) / g * sh;
  return std::norm(amp);
}

double phase_mismatch(const Wavenumbers& k, double xi, double i_pump0) {
  return k.delta_k() +
         xi * i_pump0 * i_pump0 / 8.0 * (k.k_pump - 2.0 * k.k_signal - 2.0 * k.k_idler);
}

}  // namespace kita
