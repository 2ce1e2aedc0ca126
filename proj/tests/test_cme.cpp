#include <doctest.h>

#include <cmath>
#include <complex>

#include "kita/cme.hpp"
#include "kita/constants.hpp"
#include "kita/rng.hpp"

using namespace kita;

namespace {

Wavenumbers random_k(Rng& rng) {
  double ks = 0.005 + 0.05 * rng.uniform();
  double ki = 0.005 + 0.05 * rng.uniform();
  double kp = ks + ki + 0.01 * (rng.uniform() - 0.5);
  return {std::max(kp, 0.005), ks, ki};
}

cplx random_amp(Rng& rng, double scale) {
  return std::polar(scale * rng.uniform(), two_pi * rng.uniform());
}

}  // namespace

TEST_CASE("rhs with no seeds: only pump self-phase modulation survives") {
  Wavenumbers k{0.05, 0.026, 0.024};
  double eps = 58.5, xi = 19512.0;
  CmeState s{12.0, cplx(1e-4, 2e-5), cplx(0, 0), cplx(0, 0)};
  auto d = cme_rhs(s, k, eps, xi);
  CHECK(std::abs(d[1]) == 0.0);
  CHECK(std::abs(d[2]) == 0.0);
  cplx expect = cplx(0, 1) * k.k_pump * xi / 8.0 * s.i_pump * std::norm(s.i_pump);
  CHECK(std::abs(d[0] - expect) <= 1e-18);
}

TEST_CASE("rhs vanishes without nonlinearity") {
  Wavenumbers k{0.05, 0.026, 0.024};
  CmeState s{5.0, cplx(1e-4, 0), cplx(3e-6, 1e-6), cplx(-2e-6, 5e-7)};
  auto d = cme_rhs(s, k, 0.0, 0.0);
  CHECK(std::abs(d[0]) == 0.0);
  CHECK(std::abs(d[1]) == 0.0);
  CHECK(std::abs(d[2]) == 0.0);
}

TEST_CASE("rhs magnitude identities: photon-flux exchange rates") {
  // (1/kp) d|Ip|^2/dx = -(1/ks) d|Is|^2/dx = -(1/ki) d|Ii|^2/dx
  Rng rng(0x77);
  for (int t = 0; t < 50; t++) {
    Wavenumbers k = random_k(rng);
    double eps = 100.0 * rng.uniform();
    double xi = 30000.0 * rng.uniform();
    CmeState s{1000.0 * rng.uniform(), random_amp(rng, 2e-4), random_amp(rng, 1e-4),
               random_amp(rng, 1e-4)};
    auto d = cme_rhs(s, k, eps, xi);
    auto mag_rate = [](cplx amp, cplx damp) { return 2.0 * std::real(std::conj(amp) * damp); };
    double rp = mag_rate(s.i_pump, d[0]) / k.k_pump;
    double rs = mag_rate(s.i_signal, d[1]) / k.k_signal;
    double ri = mag_rate(s.i_idler, d[2]) / k.k_idler;
    double scale = std::abs(rp) + std::abs(rs) + std::abs(ri) + 1e-30;
    CHECK(std::abs(rp + rs) / scale < 1e-12);
    CHECK(std::abs(rs - ri) / scale < 1e-12);
  }
}

TEST_CASE("free propagation: zero nonlinearity keeps amplitudes frozen") {
  Wavenumbers k{0.05, 0.026, 0.024};
  CmeSolution sol = integrate_cme(k, 0.0, 0.0, cplx(1e-4, 0), cplx(1e-6, 1e-6),
                                  cplx(0, 2e-6), 50000.0, {});
  CHECK(std::abs(sol.back().i_pump - cplx(1e-4, 0)) < 1e-16);
  CHECK(std::abs(sol.back().i_signal - cplx(1e-6, 1e-6)) < 1e-18);
  CHECK(std::abs(sol.back().i_idler - cplx(0, 2e-6)) < 1e-18);
}

TEST_CASE("4WM-only runs preserve each magnitude individually") {
  Rng rng(0x44);
  for (int t = 0; t < 20; t++) {
    Wavenumbers k = random_k(rng);
    cplx p0 = random_amp(rng, 2e-4), s0 = random_amp(rng, 5e-5), i0 = random_amp(rng, 5e-5);
    CmeControls ctl;
    ctl.rtol = 1e-11;
    CmeSolution sol = integrate_cme(k, 0.0, 25000.0, p0, s0, i0, 20000.0, ctl);
    CHECK(std::abs(sol.back().i_pump) ==
          doctest::Approx(std::abs(p0)).epsilon(1e-9));
    CHECK(std::abs(sol.back().i_signal) ==
          doctest::Approx(std::abs(s0)).epsilon(1e-9));
    CHECK(std::abs(sol.back().i_idler) ==
          doctest::Approx(std::abs(i0)).epsilon(1e-9));
  }
}

TEST_CASE("manley-rowe invariants over random runs, with and without 4WM") {
  Rng rng(0x6060);
  for (int t = 0; t < 60; t++) {
    Wavenumbers k = random_k(rng);
    auto [eps, xi] = nonlinearity_coefficients(2e-3 * rng.uniform(),
                                               4e-3 + 6e-3 * rng.uniform());
    if (t % 2) xi = 0.0;
    cplx p0 = random_amp(rng, 2e-4);
    cplx s0 = random_amp(rng, 0.3 * std::abs(p0));
    cplx i0 = random_amp(rng, 0.3 * std::abs(p0));
    CmeControls ctl;
    ctl.rtol = 1e-10;
    ctl.samples = 16;
    CmeSolution sol = integrate_cme(k, eps, xi, p0, s0, i0,
                                    500.0 + 4000.0 * rng.uniform(), ctl);
    CHECK(sol.manley_rowe_drift() < 1e-8);
  }
}

TEST_CASE("undepleted phase-matched gain follows cosh up to 20 dB") {
  PumpDrive drive(1.5e-3, 7e-3, 7e-3 / 60.0, two_pi * 8.9e9);
  Wavenumbers k{0.026 + 0.024, 0.026, 0.024};  // dispersionless, delta_k = 0
  double g3 = drive.epsilon() * drive.i_pump * std::sqrt(k.k_signal * k.k_idler) / 4.0;
  double x20db = std::acosh(std::sqrt(100.0)) / g3;
  for (double frac : {0.25, 0.5, 0.75, 1.0}) {
    double x = frac * x20db;
    CmeSolution sol = integrate_cme(k, drive.epsilon(), 0.0,
                                    cplx(drive.i_pump, 0), cplx(drive.i_pump / 100.0, 0),
                                    cplx(0, 0), x, {});
    double expect = std::cosh(g3 * x) * drive.i_pump / 100.0;
    CHECK(std::abs(sol.back().i_signal) == doctest::Approx(expect).epsilon(1e-3));
  }
}

TEST_CASE("general undepleted solution matches the integrator off matching") {
  PumpDrive drive(1.5e-3, 7e-3, 7e-3 / 80.0, two_pi * 8.9e9);
  double ks = 0.0258, ki = 0.0241;
  for (double db : {0.0, 2e-5, 8e-5, -5e-5}) {
    Wavenumbers k{ks + ki + db, ks, ki};
    double delta_beta = phase_mismatch(k, 0.0, drive.i_pump);
    CHECK(delta_beta == doctest::Approx(db).epsilon(1e-12));
    CmeSolution sol = integrate_cme(k, drive.epsilon(), 0.0, cplx(drive.i_pump, 0),
                                    cplx(drive.i_pump * 1e-4, 0), cplx(0, 0), 40000.0, {});
    double g_num = sol.signal_power_gain();
    double g_ana = undepleted_gain(drive, ks, ki, delta_beta, 40000.0);
    CHECK(g_num == doctest::Approx(g_ana).epsilon(2e-3));
  }
}

TEST_CASE("integrator accuracy improves as the tolerance tightens") {
  PumpDrive drive(1.5e-3, 7e-3, 7e-3 / 60.0, two_pi * 8.9e9);
  Wavenumbers k{0.05, 0.0262, 0.0244};
  auto run = [&](double rtol) {
    CmeControls ctl;
    ctl.rtol = rtol;
    ctl.samples = 1;
    return integrate_cme(drive, k, cplx(drive.i_pump / 50.0, 0), cplx(0, 0), 30000.0, ctl);
  };
  CmeSolution ref = run(1e-13);
  double err_loose = std::abs(run(1e-6).back().i_signal - ref.back().i_signal);
  double err_tight = std::abs(run(1e-9).back().i_signal - ref.back().i_signal);
  CHECK(err_tight < err_loose);
  CHECK(err_tight < 1e-9 * std::abs(ref.back().i_signal) * 100);
}

TEST_CASE("trajectory finite differences agree with the rhs") {
  PumpDrive drive(1.5e-3, 7e-3, 7e-3 / 60.0, two_pi * 8.9e9);
  Wavenumbers k{0.05, 0.0262, 0.0244};
  CmeControls ctl;
  ctl.samples = 2000;
  CmeSolution sol = integrate_cme(drive, k, cplx(drive.i_pump / 20.0, 0), cplx(0, 0),
                                  10000.0, ctl);
  double dx = sol.trajectory[1].x - sol.trajectory[0].x;
  for (std::size_t i = 50; i + 1 < sol.trajectory.size(); i += 400) {
    const CmeState& mid = sol.trajectory[i];
    auto d = cme_rhs(mid, k, drive.epsilon(), drive.xi());
    cplx fd = (sol.trajectory[i + 1].i_signal - sol.trajectory[i - 1].i_signal) /
              (2.0 * dx);
    CHECK(std::abs(fd - d[1]) <= 1e-3 * (std::abs(d[1]) + 1e-12));
  }
}

TEST_CASE("analytic gain basics") {
  PumpDrive drive(1.5e-3, 7e-3, 1e-4, two_pi * 8.9e9);
  CHECK(analytic_gain(drive, 0.026, 0.024, 0.0) == 1.0);
  // quadratic pump dependence of the phase shift, zero at zero pump
  PumpDrive quiet(1.5e-3, 7e-3, 0.0, two_pi * 8.9e9);
  CHECK(analytic_gain(quiet, 0.026, 0.024, 1e5) == 1.0);
}

TEST_CASE("phase mismatch reductions") {
  // dispersionless k proportional to w and no pump: both terms vanish
  double c1 = 9.2e-13;
  double ws = two_pi * 4.1e9, wi = two_pi * 4.8e9;
  Wavenumbers k{c1 * (ws + wi), c1 * ws, c1 * wi};
  CHECK(phase_mismatch(k, 19512.0, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(phase_mismatch(k, 19512.0, 1.2e-4) -
                 (19512.0 * 1.2e-4 * 1.2e-4 / 8.0) * (k.k_pump - 2 * k.k_signal - 2 * k.k_idler))
        < 1e-18);
  Wavenumbers k2{0.05, 0.0262, 0.0244};
  CHECK(phase_mismatch(k2, 19512.0, 0.0) == doctest::Approx(k2.delta_k()).epsilon(1e-15));
}

TEST_CASE("integration errors carry the reached position") {
  Wavenumbers k{0.05, 0.026, 0.024};
  CmeControls ctl;
  ctl.max_steps = 3;
  try {
    integrate_cme(k, 58.5, 19512.0, cplx(1e-4, 0), cplx(1e-6, 0), cplx(0, 0), 66000.0, ctl);
    FAIL("expected IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(e.position >= 0.0);
    CHECK(e.position < 66000.0);
  }
}

TEST_CASE("solution csv header") {
  Wavenumbers k{0.05, 0.026, 0.024};
  CmeControls ctl;
  ctl.samples = 4;
  CmeSolution sol = integrate_cme(k, 0.0, 0.0, cplx(1e-4, 0), cplx(1e-6, 0), cplx(0, 0),
                                  100.0, ctl);
  CHECK(sol.to_csv().rfind("x_cells,re_ip,im_ip,re_is,im_is,re_ii,im_ii\n", 0) == 0);
  CHECK(sol.trajectory.size() == 5);
  CHECK(sol.trajectory.back().x == 100.0);
}
