// Acceptance suite: one line per criterion, nonzero exit when any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "kita/analysis.hpp"
#include "kita/config.hpp"
#include "kita/constants.hpp"
#include "kita/fit.hpp"
#include "kita/io.hpp"
#include "kita/rng.hpp"

using namespace kita;

namespace {

struct Checker {
  int failed = 0;
  int current = 0;
  bool current_ok = true;
  std::vector<std::string> lines;

  void begin(int n) { current = n; current_ok = true; }
  void item(bool ok, const std::string& detail) {
    std::printf("  %s  %s\n", ok ? "[ok]  " : "[FAIL]", detail.c_str());
    if (!ok) current_ok = false;
  }
  void end(const std::string& title) {
    std::printf("%s criterion %d: %s\n", current_ok ? "[PASS]" : "[FAIL]", current,
                title.c_str());
    if (!current_ok) failed++;
  }
};

double sec_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

NoiseChain ref_chain() {
  return NoiseChain(0.57, 0.57, 0.64, std::pow(10.0, 1.66), std::pow(10.0, 3.5),
                    1e5, 8.0, 0.385, 0.385);
}

}  // namespace

int main() {
  std::printf("kita acceptance suite\n=====================\n");
  Checker ck;

  // shared fixtures: the reproduction line from the shipped preset
  std::filesystem::path preset_dir = std::filesystem::path(KITA_PRESET_DIR) / "paper";
  RunConfig prof_cfg = load_config(preset_dir / "gain_profile.json");
  RunConfig nomatch_cfg = load_config(preset_dir / "gain_profile_nomatch.json");
  DispersionOptions grid = prof_cfg.grid;
  grid.threads = 2;
  auto t0 = std::chrono::steady_clock::now();
  DispersionTable table =
      build_dispersion(*prof_cfg.cell, prof_cfg.loading, prof_cfg.n_cells, grid);
  std::printf("[setup] dispersion table: %zu points in %.2f s, stopband %.4f GHz\n",
              table.freq_hz().size(), sec_since(t0),
              table.stopband_center_hz().value_or(0.0) / 1e9);

  // ---------------------------------------------------------------- 1
  ck.begin(1);
  {
    PumpDrive drive(1.5e-3, 7e-3, 7e-3 / 60.0, two_pi * 8.9e9);
    Wavenumbers k{0.026 + 0.024, 0.026, 0.024};  // delta_k = 0 by construction
    double g3 = drive.epsilon() * drive.i_pump * std::sqrt(k.k_signal * k.k_idler) / 4.0;
    bool all_ok = true;
    double worst = 0.0, slowest = 0.0;
    for (double target_db : {5.0, 10.0, 15.0, 20.0}) {
      double x = std::acosh(std::pow(10.0, target_db / 20.0)) / g3;
      auto tp = std::chrono::steady_clock::now();
      CmeSolution sol = integrate_cme(k, drive.epsilon(), 0.0, cplx(drive.i_pump, 0),
                                      cplx(drive.i_pump * 1e-4, 0), cplx(0, 0), x, {});
      double dt = sec_since(tp);
      double diff = std::abs(sol.signal_power_gain_db() -
                             10.0 * std::log10(analytic_gain(drive, k.k_signal,
                                                             k.k_idler, x)));
      worst = std::max(worst, diff);
      slowest = std::max(slowest, dt);
      if (diff > 0.1 || dt > 1.0) all_ok = false;
    }
    ck.item(all_ok, fmt("numeric vs cosh^2 up to 20 dB: worst |diff| = %.2e dB, "
                        "slowest point %.3f s", worst, slowest));
  }
  ck.end("analytic-vs-numeric gain (undepleted, matched, xi = 0)");

  // ---------------------------------------------------------------- 2
  ck.begin(2);
  {
    // delta_l pinned to 6.8e-3, k_p from the printed cell values at 8.9 GHz
    double eps = nonlinearity_coefficients(1.5e-3, 7e-3).first;
    PumpDrive drive(1.5e-3, 7e-3, 6.8e-3 / eps, two_pi * 8.9e9);
    double kp = two_pi * 8.9e9 * std::sqrt(45.2e-12 * 18.8e-15);
    auto gs_db = [&](double n_cells) {
      return 10.0 * std::log10(analytic_gain(drive, kp / 2, kp / 2, n_cells));
    };
    double g66 = gs_db(66000.0);
    ck.item(std::abs(g66 - 19.1) <= 0.2,
            fmt("closed form at n_cells = 6.6e4: %.2f dB (want 19.1 +- 0.2)", g66));
    // the published statement is a necessity bound: 15 dB needs more cells than 5e4
    double g3 = drive.delta_l() * kp / 8.0;
    double n_threshold = std::acosh(std::pow(10.0, 15.0 / 20.0)) / g3;
    ck.item(n_threshold > 5e4,
            fmt("cells needed for 15 dB: %.3g (> 5e4: necessity bound holds)",
                n_threshold));
    double g50 = gs_db(50000.0);
    // literal acceptance clause; with the 19.1 dB pin at 6.6e4 cells the same
    // cosh^2 form sits near 13 dB at 5e4 cells, so this records the gap
    ck.item(g50 > 15.0, fmt("literal clause G(5e4) > 15 dB: computed %.2f dB", g50));
  }
  ck.end("reference gain magnitude (closed form)");

  // ---------------------------------------------------------------- 3
  ck.begin(3);
  {
    const PumpDrive& base = *prof_cfg.drive;
    auto grid201 = linspace(prof_cfg.signal_start_hz, prof_cfg.signal_stop_hz,
                            prof_cfg.signal_points);
    double step_hz = grid201[1] - grid201[0];
    SweepOptions so{prof_cfg.rtol, prof_cfg.atol_scale, 2};
    const double targets[4] = {0.0, 1.0e9, 1.5e9, 2.0e9};
    auto sweep_t0 = std::chrono::steady_clock::now();
    for (std::size_t ip = 0; ip < prof_cfg.pumps_hz.size(); ip++) {
      double fp = prof_cfg.pumps_hz[ip];
      PumpDrive drive(base.i_dc, base.i_star, base.i_pump, two_pi * fp);
      auto pairs = find_phase_matched_pairs(two_pi * fp, drive, table);
      bool det_ok = false;
      double got = -1.0;
      for (const auto& pr : pairs) {
        if (std::abs(pr.detuning_hz - targets[ip]) <= 50e6) det_ok = true;
        got = pr.detuning_hz;
      }
      ck.item(det_ok, fmt("pump %.4f GHz: detuning %.3f GHz (target %.1f +- 0.05)",
                          fp / 1e9, got / 1e9, targets[ip] / 1e9));

      GainProfile prof = gain_profile(drive, table, grid201, prof_cfg.seed_ratio, so);
      // literal clause: every matched pair has a profile maximum within one
      // grid step. The lobes genuinely peak 50-150 MHz inside the matched
      // frequencies (the g3 = eps ip0 sqrt(ks ki)/4 gradient pulls the
      // optimum toward the half pump), so this records the measured offsets.
      bool maxima_ok = true;
      double worst_off = 0.0;
      for (const auto& pr : pairs) {
        for (double froot : {pr.omega_signal / two_pi, pr.omega_idler / two_pi}) {
          if (froot < grid201.front() || froot > grid201.back()) continue;
          double best = 1e300;
          for (std::size_t i = 1; i + 1 < prof.points.size(); i++) {
            if (prof.points[i].gain_db >= prof.points[i - 1].gain_db &&
                prof.points[i].gain_db >= prof.points[i + 1].gain_db)
              best = std::min(best, std::abs(prof.points[i].freq_hz - froot));
          }
          worst_off = std::max(worst_off, best);
          if (best > step_hz * 1.01) maxima_ok = false;
        }
      }
      ck.item(maxima_ok,
              fmt("pump %.4f GHz: maxima within one grid step of the matched pairs "
                  "(worst offset %.0f MHz vs step 20 MHz)", fp / 1e9, worst_off / 1e6));
      if (ip == 0) {
        double peak = -1e300;
        for (const auto& pt : prof.points) peak = std::max(peak, pt.gain_db);
        ck.item(peak > 16.0 && peak < 20.0,
                fmt("flat-top pump: peak gain %.2f dB (expect 16..20)", peak));
      }
    }
    double sweep_dt = sec_since(sweep_t0);
    ck.item(sweep_dt < 300.0, fmt("four 201-point profile sweeps in %.1f s (< 300 s)",
                                  sweep_dt));

    // no-match pump: no roots, collapsed profile
    double fp = nomatch_cfg.pumps_hz.front();
    PumpDrive drive(base.i_dc, base.i_star, base.i_pump, two_pi * fp);
    auto pairs = find_phase_matched_pairs(two_pi * fp, drive, table);
    ck.item(pairs.empty(), fmt("pump %.4f GHz: phase matching nowhere satisfied "
                               "(%g pairs found)", fp / 1e9, (double)pairs.size()));
    GainProfile prof = gain_profile(drive, table, grid201, nomatch_cfg.seed_ratio, so);
    double mean = prof.mean_gain_db();
    // literal clause; in this model family the 8.855 GHz hump cannot drop
    // below 3 dB while the four matched pumps stay put
    ck.item(mean < 3.0, fmt("literal clause: mean gain at 8.855 GHz = %.2f dB (< 3)",
                            mean));
    // module invariant: pumps well below the matching threshold collapse
    PumpDrive low(base.i_dc, base.i_star, base.i_pump, two_pi * 8.80e9);
    GainProfile prof_low = gain_profile(low, table, grid201, nomatch_cfg.seed_ratio, so);
    ck.item(prof_low.mean_gain_db() < 3.0,
            fmt("profile collapse below threshold: mean gain at 8.80 GHz = %.2f dB",
                prof_low.mean_gain_db()));
  }
  ck.end("four-pump phase-matching reproduction");

  // ---------------------------------------------------------------- 4
  ck.begin(4);
  {
    Rng rng(0x4d52);
    double worst = 0.0;
    int bad = 0;
    for (int t = 0; t < 1000; t++) {
      double ks = 0.005 + 0.05 * rng.uniform();
      double ki = 0.005 + 0.05 * rng.uniform();
      double kp = std::max(ks + ki + 0.01 * (rng.uniform() - 0.5), 0.005);
      Wavenumbers k{kp, ks, ki};
      auto [eps, xi] = nonlinearity_coefficients(2e-3 * rng.uniform(),
                                                 4e-3 + 6e-3 * rng.uniform());
      if (t % 2) xi = 0.0;  // with and without 4WM terms
      cplx p0 = std::polar(2e-4 * (0.2 + 0.8 * rng.uniform()), two_pi * rng.uniform());
      cplx s0 = std::polar(0.3 * std::abs(p0) * rng.uniform(), two_pi * rng.uniform());
      cplx i0 = std::polar(0.3 * std::abs(p0) * rng.uniform(), two_pi * rng.uniform());
      CmeControls ctl;
      ctl.rtol = 1e-10;
      ctl.atol_scale = 1e-13;
      ctl.samples = 8;
      CmeSolution sol =
          integrate_cme(k, eps, xi, p0, s0, i0, 500.0 + 4000.0 * rng.uniform(), ctl);
      double drift = sol.manley_rowe_drift();
      worst = std::max(worst, drift);
      if (drift > 1e-8) bad++;
    }
    ck.item(bad == 0, fmt("1000 randomized integrations: worst flux drift %.2e "
                          "(tolerance 1e-8), %g violations", worst, (double)bad));
  }
  ck.end("Manley-Rowe conservation");

  // ---------------------------------------------------------------- 5
  ck.begin(5);
  {
    RunConfig asym_cfg = load_config(preset_dir / "asymmetry.json");
    const PumpDrive& drive = *asym_cfg.drive;
    // tilt metric at +-1 GHz for the four seed levels
    AsymmetryDiagnostic diag = asymmetry_diagnostic(
        drive, table, linspace(3.2e9, 5.8e9, 9), asym_cfg.seed_ratios,
        asym_cfg.tilt_delta_hz, {asym_cfg.rtol, asym_cfg.atol_scale, 2});
    ck.item(std::abs(diag.tilt_db[0]) < 0.05,
            fmt("small-signal tilt (seed i_p0/100): %+.4f dB (|.| < 0.05)",
                diag.tilt_db[0]));
    bool pos = diag.tilt_db[1] > 0 && diag.tilt_db[2] > 0 && diag.tilt_db[3] > 0;
    ck.item(pos, fmt("tilt positive at i_p0/12, /8, /6: %+.3f, %+.3f, %+.3f dB",
                     diag.tilt_db[1], diag.tilt_db[2], diag.tilt_db[3]));
    bool mono = diag.tilt_db[0] < diag.tilt_db[1] && diag.tilt_db[1] < diag.tilt_db[2] &&
                diag.tilt_db[2] < diag.tilt_db[3];
    ck.item(mono, "tilt grows monotonically with the seed level");

    RunConfig comp_cfg = load_config(preset_dir / "compression.json");
    CompressionOptions copt;
    copt.convention = comp_cfg.convention;
    copt.threads = 2;
    auto powers = linspace(comp_cfg.probe_dbm_start, comp_cfg.probe_dbm_stop,
                           comp_cfg.probe_points);
    double half = drive.omega_pump / two_pi / 2.0;
    CompressionCurve below = compression_curve(drive, table, half - 1e9, powers, copt);
    CompressionCurve above = compression_curve(drive, table, half + 1e9, powers, copt);
    ck.item(above.p1db_dbm > below.p1db_dbm,
            fmt("p1db above half pump %.2f dBm > below %.2f dBm", above.p1db_dbm,
                below.p1db_dbm));
    CompressionCurve center = compression_curve(drive, table, half, powers, copt);
    double i_seed = dbm_to_amplitude(center.p1db_dbm, copt.z0, copt.convention);
    Wavenumbers k{table.k_at(drive.omega_pump), table.k_at(two_pi * half),
                  table.k_at(drive.omega_pump - two_pi * half)};
    CmeSolution sol = integrate_cme(drive, k, cplx(i_seed, 0), cplx(0, 0),
                                    double(table.n_cells()), {});
    double resid = std::abs(sol.signal_power_gain_db() -
                            (center.small_signal_gain_db - 1.0));
    ck.item(resid < 0.15, fmt("bisection self-consistency at half pump: p1db %.2f dBm, "
                              "gain residual %.3f dB", center.p1db_dbm, resid));
    // the measured -63 dBm is known to sit about 7 dB below this model value
    double gap = center.p1db_dbm - (-63.0);
    ck.item(gap > 5.5 && gap < 8.5,
            fmt("model sits %.1f dB above the measured -63 dBm (expect ~7)", gap));
  }
  ck.end("saturation asymmetry and compression ordering");

  // ---------------------------------------------------------------- 6
  ck.begin(6);
  {
    Rng rng(0x6666);
    double worst_rel = 0.0;
    for (int t = 0; t < 1000; t++) {
      NoiseChain c(0.2 + 0.8 * rng.uniform(), 0.2 + 0.8 * rng.uniform(),
                   0.2 + 0.8 * rng.uniform(), 1.0 + 300.0 * rng.uniform(),
                   1.0 + 3000.0 * rng.uniform(), 1.0 + 1e5 * rng.uniform(),
                   20.0 * rng.uniform(), 2.0 * rng.uniform(), 2.0 * rng.uniform());
      double ns = 0.5 + 30.0 * rng.uniform();
      double ni = 0.5 + 30.0 * rng.uniform();
      double a = chain_output_noise_staged(c, ns, ni);
      double b = chain_output_noise(c, ns, ni);
      worst_rel = std::max(worst_rel, std::abs(a - b) / std::abs(a));
    }
    ck.item(worst_rel <= 1e-12,
            fmt("staged vs closed form over 1000 chains: worst rel diff %.2e",
                worst_rel));

    double worst_gap = 0.0;
    for (int t = 0; t < 200; t++) {
      NoiseChain c(0.2 + 0.8 * rng.uniform(), 0.2 + 0.8 * rng.uniform(),
                   0.2 + 0.8 * rng.uniform(), 100.0 + 9900.0 * rng.uniform(),
                   3000.0, 1e5, 5.0 + 15.0 * rng.uniform(), 2.0 * rng.uniform(),
                   2.0 * rng.uniform());
      SystemNoise sn = system_added_noise(c);
      worst_gap = std::max(worst_gap, std::abs(sn.simplified - sn.exact) / sn.exact);
    }
    ck.item(worst_gap < 0.02,
            fmt("exact vs simplified: worst gap %.3f%% at gain >= 100 (< 2%%)",
                100.0 * worst_gap));
    double prev = 1e300;
    bool mono = true;
    for (double g : {10.0, 100.0, 1000.0, 10000.0}) {
      NoiseChain c(0.57, 0.57, 0.64, g, 3000.0, 1e5, 8.0, 0.385, 0.385);
      SystemNoise sn = system_added_noise(c);
      double gap = std::abs(sn.simplified - sn.exact) / sn.exact;
      if (gap >= prev) mono = false;
      prev = gap;
    }
    ck.item(mono, "gap shrinks monotonically over gain = 10..1e4");
  }
  ck.end("noise-model consistency");

  // ---------------------------------------------------------------- 7
  ck.begin(7);
  {
    NoiseChain c = ref_chain();
    SystemNoise sn = system_added_noise(c);
    ck.item(std::abs(sn.simplified - 3.1) <= 0.1,
            fmt("system-added noise: %.3f quanta (want 3.1 +- 0.1)", sn.simplified));
    double hemt_term = c.hemt_noise / (c.eta2 * c.kit_gain * c.eta1_signal);
    ck.item(std::abs(hemt_term - 0.5) <= 0.05,
            fmt("HEMT contribution: %.3f quanta (want 0.5 +- 0.05)", hemt_term));
    double eta = std::pow(10.0, -4.3 / 10.0);
    double nsp = hemt_only_noise(0.57, eta / 0.57, 8.0);
    double tsp = quanta_to_kelvin(nsp, two_pi * 4.5e9);
    ck.item(std::abs(tsp - 5.1) <= 1.4,
            fmt("KIT-off system temperature: %.2f K (want 5.1 +- 1.4)", tsp));
    double nh = hemt_noise_from_system(kelvin_to_quanta(5.1, two_pi * 4.5e9), eta);
    ck.item(std::abs(nh - 8.0) <= 1.0,
            fmt("HEMT noise recovered from 5.1 K: %.2f quanta (want 8 +- 1)", nh));
  }
  ck.end("reference noise numbers");

  // ---------------------------------------------------------------- 8
  ck.begin(8);
  {
    NoiseChain c = ref_chain();
    SystemNoise sn = system_added_noise(c);
    auto grid2000 = default_bias_grid(2000, 6.48e-4);
    SntjSweep clean = simulate_sweep(c, grid2000, 0.03, two_pi * 4.5e9,
                                     two_pi * 4.3812e9, 1.3e-5, 0.0, 0);
    auto tp = std::chrono::steady_clock::now();
    FitResult r = fit_sweep(clean);
    double fit_dt = sec_since(tp);
    double worst = std::abs(r.gain_ss / c.gain_ss() - 1.0);
    worst = std::max(worst, std::abs(r.gain_si / c.gain_si() - 1.0));
    worst = std::max(worst, std::abs(r.v_offset / 1.3e-5 - 1.0));
    worst = std::max(worst, std::abs(r.temp_kelvin / 0.03 - 1.0));
    worst = std::max(worst, std::abs(r.n_sigma / sn.exact - 1.0));
    ck.item(worst <= 1e-6,
            fmt("noiseless round trip: worst parameter error %.2e (<= 1e-6)", worst));
    ck.item(fit_dt < 10.0, fmt("fit runtime %.3f s per sweep (< 10 s)", fit_dt));

    int within = 0;
    double sum_rel = 0.0, worst_rel = 0.0;
    const int n_seeds = 100;
    for (int s = 0; s < n_seeds; s++) {
      SntjSweep sw = simulate_sweep(c, grid2000, 0.03, two_pi * 4.5e9,
                                    two_pi * 4.3812e9, 1.3e-5, 0.05, 1000 + s);
      FitResult rr = fit_sweep(sw);
      double rel = std::abs(rr.n_sigma / sn.exact - 1.0);
      sum_rel += rel;
      worst_rel = std::max(worst_rel, rel);
      if (rel <= 0.05) within++;
    }
    ck.item(within == n_seeds && sum_rel / n_seeds < 0.025,
            fmt("monte carlo, sigma = 0.05, 100 seeds: %g/100 within 5%%, "
                "mean %.2f%%, worst %.2f%%", (double)within, 100.0 * sum_rel / n_seeds,
                100.0 * worst_rel));
  }
  ck.end("fit round trip");

  // ---------------------------------------------------------------- 9
  ck.begin(9);
  {
    NoiseChain c = ref_chain();
    SntjSweep sw = simulate_sweep(c, default_bias_grid(2000, 6.48e-4), 0.03,
                                  two_pi * 4.5e9, two_pi * 4.3812e9, 1.3e-5, 0.0, 0);
    FitResult full = fit_sweep(sw);
    NaiveFitResult naive = naive_fit(sw);
    double excess_db = 10.0 * std::log10(naive.gain / full.gain_ss);
    ck.item(std::abs(excess_db - 3.0) <= 0.5,
            fmt("naive gain sits %.2f dB above the true chain gain (want ~3)",
                excess_db));
    double ratio = naive.system_noise / full.n_sigma;
    ck.item(ratio > 0.35 && ratio < 0.55,
            fmt("naive system noise %.2f vs true %.2f quanta (ratio %.2f, want ~0.5)",
                naive.system_noise, full.n_sigma, ratio));
    std::string report = fit_comparison_json(full, naive);
    ck.item(report.find("naive_idler_discarded") != std::string::npos,
            "side-by-side comparison report generated");
  }
  ck.end("idler-discard pitfall");

  // ---------------------------------------------------------------- 10
  ck.begin(10);
  {
    RunConfig cfg = load_config(preset_dir / "loss_budget.json");
    LossBudget b = loss_budget(*cfg.losses, cfg.chain_signal_hz, cfg.chain_idler_hz);
    ck.item(std::abs(b.eta1_signal - 0.57) <= 0.01,
            fmt("eta1(signal) = %.4f (want 0.57 +- 0.01)", b.eta1_signal));
    ck.item(std::abs(b.eta2 - 0.64) <= 0.02, fmt("eta2 = %.4f (want 0.64 +- 0.02)",
                                                 b.eta2));
    double t_k = quanta_to_kelvin(3.1, two_pi * 4.5e9);
    ck.item(std::abs(t_k - 0.67) <= 0.005,
            fmt("3.1 quanta at 4.5 GHz = %.4f K (want 0.67)", t_k));
  }
  ck.end("loss budget and unit conversion");

  std::printf("=====================\n%d of 10 criteria failed\n", ck.failed);
  return ck.failed;
}
