#include "kita/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "kita/constants.hpp"
#include "kita/io.hpp"
#include "kita/parallel.hpp"
#include "kita/units.hpp"

namespace kita {

std::size_t GainProfile::failed_count() const {
  std::size_t n = 0;
  for (const auto& p : points) n += p.ok ? 0 : 1;
  return n;
}

double GainProfile::mean_gain_db() const {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& p : points)
    if (p.ok) { s += p.gain_db; n++; }
  if (n == 0) throw DomainError("mean_gain_db: no successful points");
  return s / n;
}

double GainProfile::gain_at_db(double freq_hz) const {
  const GainPoint* best = nullptr;
  for (const auto& p : points) {
    if (!p.ok) continue;
    if (!best || std::abs(p.freq_hz - freq_hz) < std::abs(best->freq_hz - freq_hz))
      best = &p;
  }
  if (!best) throw DomainError("gain_at_db: no successful points");
  return best->gain_db;
}

std::string GainProfile::to_csv() const {
  std::string s = "freq_hz,gain_db\n";
  for (const auto& p : points) {
    if (!p.ok) continue;
    s += format_double(p.freq_hz);
    s += ',';
    s += format_double(p.gain_db);
    s += '\n';
  }
  return s;
}

std::vector<double> linspace(double start, double stop, int n) {
  if (n < 2 || !(stop > start)) throw DomainError("linspace: need n >= 2 and stop > start");
  std::vector<double> v(n);
  double step = (stop - start) / (n - 1);
  for (int i = 0; i < n; i++) v[i] = start + step * i;
  return v;
}

GainProfile gain_profile(const PumpDrive& drive, const DispersionTable& dispersion,
                         const std::vector<double>& signal_grid_hz, double seed_ratio,
                         const SweepOptions& opt) {
  if (signal_grid_hz.empty()) throw DomainError("gain_profile: empty signal grid");
  if (!(seed_ratio > 0.0)) throw DomainError("gain_profile: seed_ratio must be positive");

  double kp = dispersion.k_at(drive.omega_pump);
  GainProfile prof{{}, drive, seed_ratio, drive.omega_pump / 2.0 / two_pi};
  prof.points.resize(signal_grid_hz.size());

  CmeControls ctl;
  ctl.rtol = opt.rtol;
  ctl.atol_scale = opt.atol_scale;
  ctl.samples = 1;

  parallel_for(signal_grid_hz.size(), opt.threads, [&](std::size_t i) {
    GainPoint& pt = prof.points[i];
    pt.freq_hz = signal_grid_hz[i];
    try {
      double ws = two_pi * pt.freq_hz;
      double wi = drive.omega_pump - ws;
      Wavenumbers k{kp, dispersion.k_at(ws), dispersion.k_at(wi)};
      cplx seed(seed_ratio * drive.i_pump, 0.0);
      CmeSolution sol = integrate_cme(drive, k, seed, cplx(0.0, 0.0),
                                      double(dispersion.n_cells()), ctl);
      pt.gain_db = sol.signal_power_gain_db();
      pt.ok = true;
    } catch (const Error& e) {
      pt.ok = false;
      pt.error = e.what();
    }
  });
  return prof;
}

double delta_beta_at(double omega_pump, double omega_signal, const PumpDrive& drive,
                     const DispersionTable& dispersion) {
  Wavenumbers k{dispersion.k_at(omega_pump), dispersion.k_at(omega_signal),
                dispersion.k_at(omega_pump - omega_signal)};
  return phase_mismatch(k, drive.xi(), drive.i_pump);
}

std::vector<MatchedPair> find_phase_matched_pairs(double omega_pump,
                                                  const PumpDrive& drive,
                                                  const DispersionTable& dispersion,
                                                  const PhaseMatchOptions& opt) {
  if (!(omega_pump > 0.0) || omega_pump / two_pi > dispersion.f_max_hz())
    throw DomainError("find_phase_matched_pairs: pump outside dispersion table");
  double lo = std::max(opt.search_start_hz, dispersion.f_min_hz()) * two_pi;
  double hi = omega_pump / 2.0;
  if (!(hi > lo)) throw DomainError("find_phase_matched_pairs: empty search band");

  auto db = [&](double ws) { return delta_beta_at(omega_pump, ws, drive, dispersion); };

  std::vector<MatchedPair> out;
  double scan_step = (hi - lo) / opt.scan_points;
  double prev = db(lo);
  double prev_w = lo;
  double min_abs = std::abs(prev), min_w = lo;
  for (int j = 1; j <= opt.scan_points; j++) {
    double w = lo + (hi - lo) * j / opt.scan_points;
    double v = db(w);
    if ((prev < 0.0) != (v < 0.0)) {
      double a = prev_w, b = w, fa = prev;
      while (b - a > two_pi * opt.bisect_tol_hz) {
        double mid = 0.5 * (a + b), fm = db(mid);
        if ((fm < 0.0) == (fa < 0.0)) { a = mid; fa = fm; } else { b = mid; }
      }
      double ws = 0.5 * (a + b);
      out.push_back({ws, omega_pump - ws, (omega_pump / 2.0 - ws) / two_pi, false});
    }
    if (std::abs(v) < min_abs) { min_abs = std::abs(v); min_w = w; }
    prev = v;
    prev_w = w;
  }
  // a grazing contact (tangent double root) is a tiny |delta_beta| minimum
  // without a sign change; report it once, at the global minimizer
  bool near_root = false;
  for (const auto& p : out)
    if (std::abs(p.omega_signal - min_w) < 3.0 * scan_step) near_root = true;
  if (min_abs < opt.tangent_tol && !near_root) {
    out.push_back({min_w, omega_pump - min_w, (omega_pump / 2.0 - min_w) / two_pi, true});
  }

  // collapse duplicates closer than the bisection tolerance
  std::sort(out.begin(), out.end(),
            [](const MatchedPair& x, const MatchedPair& y) { return x.omega_signal < y.omega_signal; });
  std::vector<MatchedPair> dedup;
  for (const auto& p : out) {
    if (!dedup.empty() &&
        std::abs(p.omega_signal - dedup.back().omega_signal) < two_pi * 2.0 * opt.bisect_tol_hz)
      continue;
    dedup.push_back(p);
  }
  return dedup;
}

std::string CompressionCurve::to_csv() const {
  std::string s = "probe_dbm,gain_db\n";
  for (std::size_t i = 0; i < probe_dbm.size(); i++) {
    s += format_double(probe_dbm[i]);
    s += ',';
    s += format_double(gain_db[i]);
    s += '\n';
  }
  return s;
}

std::string CompressionCurve::summary_json() const {
  nlohmann::json j;
  j["p_1db_dbm"] = p1db_dbm;
  j["freq_hz"] = probe_freq_hz;
  j["small_signal_gain_db"] = small_signal_gain_db;
  return j.dump();
}

CompressionCurve compression_curve(const PumpDrive& drive,
                                   const DispersionTable& dispersion,
                                   double probe_freq_hz,
                                   const std::vector<double>& probe_dbm,
                                   const CompressionOptions& opt) {
  if (probe_dbm.size() < 2) throw DomainError("compression_curve: need >= 2 probe powers");
  for (std::size_t i = 1; i < probe_dbm.size(); i++)
    if (!(probe_dbm[i] > probe_dbm[i - 1]))
      throw DomainError("compression_curve: probe powers must be increasing");

  double ws = two_pi * probe_freq_hz;
  double wi = drive.omega_pump - ws;
  Wavenumbers k{dispersion.k_at(drive.omega_pump), dispersion.k_at(ws), dispersion.k_at(wi)};
  double n_cells = double(dispersion.n_cells());

  CmeControls ctl;
  ctl.rtol = opt.rtol;
  ctl.atol_scale = opt.atol_scale;
  ctl.samples = 1;

  auto gain_db_at_amp = [&](double i_seed) {
    CmeSolution sol = integrate_cme(drive, k, cplx(i_seed, 0.0), cplx(0.0, 0.0),
                                    n_cells, ctl);
    return sol.signal_power_gain_db();
  };
  auto amp = [&](double dbm) { return dbm_to_amplitude(dbm, opt.z0, opt.convention); };

  double pump_dbm = amplitude_to_dbm(drive.i_pump, opt.z0, opt.convention);
  if (probe_dbm.back() >= pump_dbm)
    throw DomainError("compression_curve: probe powers must stay below the pump power");

  CompressionCurve curve;
  curve.probe_freq_hz = probe_freq_hz;
  curve.probe_dbm = probe_dbm;
  curve.gain_db.resize(probe_dbm.size());
  parallel_for(probe_dbm.size(), opt.threads, [&](std::size_t i) {
    curve.gain_db[i] = gain_db_at_amp(amp(probe_dbm[i]));
  });

  curve.small_signal_gain_db = gain_db_at_amp(opt.small_signal_ratio * drive.i_pump);
  double target = curve.small_signal_gain_db - 1.0;

  // bracket the 1 dB crossing on the grid
  std::size_t ix = probe_dbm.size();
  for (std::size_t i = 0; i < probe_dbm.size(); i++)
    if (curve.gain_db[i] <= target) { ix = i; break; }
  if (ix == probe_dbm.size())
    throw FitError("compression_curve: gain never compresses 1 dB within the probe grid");
  double lo_dbm = (ix == 0) ? probe_dbm[0] - 10.0 : probe_dbm[ix - 1];
  double hi_dbm = probe_dbm[ix];
  if (ix == 0 && gain_db_at_amp(amp(lo_dbm)) <= target)
    throw FitError("compression_curve: probe grid starts beyond the 1 dB point");
  while (hi_dbm - lo_dbm > opt.bisect_tol_db) {
    double mid = 0.5 * (lo_dbm + hi_dbm);
    if (gain_db_at_amp(amp(mid)) > target) lo_dbm = mid; else hi_dbm = mid;
  }
  curve.p1db_dbm = 0.5 * (lo_dbm + hi_dbm);
  return curve;
}

AsymmetryDiagnostic asymmetry_diagnostic(const PumpDrive& drive,
                                         const DispersionTable& dispersion,
                                         const std::vector<double>& signal_grid_hz,
                                         const std::vector<double>& seed_ratios,
                                         double tilt_delta_hz, const SweepOptions& opt) {
  if (seed_ratios.empty()) throw DomainError("asymmetry_diagnostic: empty seed list");
  AsymmetryDiagnostic diag;
  diag.seed_ratios = seed_ratios;
  diag.tilt_delta_hz = tilt_delta_hz;
  double half = drive.omega_pump / 2.0 / two_pi;
  for (double r : seed_ratios) {
    GainProfile prof = gain_profile(drive, dispersion, signal_grid_hz, r, opt);
    // tilt from dedicated points, not the grid, so delta is exact
    GainProfile two = gain_profile(drive, dispersion,
                                   {half - tilt_delta_hz, half + tilt_delta_hz}, r, opt);
    diag.tilt_db.push_back(two.points[1].gain_db - two.points[0].gain_db);
    diag.profiles.push_back(std::move(prof));
  }
  return diag;
}

double pump_phase_shift(const PumpDrive& drive, double l0, double c) {
  if (!(l0 > 0.0) || !(c > 0.0))
    throw DomainError("pump_phase_shift: l0 and c must be positive");
  double ratio2 = drive.i_dc * drive.i_dc / (drive.i_star * drive.i_star);
  return drive.i_pump * drive.i_pump / (8.0 * drive.i_star * drive.i_star) *
         drive.omega_pump * std::sqrt(l0 * c) * std::sqrt(1.0 + ratio2);
}

double calibrate_pump_amplitude(double delta_phi, long n_cells, double i_dc,
                                double i_star, double l0, double c, double omega_pump) {
  if (n_cells < 1) throw DomainError("calibrate_pump_amplitude: n_cells must be >= 1");
  if (delta_phi > 0.0)
    throw DomainError("calibrate_pump_amplitude: measured shift must be <= 0 "
                      "(delta_p = -delta_phi / n_cells)");
  if (!(i_star > 0.0) || i_dc < 0.0 || i_dc >= i_star)
    throw DomainError("calibrate_pump_amplitude: need 0 <= i_dc < i_star");
  if (!(l0 > 0.0) || !(c > 0.0) || !(omega_pump > 0.0))
    throw DomainError("calibrate_pump_amplitude: l0, c, omega_pump must be positive");
  double delta_p = -delta_phi / double(n_cells);
  double ratio2 = i_dc * i_dc / (i_star * i_star);
  double denom = omega_pump * std::sqrt(l0 * c) * std::sqrt(1.0 + ratio2);
  double ip0 = std::sqrt(8.0 * i_star * i_star * delta_p / denom);
  if (ip0 >= i_star)
    throw DomainError("calibrate_pump_amplitude: inferred amplitude reaches i_star");
  return ip0;
}

}  // namespace kita
