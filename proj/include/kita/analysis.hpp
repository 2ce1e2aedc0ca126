#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kita/cme.hpp"
#include "kita/dispersion.hpp"
#include "kita/model.hpp"
#include "kita/units.hpp"

namespace kita {

struct GainPoint {
  double freq_hz;
  double gain_db;
  bool ok;              // false when the integrator failed at this point
  std::string error;
};

struct GainProfile {
  std::vector<GainPoint> points;
  PumpDrive drive;
  double seed_ratio;        // i_signal(0) = seed_ratio * i_pump
  double half_pump_hz;      // usable-bandwidth marker (idler band mirrors it)

  std::size_t failed_count() const;
  double mean_gain_db() const;      // over ok points
  double gain_at_db(double freq_hz) const;  // nearest ok grid point
  std::string to_csv() const;
};

struct SweepOptions {
  double rtol = 1e-9;
  double atol_scale = 1e-12;
  unsigned threads = 1;
};

// Full-CME signal power gain versus signal frequency; the idler starts in
// vacuum, the signal seed is seed_ratio * i_pump. Per-point integrator
// failures are flagged, the sweep continues.
GainProfile gain_profile(const PumpDrive& drive, const DispersionTable& dispersion,
                         const std::vector<double>& signal_grid_hz, double seed_ratio,
                         const SweepOptions& opt = {});

std::vector<double> linspace(double start, double stop, int n);

struct MatchedPair {
  double omega_signal;
  double omega_idler;
  double detuning_hz;  // (omega_pump/2 - omega_signal) / 2pi, >= 0
  bool tangent;        // root found as a grazing |delta_beta| minimum
};

struct PhaseMatchOptions {
  double search_start_hz = 1.5e9;   // lower edge of the signal search band
  int scan_points = 4000;
  double bisect_tol_hz = 1e3;
  // |delta_beta| below this at a local minimum counts as a grazing root
  // (~0.07 rad of total mismatch over a 66k-cell line)
  double tangent_tol = 1e-6;
};

// All solutions of delta_beta(omega_s) = 0 for omega_s in
// [search_start, omega_pump/2]; symmetric partners (omega_i > omega_p/2) are
// collapsed into one pair. Empty when the pump is below the matching
// threshold.
std::vector<MatchedPair> find_phase_matched_pairs(double omega_pump,
                                                  const PumpDrive& drive,
                                                  const DispersionTable& dispersion,
                                                  const PhaseMatchOptions& opt = {});

double delta_beta_at(double omega_pump, double omega_signal, const PumpDrive& drive,
                     const DispersionTable& dispersion);

struct CompressionCurve {
  std::vector<double> probe_dbm;   // at the line input
  std::vector<double> gain_db;
  double small_signal_gain_db;
  double p1db_dbm;                 // input power at 1 dB compression
  double probe_freq_hz;
  std::string to_csv() const;
  std::string summary_json() const;
};

struct CompressionOptions {
  double z0 = 50.0;
  PowerConvention convention = PowerConvention::half;
  double small_signal_ratio = 1e-3;  // seed for the small-signal reference
  double bisect_tol_db = 0.1;        // on power
  double rtol = 1e-9;
  double atol_scale = 1e-12;
  unsigned threads = 1;
};

// Gain versus probe power through the full CME (pump depletion active);
// p1db found by bisection on the (small-signal - 1 dB) crossing. Throws
// FitError when the grid never compresses 1 dB.
CompressionCurve compression_curve(const PumpDrive& drive,
                                   const DispersionTable& dispersion,
                                   double probe_freq_hz,
                                   const std::vector<double>& probe_dbm,
                                   const CompressionOptions& opt = {});

struct AsymmetryDiagnostic {
  std::vector<double> seed_ratios;
  std::vector<GainProfile> profiles;
  std::vector<double> tilt_db;  // gain(half + delta) - gain(half - delta)
  double tilt_delta_hz;
};

// Profiles at increasing seed power plus the profile tilt about the half-pump
// frequency (delta defaults to 1 GHz).
AsymmetryDiagnostic asymmetry_diagnostic(const PumpDrive& drive,
                                         const DispersionTable& dispersion,
                                         const std::vector<double>& signal_grid_hz,
                                         const std::vector<double>& seed_ratios,
                                         double tilt_delta_hz = 1e9,
                                         const SweepOptions& opt = {});

// 4WM pump phase shift per cell,
//   delta_p = (1/8)(ip0^2/i_star^2) w_p sqrt(l0 c) sqrt(1 + i_dc^2/i_star^2)
double pump_phase_shift(const PumpDrive& drive, double l0, double c);

// Inverts the phase-shift relation: a measured end-to-end shift
// delta_phi = -delta_p n_cells gives the pump amplitude at the line input.
double calibrate_pump_amplitude(double delta_phi, long n_cells, double i_dc,
                                double i_star, double l0, double c, double omega_pump);

}  // namespace kita
