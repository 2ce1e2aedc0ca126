#pragma once

#include <optional>
#include <string>

#include "kita/noise.hpp"

namespace kita {

// Result of the two-step sweep fit. The (n_eff_signal, n_eff_idler) split is
// gauge-fixed: only the combination gain_ss*n_eff_s + gain_si*n_eff_i (and
// hence n_sigma) is determined by a single sweep.
struct FitResult {
  double gain_ss = 0.0, gain_ss_sigma = 0.0;
  double gain_si = 0.0, gain_si_sigma = 0.0;
  double v_offset = 0.0, v_offset_sigma = 0.0;
  double n_eff_signal = 0.0, n_eff_signal_sigma = 0.0;
  double n_eff_idler = 0.0, n_eff_idler_sigma = 0.0;
  double temp_kelvin = 0.0, temp_sigma = 0.0;
  double n_sigma = 0.0, n_sigma_sigma = 0.0;  // system-added noise, quanta
  double meas_sigma = 0.0;   // rms measurement noise from asymptote residuals
  bool degenerate_ratio = false;  // omega_s == omega_i: gains not separable
  std::string to_json() const;
};

struct FitOptions {
  // step-1 asymptote region: |e(v - v_off)/(2 hbar omega_s)| above this many quanta
  double asymptote_quanta = 3.0;
  // ridge prior on the gain ratio r = gain_si/gain_ss about 1; balances the
  // near-degeneracy of the two slopes when omega_s ~ omega_i
  double gain_ratio_prior_sigma = 0.03;
  double temp_start_kelvin = 0.05;  // used when the sweep carries no temperature
};

// The two-step shot-noise fit. Step 1: linear fits of the two asymptote
// branches give v_offset, the combined slope and intercept, then the central
// region shape splits the slope into (gain_ss, gain_si). Step 2: with those
// frozen, (n_eff_signal, n_eff_idler, temp) on the central region. n_sigma is
// assembled from the fitted quantities. Throws FitError when either asymptote
// side is empty or the nonlinear steps do not converge.
FitResult fit_sweep(const SntjSweep& sweep, const FitOptions& opt = {});

// Single-input fit that wrongly holds the idler port at vacuum:
//   N_o = G_c (N_in^s + A). Reports A as the (under-estimated) system-added
// noise and G_c as the (over-estimated) chain gain.
struct NaiveFitResult {
  double gain = 0.0;
  double system_noise = 0.0;  // the y-intercept, quoted as N_sigma by mistake
  double v_offset = 0.0;
  double temp_kelvin = 0.0;
  std::string to_json() const;
};

NaiveFitResult naive_fit(const SntjSweep& sweep, const FitOptions& opt = {});

// side-by-side report emitted by the CLI and the comparison tests
std::string fit_comparison_json(const FitResult& full, const NaiveFitResult& naive);

// Sweep file I/O. CSV columns: v_volt,n_o_quanta (or v_volt,p_watt, converted
// via N = P / (B hbar omega)); the JSON sidecar carries
// {omega_s_hz, omega_i_hz, rbw_hz, temp_k}.
SntjSweep read_sweep_csv(const std::string& csv, const std::string& sidecar_json);

}  // namespace kita
