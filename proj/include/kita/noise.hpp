#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kita/model.hpp"

namespace kita {

// vacuum noise, quanta
inline constexpr double n_vacuum = 0.5;

// Three-port amplifier chain of the noise measurement: calibrated source ->
// (eta1) -> KIT (gain G signal-to-signal, G-1 idler-to-signal) -> (eta2) ->
// HEMT -> room temperature electronics. Noise quantities in quanta, gains
// linear.
struct NoiseChain {
  double eta1_signal;   // source->KIT transmission at the signal frequency
  double eta1_idler;    // source->KIT transmission at the idler frequency
  double eta2;          // KIT->HEMT transmission
  double kit_gain;      // G >= 1
  double hemt_gain;     // G_H >= 1
  double room_gain;     // G_r >= 1
  double hemt_noise;    // N_H, input referred
  double excess_signal; // N_ex^s, KIT excess noise on the signal path
  double excess_idler;  // N_ex^i, KIT excess noise on the idler path

  NoiseChain(double e1s, double e1i, double e2, double g, double gh, double gr,
             double nh, double nex_s, double nex_i);

  // chain gains of the closed form
  double gain_ss() const { return room_gain * hemt_gain * eta2 * kit_gain * eta1_signal; }
  double gain_si() const { return room_gain * hemt_gain * eta2 * (kit_gain - 1.0) * eta1_idler; }

  // effective excess noises of the closed form
  double n_eff_signal() const;
  double n_eff_idler() const;
};

// SNTJ noise delivered to the line at voltage bias v, temperature t:
//   N = (kB T / 2 hbar w) [ x+ coth(x+) + x- coth(x-) ],  x+- = (eV +- hbar w)/(2 kB T)
double sntj_noise(double v_volt, double t_kelvin, double omega);

// output noise via the explicit beamsplitter/amplifier stages
double chain_output_noise_staged(const NoiseChain& chain, double n_in_signal,
                                 double n_in_idler);

// same quantity via the closed form G_c^ss (N_in^s + N_eff^s) + G_c^si (N_in^i + N_eff^i)
double chain_output_noise(const NoiseChain& chain, double n_in_signal,
                          double n_in_idler);

struct SystemNoise {
  double exact;       // N_eff^s + (Gc^si/Gc^ss)(N_f + N_eff^i)
  double simplified;  // high-gain form with the explicit HEMT and loss terms
};

SystemNoise system_added_noise(const NoiseChain& chain);

// chain with the KIT off (G = 1, lossless, noiseless):
//   N' = ((1 - eta2 eta1s) N_f + N_H) / (eta2 eta1s)
double hemt_only_noise(double eta1_signal, double eta2, double hemt_noise);
double hemt_only_noise(const NoiseChain& chain);

// inversion of hemt_only_noise for the HEMT added noise
double hemt_noise_from_system(double n_sigma_prime, double eta_product);

// Solves the simplified system-noise form for the total KIT excess noise
// N_ex^s + N_ex^i. `low_gain` flags chains outside the high-gain regime;
// `negative` flags an unphysical (negative) estimate, which is reported, not
// clamped.
struct ExcessNoiseEstimate {
  double total;      // quanta
  double sigma;      // 1-sigma propagated from the input uncertainties
  bool low_gain;
  bool negative;
};

struct ExcessNoiseInputs {
  double n_sigma, n_sigma_err;
  double eta1_signal, eta1_signal_err;
  double eta2, eta2_err;
  double kit_gain, kit_gain_err;   // linear
  double hemt_noise, hemt_noise_err;
};

ExcessNoiseEstimate excess_noise_estimate(const ExcessNoiseInputs& in);

// insertion loss that may depend on frequency (linear interpolation in dB)
struct IlValue {
  std::vector<std::pair<double, double>> table;  // (freq_hz, il_db), or a single flat entry

  IlValue() = default;
  IlValue(double flat_db) : table{{0.0, flat_db}} {}            // NOLINT(implicit)
  explicit IlValue(std::vector<std::pair<double, double>> t);

  double at(double freq_hz) const;
};

struct ComponentLosses {
  IlValue sntj;      // source packaging, bias tee included
  IlValue bias_tee;
  IlValue lpf;
  IlValue coupler;   // directional coupler
  IlValue isolator;
  IlValue kit;       // KIT packaging, split half before / half after the chip
};

struct LossBudget {
  double il_sntj, il_bias_tee, il_lpf, il_coupler, il_isolator, il_kit;  // dB at f_signal
  double il_bypass;  // kit + lpf + coupler + 2 bias tees
  double il_total;   // sntj + bypass + isolator + lpf
  double eta1_signal;
  double eta1_idler;
  double eta2;
};

// Composes per-component losses into transmission efficiencies:
//   IL(eta1) = sntj + lpf + coupler + bias_tee + kit/2   (evaluated at f_s or f_i)
//   IL(eta2) = kit/2 + bias_tee + isolator + lpf
LossBudget loss_budget(const ComponentLosses& losses, double f_signal_hz,
                       double f_idler_hz);

// bypass-measurement decomposition: il_kit = il_bypass - (lpf + coupler + 2 bias_tee)
double kit_il_from_bypass(double il_bypass_db, double il_lpf_db, double il_coupler_db,
                          double il_bias_tee_db);

// A simulated (or measured) SNTJ bias sweep. n_out is the noise at the
// analyzer in quanta (output referred).
struct SntjSweep {
  std::vector<double> v_volt;
  std::vector<double> n_out;
  double omega_signal;
  double omega_idler;
  double temp_kelvin;    // physical SNTJ temperature (fit start value)
  double v_offset;       // generating offset when synthetic, 0 for measured
  double rbw_hz;         // analyzer resolution bandwidth

  std::string to_csv() const;
  std::string sidecar_json() const;
};

// Forward model of the sweep. `sigma_quanta` is the rms measurement noise
// referred to the chain input (scaled by the signal-to-signal chain gain on
// the stored output values); `seed` makes it reproducible.
SntjSweep simulate_sweep(const NoiseChain& chain, const std::vector<double>& v_grid,
                         double t_kelvin, double omega_signal, double omega_idler,
                         double v_offset, double sigma_quanta = 0.0,
                         std::uint64_t seed = 0, double rbw_hz = 5e6);

std::vector<double> default_bias_grid(int points = 2000, double v_max = 6.48e-4);

// display form: output noise referred to the chain input minus the
// vacuum half quantum, so the system-added noise reads off at v = v_offset.
std::vector<double> input_referred_display(const SntjSweep& sweep, double gain_ss);

}  // namespace kita
