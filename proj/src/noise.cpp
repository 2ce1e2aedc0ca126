#include "kita/noise.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "kita/constants.hpp"
#include "kita/errors.hpp"
#include "kita/io.hpp"
#include "kita/rng.hpp"
#include "kita/units.hpp"

namespace kita {

NoiseChain::NoiseChain(double e1s, double e1i, double e2, double g, double gh,
                       double gr, double nh, double nex_s, double nex_i)
    : eta1_signal(e1s), eta1_idler(e1i), eta2(e2), kit_gain(g), hemt_gain(gh),
      room_gain(gr), hemt_noise(nh), excess_signal(nex_s), excess_idler(nex_i) {
  auto check_eta = [](double e, const char* name) {
    if (!(e > 0.0) || e > 1.0)
      throw DomainError(std::string("NoiseChain: ") + name + " must be in (0, 1]");
  };
  check_eta(eta1_signal, "eta1_signal");
  check_eta(eta1_idler, "eta1_idler");
  check_eta(eta2, "eta2");
  if (!(kit_gain >= 1.0) || !(hemt_gain >= 1.0) || !(room_gain >= 1.0))
    throw DomainError("NoiseChain: gains must be >= 1");
  if (hemt_noise < 0.0 || excess_signal < 0.0 || excess_idler < 0.0)
    throw DomainError("NoiseChain: noise terms must be >= 0");
}

double NoiseChain::n_eff_signal() const {
  return (excess_signal + (1.0 - eta1_signal) * n_vacuum) / eta1_signal +
         ((1.0 - eta2) * n_vacuum + hemt_noise) / (eta2 * kit_gain * eta1_signal);
}

double NoiseChain::n_eff_idler() const {
  return (excess_idler + (1.0 - eta1_idler) * n_vacuum) / eta1_idler;
}

namespace {

// x coth x, stable through x = 0
double xcothx(double x) {
  double ax = std::abs(x);
  if (ax < 1e-4) {
    double x2 = x * x;
    return 1.0 + x2 / 3.0 - x2 * x2 / 45.0;
  }
  return x / std::tanh(x);
}

}  // namespace

double sntj_noise(double v_volt, double t_kelvin, double omega) {
  if (!(t_kelvin > 0.0)) throw DomainError("sntj_noise: temperature must be positive");
  if (!(omega > 0.0)) throw DomainError("sntj_noise: omega must be positive");
  double beta = 1.0 / (2.0 * k_boltzmann * t_kelvin);
  double ev = q_electron * v_volt;
  double hw = hbar * omega;
  return (k_boltzmann * t_kelvin / (2.0 * hw)) *
         (xcothx(beta * (ev + hw)) + xcothx(beta * (ev - hw)));
}

double chain_output_noise_staged(const NoiseChain& c, double n_in_signal,
                                 double n_in_idler) {
  double n1s = c.eta1_signal * n_in_signal + (1.0 - c.eta1_signal) * n_vacuum;
  double n1i = c.eta1_idler * n_in_idler + (1.0 - c.eta1_idler) * n_vacuum;
  double n2 = c.kit_gain * (n1s + c.excess_signal) +
              (c.kit_gain - 1.0) * (n1i + c.excess_idler);
  double n3 = c.eta2 * n2 + (1.0 - c.eta2) * n_vacuum;
  double n4 = c.hemt_gain * (n3 + c.hemt_noise);
  return c.room_gain * n4;
}

double chain_output_noise(const NoiseChain& c, double n_in_signal, double n_in_idler) {
  return c.gain_ss() * (n_in_signal + c.n_eff_signal()) +
         c.gain_si() * (n_in_idler + c.n_eff_idler());
}

SystemNoise system_added_noise(const NoiseChain& c) {
  double ratio = (c.kit_gain - 1.0) / c.kit_gain * (c.eta1_idler / c.eta1_signal);
  double exact = c.n_eff_signal() + ratio * (n_vacuum + c.n_eff_idler());
  double simplified =
      (c.excess_signal + c.excess_idler) / c.eta1_signal +
      2.0 * (1.0 - c.eta1_signal) * n_vacuum / c.eta1_signal +
      c.hemt_noise / (c.eta2 * c.kit_gain * c.eta1_signal) + n_vacuum;
  return {exact, simplified};
}

double hemt_only_noise(double eta1_signal, double eta2, double hemt_noise) {
  double eta = eta2 * eta1_signal;
  if (!(eta > 0.0) || eta > 1.0)
    throw DomainError("hemt_only_noise: eta product must be in (0, 1]");
  return ((1.0 - eta) * n_vacuum + hemt_noise) / eta;
}

double hemt_only_noise(const NoiseChain& c) {
  return hemt_only_noise(c.eta1_signal, c.eta2, c.hemt_noise);
}

double hemt_noise_from_system(double n_sigma_prime, double eta_product) {
  if (!(eta_product > 0.0) || eta_product > 1.0)
    throw DomainError("hemt_noise_from_system: eta product must be in (0, 1]");
  return n_sigma_prime * eta_product - (1.0 - eta_product) * n_vacuum;
}

ExcessNoiseEstimate excess_noise_estimate(const ExcessNoiseInputs& in) {
  if (!(in.eta1_signal > 0.0) || !(in.eta2 > 0.0) || !(in.kit_gain >= 1.0))
    throw DomainError("excess_noise_estimate: invalid chain parameters");
  auto value = [](double ns, double e1, double e2, double g, double nh) {
    return e1 * (ns - n_vacuum) - nh / (e2 * g) - 2.0 * (1.0 - e1) * n_vacuum;
  };
  double est = value(in.n_sigma, in.eta1_signal, in.eta2, in.kit_gain, in.hemt_noise);
  // linear propagation of the quoted 1-sigma uncertainties
  double var = 0.0;
  auto add = [&](double err, double dplus, double dminus) {
    double d = (dplus - dminus) / 2.0;
    var += d * d * err * err;
  };
  double h;
  h = std::max(1e-8, 1e-4 * std::abs(in.n_sigma));
  add(in.n_sigma_err,
      value(in.n_sigma + h, in.eta1_signal, in.eta2, in.kit_gain, in.hemt_noise) / h,
      value(in.n_sigma - h, in.eta1_signal, in.eta2, in.kit_gain, in.hemt_noise) / h);
  h = 1e-6;
  add(in.eta1_signal_err,
      value(in.n_sigma, in.eta1_signal + h, in.eta2, in.kit_gain, in.hemt_noise) / h,
      value(in.n_sigma, in.eta1_signal - h, in.eta2, in.kit_gain, in.hemt_noise) / h);
  add(in.eta2_err,
      value(in.n_sigma, in.eta1_signal, in.eta2 + h, in.kit_gain, in.hemt_noise) / h,
      value(in.n_sigma, in.eta1_signal, in.eta2 - h, in.kit_gain, in.hemt_noise) / h);
  h = std::max(1e-8, 1e-4 * in.kit_gain);
  add(in.kit_gain_err,
      value(in.n_sigma, in.eta1_signal, in.eta2, in.kit_gain + h, in.hemt_noise) / h,
      value(in.n_sigma, in.eta1_signal, in.eta2, in.kit_gain - h, in.hemt_noise) / h);
  h = std::max(1e-8, 1e-4 * std::abs(in.hemt_noise));
  add(in.hemt_noise_err,
      value(in.n_sigma, in.eta1_signal, in.eta2, in.kit_gain, in.hemt_noise + h) / h,
      value(in.n_sigma, in.eta1_signal, in.eta2, in.kit_gain, in.hemt_noise - h) / h);

  ExcessNoiseEstimate out;
  out.total = est;
  out.sigma = std::sqrt(var);
  out.low_gain = in.kit_gain < 10.0;
  out.negative = est < 0.0;
  return out;
}

IlValue::IlValue(std::vector<std::pair<double, double>> t) : table(std::move(t)) {
  if (table.empty()) throw DomainError("IlValue: empty table");
  for (std::size_t i = 0; i < table.size(); i++) {
    if (table[i].second < 0.0) throw DomainError("IlValue: insertion loss must be >= 0 dB");
    if (i > 0 && !(table[i].first > table[i - 1].first))
      throw DomainError("IlValue: table frequencies must be strictly increasing");
  }
}

double IlValue::at(double freq_hz) const {
  if (table.empty()) return 0.0;
  if (table.size() == 1) return table.front().second;
  if (freq_hz <= table.front().first) return table.front().second;
  if (freq_hz >= table.back().first) return table.back().second;
  auto it = std::upper_bound(table.begin(), table.end(), freq_hz,
                             [](double f, const auto& p) { return f < p.first; });
  auto lo = it - 1;
  double t = (freq_hz - lo->first) / (it->first - lo->first);
  return lo->second + t * (it->second - lo->second);
}

LossBudget loss_budget(const ComponentLosses& losses, double f_signal_hz,
                       double f_idler_hz) {
  LossBudget b;
  b.il_sntj = losses.sntj.at(f_signal_hz);
  b.il_bias_tee = losses.bias_tee.at(f_signal_hz);
  b.il_lpf = losses.lpf.at(f_signal_hz);
  b.il_coupler = losses.coupler.at(f_signal_hz);
  b.il_isolator = losses.isolator.at(f_signal_hz);
  b.il_kit = losses.kit.at(f_signal_hz);
  b.il_bypass = b.il_kit + b.il_lpf + b.il_coupler + 2.0 * b.il_bias_tee;
  b.il_total = b.il_sntj + b.il_bypass + b.il_isolator + b.il_lpf;

  auto eta1_at = [&](double f) {
    return il_to_efficiency(losses.sntj.at(f) + losses.lpf.at(f) + losses.coupler.at(f) +
                            losses.bias_tee.at(f) + losses.kit.at(f) / 2.0);
  };
  b.eta1_signal = eta1_at(f_signal_hz);
  b.eta1_idler = eta1_at(f_idler_hz);
  b.eta2 = il_to_efficiency(b.il_kit / 2.0 + b.il_bias_tee + b.il_isolator + b.il_lpf);
  return b;
}

double kit_il_from_bypass(double il_bypass_db, double il_lpf_db, double il_coupler_db,
                          double il_bias_tee_db) {
  return il_bypass_db - (il_lpf_db + il_coupler_db + 2.0 * il_bias_tee_db);
}

std::string SntjSweep::to_csv() const {
  std::string s = "v_volt,n_o_quanta\n";
  for (std::size_t i = 0; i < v_volt.size(); i++) {
    s += format_double(v_volt[i]);
    s += ',';
    s += format_double(n_out[i]);
    s += '\n';
  }
  return s;
}

std::string SntjSweep::sidecar_json() const {
  nlohmann::json j;
  j["omega_s_hz"] = omega_signal / two_pi;
  j["omega_i_hz"] = omega_idler / two_pi;
  j["rbw_hz"] = rbw_hz;
  j["temp_k"] = temp_kelvin;
  return j.dump(2);
}

SntjSweep simulate_sweep(const NoiseChain& chain, const std::vector<double>& v_grid,
                         double t_kelvin, double omega_signal, double omega_idler,
                         double v_offset, double sigma_quanta, std::uint64_t seed,
                         double rbw_hz) {
  if (v_grid.size() < 8) throw DomainError("simulate_sweep: bias grid too small");
  SntjSweep sw;
  sw.v_volt = v_grid;
  sw.omega_signal = omega_signal;
  sw.omega_idler = omega_idler;
  sw.temp_kelvin = t_kelvin;
  sw.v_offset = v_offset;
  sw.rbw_hz = rbw_hz;
  sw.n_out.resize(v_grid.size());
  Rng rng(seed);
  double out_sigma = sigma_quanta * chain.gain_ss();
  for (std::size_t i = 0; i < v_grid.size(); i++) {
    double v = v_grid[i] - v_offset;
    double n = chain_output_noise(chain, sntj_noise(v, t_kelvin, omega_signal),
                                  sntj_noise(v, t_kelvin, omega_idler));
    if (sigma_quanta > 0.0) n += out_sigma * rng.gaussian();
    sw.n_out[i] = n;
  }
  return sw;
}

std::vector<double> default_bias_grid(int points, double v_max) {
  if (points < 8) throw DomainError("default_bias_grid: need >= 8 points");
  std::vector<double> v(points);
  for (int i = 0; i < points; i++) v[i] = -v_max + 2.0 * v_max * i / (points - 1);
  return v;
}

std::vector<double> input_referred_display(const SntjSweep& sweep, double gain_ss) {
  if (!(gain_ss > 0.0)) throw DomainError("input_referred_display: gain must be positive");
  std::vector<double> out(sweep.n_out.size());
  for (std::size_t i = 0; i < out.size(); i++)
    out[i] = sweep.n_out[i] / gain_ss - n_vacuum;
  return out;
}

}  // namespace kita
