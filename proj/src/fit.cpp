#include "kita/fit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "kita/constants.hpp"
#include "kita/errors.hpp"
#include "kita/levmar.hpp"

namespace kita {

namespace {

struct LinearFit {
  double slope, intercept;
  double var_slope, var_intercept;
  int count;
};

// ordinary least squares y = intercept + slope * x
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  int n = (int)x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; i++) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double det = n * sxx - sx * sx;
  if (!(det > 0.0)) throw FitError("fit_line: degenerate abscissae");
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / n;
  f.var_slope = n / det;          // multiply by sigma^2
  f.var_intercept = sxx / det;    // multiply by sigma^2
  f.count = n;
  return f;
}

struct AsymptoteFit {
  double v_offset;
  double slope;       // mean |dN/dV| of the two branches
  double intercept;   // N at the branch intersection
  double meas_sigma;  // rms residual
  double var_slope, var_intercept, var_voffset;
  int n_pos, n_neg;
};

AsymptoteFit fit_asymptotes(const SntjSweep& sw, double asymptote_quanta) {
  // bootstrap the offset from the sweep minimum
  std::size_t imin = 0;
  for (std::size_t i = 0; i < sw.n_out.size(); i++)
    if (sw.n_out[i] < sw.n_out[imin]) imin = i;
  double v0 = sw.v_volt[imin];

  double v_thr = asymptote_quanta * 2.0 * hbar * sw.omega_signal / q_electron;
  std::vector<double> xp, yp, xn, yn;
  for (std::size_t i = 0; i < sw.v_volt.size(); i++) {
    double dv = sw.v_volt[i] - v0;
    if (dv > v_thr) {
      xp.push_back(sw.v_volt[i]);
      yp.push_back(sw.n_out[i]);
    } else if (dv < -v_thr) {
      xn.push_back(sw.v_volt[i]);
      yn.push_back(sw.n_out[i]);
    }
  }
  if (xp.size() < 4 || xn.size() < 4)
    throw FitError("fit_sweep: sweep does not cover both asymptote regions "
                   "(need |e(v - v_off)/(2 hbar omega)| > " +
                   std::to_string(asymptote_quanta) + " on both sides)");

  LinearFit fp = fit_line(xp, yp);
  LinearFit fn = fit_line(xn, yn);

  AsymptoteFit a;
  a.v_offset = (fn.intercept - fp.intercept) / (fp.slope - fn.slope);
  a.intercept = fp.intercept + fp.slope * a.v_offset;
  a.slope = 0.5 * (fp.slope - fn.slope);
  a.n_pos = fp.count;
  a.n_neg = fn.count;

  double ss = 0.0;
  for (std::size_t i = 0; i < xp.size(); i++) {
    double r = yp[i] - (fp.intercept + fp.slope * xp[i]);
    ss += r * r;
  }
  for (std::size_t i = 0; i < xn.size(); i++) {
    double r = yn[i] - (fn.intercept + fn.slope * xn[i]);
    ss += r * r;
  }
  int dof = fp.count + fn.count - 4;
  a.meas_sigma = std::sqrt(ss / std::max(dof, 1));

  double s2 = a.meas_sigma * a.meas_sigma;
  a.var_slope = 0.25 * s2 * (fp.var_slope + fn.var_slope);
  // offset/intercept uncertainties via the intersection formula, linearized
  double denom = fp.slope - fn.slope;
  a.var_voffset = s2 * (fp.var_intercept + fn.var_intercept) / (denom * denom);
  a.var_intercept = s2 * fp.var_intercept + fp.slope * fp.slope * a.var_voffset;
  return a;
}

std::vector<std::size_t> central_indices(const SntjSweep& sw, double v_offset,
                                         double asymptote_quanta) {
  double v_thr = asymptote_quanta * 2.0 * hbar * sw.omega_signal / q_electron;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < sw.v_volt.size(); i++)
    if (std::abs(sw.v_volt[i] - v_offset) <= v_thr) idx.push_back(i);
  return idx;
}

}  // namespace

FitResult fit_sweep(const SntjSweep& sw, const FitOptions& opt) {
  if (sw.v_volt.size() != sw.n_out.size() || sw.v_volt.size() < 16)
    throw FitError("fit_sweep: malformed sweep");

  FitResult out;
  AsymptoteFit asym = fit_asymptotes(sw, opt.asymptote_quanta);
  out.v_offset = asym.v_offset;
  out.v_offset_sigma = std::sqrt(asym.var_voffset);
  out.meas_sigma = asym.meas_sigma;

  const double ws = sw.omega_signal, wi = sw.omega_idler;
  // combined slope in quanta per volt: (e/2hbar)(gss/ws + gsi/wi)
  const double slope_sum = 2.0 * hbar * asym.slope / q_electron;  // gss/ws + gsi/wi
  const double c_total = asym.intercept;  // gss*neff_s + gsi*neff_i

  auto idx = central_indices(sw, out.v_offset, opt.asymptote_quanta);
  if (idx.size() < 8) throw FitError("fit_sweep: too few points in the central region");
  std::vector<double> vc(idx.size()), yc(idx.size());
  for (std::size_t i = 0; i < idx.size(); i++) {
    vc[i] = sw.v_volt[idx[i]] - out.v_offset;
    yc[i] = sw.n_out[idx[i]];
  }

  double t_start = sw.temp_kelvin > 0.0 ? sw.temp_kelvin : opt.temp_start_kelvin;
  double sig = std::max(asym.meas_sigma, 1e-12 * std::abs(c_total) + 1e-300);

  out.degenerate_ratio = (ws == wi);
  double gss, gsi;
  double var_ratio = 0.0;
  double ratio = 1.0;
  double t_fit = t_start;
  if (out.degenerate_ratio) {
    // identical slopes: only the sum is defined; report an even split
    gss = gsi = 0.5 * slope_sum * ws;
  } else {
    // step 1b: split the combined slope using the central-region shape;
    // weighted residuals plus a ridge prior r ~ 1 keep the split stable when
    // the two kink structures nearly coincide
    const double prior_sigma = opt.gain_ratio_prior_sigma;
    std::size_t nc = vc.size();
    std::vector<double> yw(nc + 1);
    for (std::size_t i = 0; i < nc; i++) yw[i] = yc[i] / sig;
    yw[nc] = 1.0 / prior_sigma;
    auto model1 = [&](const std::vector<double>& p, std::size_t i) -> double {
      double r = std::exp(p[0]);
      if (i == nc) return r / prior_sigma;
      double t = std::clamp(std::exp(p[1]), 1e-9, 1e3);
      double g1 = slope_sum / (1.0 / ws + r / wi);
      double g2 = r * g1;
      return (g1 * sntj_noise(vc[i], t, ws) + g2 * sntj_noise(vc[i], t, wi) + c_total) / sig;
    };
    LmResult r1 = lm_fit(model1, yw, {0.0, std::log(t_start)});
    if (!r1.converged)
      throw FitError("fit_sweep: gain-split fit did not converge after " +
                     std::to_string(r1.iterations) + " iterations");
    ratio = std::exp(r1.params[0]);
    t_fit = std::exp(r1.params[1]);
    gss = slope_sum / (1.0 / ws + ratio / wi);
    gsi = ratio * gss;
    var_ratio = r1.covariance[0] * ratio * ratio;  // delog
  }
  out.gain_ss = gss;
  out.gain_si = gsi;

  // step 2: frozen gains and offset; (n_eff_s, n_eff_i, temp) on the central
  // region. Initialized on the gauge line n_eff_s = n_eff_i.
  auto model2 = [&](const std::vector<double>& p, std::size_t i) -> double {
    double t = std::clamp(std::exp(p[2]), 1e-9, 1e3);
    return (gss * (sntj_noise(vc[i], t, ws) + p[0]) +
            gsi * (sntj_noise(vc[i], t, wi) + p[1])) / sig;
  };
  std::vector<double> yw2(vc.size());
  for (std::size_t i = 0; i < vc.size(); i++) yw2[i] = yc[i] / sig;
  double even = c_total / (gss + gsi);
  LmResult r2 = lm_fit(model2, yw2, {even, even, std::log(t_fit)});
  if (!r2.converged)
    throw FitError("fit_sweep: central-region fit did not converge after " +
                   std::to_string(r2.iterations) + " iterations");
  out.n_eff_signal = r2.params[0];
  out.n_eff_idler = r2.params[1];
  out.temp_kelvin = std::exp(r2.params[2]);

  // covariances: residuals are already sigma-weighted, so lm covariance is
  // the parameter covariance directly
  out.n_eff_signal_sigma = std::sqrt(std::max(r2.covariance[0], 0.0));
  out.n_eff_idler_sigma = std::sqrt(std::max(r2.covariance[4], 0.0));
  out.temp_sigma = std::sqrt(std::max(r2.covariance[8], 0.0)) * out.temp_kelvin;

  double var_slope_sum = (2.0 * hbar / q_electron) * (2.0 * hbar / q_electron) *
                         asym.var_slope;
  // gss = slope_sum / (1/ws + r/wi)
  double dg_dsum = gss / slope_sum;
  double dg_dr = -gss * gss / (slope_sum * wi);
  double var_gss = dg_dsum * dg_dsum * var_slope_sum + dg_dr * dg_dr * var_ratio;
  out.gain_ss_sigma = std::sqrt(var_gss);
  double var_gsi = ratio * ratio * var_gss + gss * gss * var_ratio;
  out.gain_si_sigma = std::sqrt(var_gsi);

  // system-added noise from the fitted quantities
  out.n_sigma = out.n_eff_signal + (gsi / gss) * (n_vacuum + out.n_eff_idler);
  // equivalently c/gss + r*Nf, with c fully determined: propagate through that form
  double c_fit = gss * out.n_eff_signal + gsi * out.n_eff_idler;
  double var_c = asym.var_intercept;
  double dn_dc = 1.0 / gss;
  double dn_dgss = -c_fit / (gss * gss) - n_vacuum * gsi / (gss * gss);
  double dn_dgsi = n_vacuum / gss;
  double var_nsig = dn_dc * dn_dc * var_c + dn_dgss * dn_dgss * var_gss +
                    dn_dgsi * dn_dgsi * var_gsi;
  out.n_sigma_sigma = std::sqrt(var_nsig);
  return out;
}

NaiveFitResult naive_fit(const SntjSweep& sw, const FitOptions& opt) {
  AsymptoteFit asym = fit_asymptotes(sw, opt.asymptote_quanta);
  NaiveFitResult out;
  out.v_offset = asym.v_offset;
  // single path: slope = gc e / (2 hbar ws)
  out.gain = 2.0 * hbar * sw.omega_signal * asym.slope / q_electron;
  out.system_noise = asym.intercept / out.gain;

  // refine the intercept and temperature on the central region
  auto idx = central_indices(sw, out.v_offset, opt.asymptote_quanta);
  if (idx.size() >= 8) {
    std::vector<double> vc(idx.size()), yc(idx.size());
    for (std::size_t i = 0; i < idx.size(); i++) {
      vc[i] = sw.v_volt[idx[i]] - out.v_offset;
      yc[i] = sw.n_out[idx[i]];
    }
    double t_start = sw.temp_kelvin > 0.0 ? sw.temp_kelvin : opt.temp_start_kelvin;
    auto model = [&](const std::vector<double>& p, std::size_t i) -> double {
      double t = std::clamp(std::exp(p[1]), 1e-9, 1e3);
      return out.gain * (sntj_noise(vc[i], t, sw.omega_signal) + p[0]);
    };
    LmResult r = lm_fit(model, yc, {out.system_noise, std::log(t_start)});
    if (r.converged) {
      out.system_noise = r.params[0];
      out.temp_kelvin = std::exp(r.params[1]);
    }
  }
  return out;
}

std::string FitResult::to_json() const {
  nlohmann::json j;
  j["gain_ss"] = gain_ss;
  j["gain_ss_sigma"] = gain_ss_sigma;
  j["gain_si"] = gain_si;
  j["gain_si_sigma"] = gain_si_sigma;
  j["v_offset_volt"] = v_offset;
  j["v_offset_sigma"] = v_offset_sigma;
  j["n_eff_signal_quanta"] = n_eff_signal;
  j["n_eff_signal_sigma"] = n_eff_signal_sigma;
  j["n_eff_idler_quanta"] = n_eff_idler;
  j["n_eff_idler_sigma"] = n_eff_idler_sigma;
  j["temp_kelvin"] = temp_kelvin;
  j["temp_sigma"] = temp_sigma;
  j["n_sigma_quanta"] = n_sigma;
  j["n_sigma_sigma"] = n_sigma_sigma;
  j["meas_sigma_quanta_out"] = meas_sigma;
  j["degenerate_ratio"] = degenerate_ratio;
  j["note"] = "n_eff split is gauge-fixed; only gain_ss*n_eff_s + gain_si*n_eff_i "
              "and n_sigma are sweep-determined";
  return j.dump(2);
}

std::string NaiveFitResult::to_json() const {
  nlohmann::json j;
  j["gain"] = gain;
  j["system_noise_quanta"] = system_noise;
  j["v_offset_volt"] = v_offset;
  j["temp_kelvin"] = temp_kelvin;
  return j.dump(2);
}

std::string fit_comparison_json(const FitResult& full, const NaiveFitResult& naive) {
  nlohmann::json j;
  j["full"] = nlohmann::json::parse(full.to_json());
  j["naive_idler_discarded"] = nlohmann::json::parse(naive.to_json());
  j["gain_ratio_naive_over_full_db"] =
      10.0 * std::log10(naive.gain / full.gain_ss);
  j["system_noise_ratio_naive_over_full"] = naive.system_noise / full.n_sigma;
  return j.dump(2);
}

SntjSweep read_sweep_csv(const std::string& csv, const std::string& sidecar_json) {
  nlohmann::json side;
  try {
    side = nlohmann::json::parse(sidecar_json);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("sweep sidecar: ") + e.what());
  }
  for (const char* key : {"omega_s_hz", "omega_i_hz", "rbw_hz", "temp_k"})
    if (!side.contains(key))
      throw DataError(std::string("sweep sidecar: missing key ") + key);

  SntjSweep sw;
  sw.omega_signal = two_pi * side["omega_s_hz"].get<double>();
  sw.omega_idler = two_pi * side["omega_i_hz"].get<double>();
  sw.rbw_hz = side["rbw_hz"].get<double>();
  sw.temp_kelvin = side["temp_k"].get<double>();
  sw.v_offset = 0.0;

  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw DataError("sweep csv: empty file");
  while (!line.empty() && line[0] == '#') {
    if (!std::getline(in, line)) throw DataError("sweep csv: missing header");
  }
  bool power_column;
  if (line == "v_volt,n_o_quanta") power_column = false;
  else if (line == "v_volt,p_watt") power_column = true;
  else throw DataError("sweep csv: header must be v_volt,n_o_quanta or v_volt,p_watt");

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    lineno++;
    if (line.empty() || line[0] == '#') continue;
    std::size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw DataError("sweep csv: malformed line " + std::to_string(lineno));
    try {
      double v = std::stod(line.substr(0, comma));
      double y = std::stod(line.substr(comma + 1));
      if (power_column) y = y / (sw.rbw_hz * hbar * sw.omega_signal);
      sw.v_volt.push_back(v);
      sw.n_out.push_back(y);
    } catch (const std::exception&) {
      throw DataError("sweep csv: malformed line " + std::to_string(lineno));
    }
  }
  if (sw.v_volt.size() < 16) throw DataError("sweep csv: too few points");
  return sw;
}

}  // namespace kita
