#include "kita/cli.hpp"

#include <cmath>
#include <filesystem>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kita/analysis.hpp"
#include "kita/config.hpp"
#include "kita/constants.hpp"
#include "kita/dispersion.hpp"
#include "kita/fit.hpp"
#include "kita/io.hpp"
#include "kita/version.hpp"

namespace kita {

namespace {

namespace fs = std::filesystem;

struct Ctx {
  RunConfig cfg;
  fs::path out_dir;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  std::ostream* log = nullptr;

  std::string config_hash() const { return hex64(fnv1a64(cfg.source_text)); }

  std::string csv_meta(std::initializer_list<std::pair<std::string, std::string>> extra = {}) const {
    std::vector<std::pair<std::string, std::string>> kv = {
        {"kita-version", version}, {"config-hash", config_hash()}};
    kv.insert(kv.end(), extra.begin(), extra.end());
    return meta_block(kv);
  }

  nlohmann::json json_meta() const {
    return nlohmann::json{{"kita_version", version}, {"config_hash", config_hash()}};
  }

  void write_csv(const std::string& name, const std::string& payload,
                 std::initializer_list<std::pair<std::string, std::string>> extra = {}) const {
    write_file(out_dir / name, csv_meta(extra) + payload);
    *log << "wrote " << (out_dir / name).string() << "\n";
  }

  void write_json(const std::string& name, nlohmann::json j) const {
    j["meta"] = json_meta();
    write_file(out_dir / name, j.dump(2) + "\n");
    *log << "wrote " << (out_dir / name).string() << "\n";
  }
};

const CellParams& need_cell(const Ctx& c) {
  if (!c.cfg.cell) throw ConfigError("config error at line: section required by this command");
  return *c.cfg.cell;
}

const PumpDrive& need_drive(const Ctx& c) {
  if (!c.cfg.drive) throw ConfigError("config error at drive: section required by this command");
  return *c.cfg.drive;
}

const NoiseChain& need_chain(const Ctx& c) {
  if (!c.cfg.chain) throw ConfigError("config error at chain: section required by this command");
  return *c.cfg.chain;
}

DispersionTable build_table(const Ctx& c) {
  DispersionOptions opt = c.cfg.grid;
  opt.threads = c.threads;
  return build_dispersion(need_cell(c), c.cfg.loading, c.cfg.n_cells, opt);
}

std::string freq_tag(double hz) {
  double ghz = hz / 1e9;
  std::string s = format_double(ghz);
  for (auto& ch : s)
    if (ch == '.') ch = 'p';
  return s + "ghz";
}

PumpDrive drive_at(const Ctx& c, double pump_hz) {
  const PumpDrive& d = need_drive(c);
  return PumpDrive(d.i_dc, d.i_star, d.i_pump, two_pi * pump_hz);
}

int cmd_dispersion(Ctx& c) {
  DispersionTable t = build_table(c);
  c.write_csv("dispersion.csv", t.to_csv());
  nlohmann::json j = nlohmann::json::parse(t.to_json());
  c.write_json("dispersion.json", std::move(j));
  return 0;
}

int cmd_gain_profile(Ctx& c) {
  DispersionTable t = build_table(c);
  auto grid = linspace(c.cfg.signal_start_hz, c.cfg.signal_stop_hz, c.cfg.signal_points);
  SweepOptions so{c.cfg.rtol, c.cfg.atol_scale, c.threads};
  bool too_many_failures = false;
  for (double fp : c.cfg.pumps_hz) {
    GainProfile p = gain_profile(drive_at(c, fp), t, grid, c.cfg.seed_ratio, so);
    c.write_csv("gain_profile_" + freq_tag(fp) + ".csv", p.to_csv(),
                {{"pump_hz", format_double(fp)},
                 {"half_pump_hz", format_double(p.half_pump_hz)},
                 {"seed_ratio", format_double(c.cfg.seed_ratio)},
                 {"usable_band_note", "idler half mirrors the signal half about half_pump_hz"}});
    if (p.failed_count() * 10 > p.points.size()) {
      *c.log << "error: " << p.failed_count() << "/" << p.points.size()
             << " sweep points failed for pump " << format_double(fp) << " Hz\n";
      too_many_failures = true;
    }
  }
  return too_many_failures ? 3 : 0;
}

int cmd_phase_match(Ctx& c) {
  DispersionTable t = build_table(c);
  std::string csv = "pump_hz,f_signal_hz,f_idler_hz,detuning_hz,tangent\n";
  for (double fp : c.cfg.pumps_hz) {
    auto pairs = find_phase_matched_pairs(two_pi * fp, drive_at(c, fp), t);
    if (pairs.empty()) {
      csv += format_double(fp) + ",,,,\n";
      continue;
    }
    for (const auto& p : pairs) {
      csv += format_double(fp) + ',' + format_double(p.omega_signal / two_pi) + ',' +
             format_double(p.omega_idler / two_pi) + ',' +
             format_double(p.detuning_hz) + ',' + (p.tangent ? "1" : "0") + '\n';
    }
  }
  c.write_csv("phase_match.csv", csv);
  return 0;
}

int cmd_compression(Ctx& c) {
  if (c.cfg.probe_freqs_hz.empty())
    throw ConfigError("config error at sweep.probe_freqs_hz: required by compression");
  DispersionTable t = build_table(c);
  CompressionOptions opt;
  opt.convention = c.cfg.convention;
  opt.rtol = c.cfg.rtol;
  opt.atol_scale = c.cfg.atol_scale;
  opt.threads = c.threads;
  auto powers = linspace(c.cfg.probe_dbm_start, c.cfg.probe_dbm_stop, c.cfg.probe_points);
  nlohmann::json all = nlohmann::json::array();
  for (double f : c.cfg.probe_freqs_hz) {
    CompressionCurve cc = compression_curve(drive_at(c, c.cfg.pumps_hz.front()), t, f,
                                            powers, opt);
    c.write_csv("compression_" + freq_tag(f) + ".csv", cc.to_csv(),
                {{"probe_freq_hz", format_double(f)},
                 {"summary", cc.summary_json()}});
    all.push_back(nlohmann::json::parse(cc.summary_json()));
  }
  c.write_json("compression_summary.json", nlohmann::json{{"curves", all}});
  return 0;
}

int cmd_asymmetry(Ctx& c) {
  if (c.cfg.seed_ratios.empty())
    throw ConfigError("config error at sweep.seed_ratios: required by asymmetry");
  DispersionTable t = build_table(c);
  auto grid = linspace(c.cfg.signal_start_hz, c.cfg.signal_stop_hz, c.cfg.signal_points);
  SweepOptions so{c.cfg.rtol, c.cfg.atol_scale, c.threads};
  AsymmetryDiagnostic d =
      asymmetry_diagnostic(drive_at(c, c.cfg.pumps_hz.front()), t, grid,
                           c.cfg.seed_ratios, c.cfg.tilt_delta_hz, so);
  std::string tilt_csv = "seed_ratio,tilt_db\n";
  for (std::size_t i = 0; i < d.seed_ratios.size(); i++) {
    tilt_csv += format_double(d.seed_ratios[i]) + ',' + format_double(d.tilt_db[i]) + '\n';
    c.write_csv("asymmetry_seed_" + format_double(d.seed_ratios[i]) + ".csv",
                d.profiles[i].to_csv());
  }
  c.write_csv("asymmetry_tilt.csv", tilt_csv,
              {{"tilt_delta_hz", format_double(d.tilt_delta_hz)}});
  return 0;
}

int cmd_calibrate_pump(Ctx& c) {
  const PumpDrive& d = need_drive(c);
  const CellParams& cell = need_cell(c);
  double dp = pump_phase_shift(d, cell.l_d, cell.c);
  nlohmann::json j;
  j["delta_p_rad_per_cell"] = dp;
  j["predicted_total_shift_rad"] = -dp * double(c.cfg.n_cells);
  if (c.cfg.measured_phase_shift_rad != 0.0) {
    j["i_pump_from_measurement_ampere"] = calibrate_pump_amplitude(
        c.cfg.measured_phase_shift_rad, c.cfg.n_cells, d.i_dc, d.i_star, cell.l_d,
        cell.c, d.omega_pump);
  }
  c.write_json("pump_calibration.json", std::move(j));
  return 0;
}

int cmd_noise_sim(Ctx& c) {
  const NoiseChain& chain = need_chain(c);
  auto grid = default_bias_grid(c.cfg.v_points, c.cfg.v_max_volt);
  SntjSweep sw = simulate_sweep(chain, grid, c.cfg.temp_kelvin,
                                two_pi * c.cfg.chain_signal_hz,
                                two_pi * c.cfg.chain_idler_hz, c.cfg.v_offset_volt,
                                c.cfg.noise_sigma_quanta, c.seed, c.cfg.rbw_hz);
  c.write_csv("sweep.csv", sw.to_csv(),
              {{"sigma_quanta", format_double(c.cfg.noise_sigma_quanta)},
               {"seed", std::to_string(c.seed)}});
  c.write_json("sweep_meta.json", nlohmann::json::parse(sw.sidecar_json()));
  return 0;
}

int cmd_noise_fit(Ctx& c, const std::string& data, const std::string& sidecar) {
  SntjSweep sw = read_sweep_csv(read_file(data), read_file(sidecar));
  FitResult full = fit_sweep(sw);
  NaiveFitResult naive = naive_fit(sw);
  nlohmann::json j = nlohmann::json::parse(fit_comparison_json(full, naive));
  c.write_json("fit_result.json", std::move(j));
  // display form: input-referred, vacuum subtracted
  auto disp = input_referred_display(sw, full.gain_ss);
  std::string csv = "v_volt,n_input_referred_quanta\n";
  for (std::size_t i = 0; i < disp.size(); i++)
    csv += format_double(sw.v_volt[i]) + ',' + format_double(disp[i]) + '\n';
  c.write_csv("fit_display.csv", csv,
              {{"n_sigma_quanta", format_double(full.n_sigma)}});
  return 0;
}

int cmd_loss_budget(Ctx& c) {
  if (!c.cfg.losses)
    throw ConfigError("config error at chain.insertion_loss_db: required by loss-budget");
  LossBudget b = loss_budget(*c.cfg.losses, c.cfg.chain_signal_hz, c.cfg.chain_idler_hz);
  nlohmann::json j;
  j["il_db"] = {{"sntj", b.il_sntj},       {"bias_tee", b.il_bias_tee},
                {"lpf", b.il_lpf},         {"coupler", b.il_coupler},
                {"isolator", b.il_isolator}, {"kit", b.il_kit},
                {"bypass", b.il_bypass},   {"total", b.il_total}};
  j["eta1_signal"] = b.eta1_signal;
  j["eta1_idler"] = b.eta1_idler;
  j["eta2"] = b.eta2;
  c.write_json("loss_budget.json", std::move(j));
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"kita: kinetic-inductance traveling-wave amplifier toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "run configuration (JSON)");
  app.add_option("--out", out_override, "output directory (overrides config)");
  app.add_option("--threads", threads, "worker threads for sweeps");
  app.add_option("--seed", seed, "RNG seed for synthetic noise");

  std::string fit_data, fit_sidecar;

  auto* c_disp = app.add_subcommand("dispersion", "dispersion relation of the configured line");
  auto* c_gain = app.add_subcommand("gain-profile", "CME gain vs signal frequency");
  auto* c_match = app.add_subcommand("phase-match", "phase-matched signal/idler pairs");
  auto* c_comp = app.add_subcommand("compression", "gain vs probe power and P-1dB");
  auto* c_asym = app.add_subcommand("asymmetry", "gain-profile tilt vs seed power");
  auto* c_cal = app.add_subcommand("calibrate-pump", "4WM pump phase-shift calibration");
  auto* c_sim = app.add_subcommand("noise-sim", "simulate an SNTJ bias sweep");
  auto* c_fit = app.add_subcommand("noise-fit", "fit a sweep (full and naive models)");
  c_fit->add_option("--data", fit_data, "sweep CSV")->required();
  c_fit->add_option("--sidecar", fit_sidecar, "sweep sidecar JSON")->required();
  auto* c_loss = app.add_subcommand("loss-budget", "transmission efficiencies from component ILs");

  std::vector<std::string> argv(args);
  std::reverse(argv.begin(), argv.end());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {   // --help
      out << app.help();
      return 0;
    }
    err << "argument error: " << e.what() << "\n";
    return 2;
  }

  try {
    Ctx ctx;
    if (config_path.empty()) throw ConfigError("config error at <args>: --config is required");
    ctx.cfg = load_config(config_path);
    ctx.out_dir = out_override.empty() ? ctx.cfg.out_dir : fs::path(out_override);
    ctx.threads = std::max(1u, threads);
    ctx.seed = seed;
    ctx.log = &out;

    if (c_disp->parsed()) return cmd_dispersion(ctx);
    if (c_gain->parsed()) return cmd_gain_profile(ctx);
    if (c_match->parsed()) return cmd_phase_match(ctx);
    if (c_comp->parsed()) return cmd_compression(ctx);
    if (c_asym->parsed()) return cmd_asymmetry(ctx);
    if (c_cal->parsed()) return cmd_calibrate_pump(ctx);
    if (c_sim->parsed()) return cmd_noise_sim(ctx);
    if (c_fit->parsed()) return cmd_noise_fit(ctx, fit_data, fit_sidecar);
    if (c_loss->parsed()) return cmd_loss_budget(ctx);
    err << "no subcommand\n";
    return 2;
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << "input error: " << e.what() << "\n";
    return 2;
  } catch (const FitError& e) {
    err << "fit error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    err << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace kita
