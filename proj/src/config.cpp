#include "kita/config.hpp"

#include <json.hpp>

#include "kita/constants.hpp"
#include "kita/errors.hpp"
#include "kita/io.hpp"

namespace kita {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw ConfigError("config error at " + path + ": " + why);
}

double num(const json& j, const std::string& path, const char* key,
           std::optional<double> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    fail(path + "." + key, "missing required number");
  }
  if (!j[key].is_number()) fail(path + "." + key, "must be a number");
  return j[key].get<double>();
}

long integer(const json& j, const std::string& path, const char* key,
             std::optional<long> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    fail(path + "." + key, "missing required integer");
  }
  if (!j[key].is_number_integer()) fail(path + "." + key, "must be an integer");
  return j[key].get<long>();
}

std::vector<double> num_list(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) return {};
  if (!j[key].is_array()) fail(path + "." + key, "must be an array of numbers");
  std::vector<double> v;
  for (const auto& e : j[key]) {
    if (!e.is_number()) fail(path + "." + key, "must be an array of numbers");
    v.push_back(e.get<double>());
  }
  return v;
}

IlValue il_value(const json& j, const std::string& path) {
  if (j.is_number()) return IlValue(j.get<double>());
  if (j.is_array()) {
    std::vector<std::pair<double, double>> t;
    for (const auto& e : j) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        fail(path, "table entries must be [freq_hz, il_db] pairs");
      t.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    try {
      return IlValue(std::move(t));
    } catch (const DomainError& e) {
      fail(path, e.what());
    }
  }
  fail(path, "must be a number (flat dB) or a [[freq_hz, il_db], ...] table");
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config error at <root>: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config error at <root>: must be a JSON object");

  RunConfig cfg;
  cfg.source_text = json_text;

  if (j.contains("power_convention")) {
    std::string pc = j["power_convention"].is_string()
                         ? j["power_convention"].get<std::string>()
                         : std::string();
    if (pc == "half") cfg.convention = PowerConvention::half;
    else if (pc == "full") cfg.convention = PowerConvention::full;
    else fail("power_convention", "must be \"half\" or \"full\"");
  }

  if (j.contains("line")) {
    const json& l = j["line"];
    if (!l.is_object()) fail("line", "must be an object");
    double ld = num(l, "line", "l_d_henry");
    double c = num(l, "line", "c_farad");
    double lf = num(l, "line", "l_f_henry");
    try {
      cfg.cell.emplace(ld, c, lf);
    } catch (const DomainError& e) {
      fail("line", e.what());
    }
    if (l.contains("loading")) {
      const json& lo = l["loading"];
      if (!lo.is_object()) fail("line.loading", "must be an object");
      try {
        cfg.loading.emplace((int)integer(lo, "line.loading", "n_unloaded"),
                            (int)integer(lo, "line.loading", "n_loaded"),
                            num(lo, "line.loading", "z_load_ohm"),
                            num(lo, "line.loading", "l_load_henry"),
                            (int)integer(lo, "line.loading", "n_supercells"));
      } catch (const DomainError& e) {
        fail("line.loading", e.what());
      }
      cfg.n_cells = cfg.loading->total_cells();
    }
    if (l.contains("n_cells")) cfg.n_cells = integer(l, "line", "n_cells");
    if (cfg.loading && l.contains("n_cells") && cfg.n_cells != cfg.loading->total_cells())
      fail("line.n_cells", "conflicts with the loading pattern total");
    if (!cfg.loading && cfg.n_cells <= 0)
      fail("line.n_cells", "required (positive) for unloaded lines");
  }

  if (j.contains("drive")) {
    const json& d = j["drive"];
    if (!d.is_object()) fail("drive", "must be an object");
    double istar = num(d, "drive", "i_star_ampere");
    double idc = num(d, "drive", "i_dc_ampere");
    double ip;
    if (d.contains("i_pump_over_i_star")) {
      double ratio = num(d, "drive", "i_pump_over_i_star");
      if (!(ratio > 0.0)) fail("drive.i_pump_over_i_star", "must be positive");
      ip = istar / ratio;
    } else {
      ip = num(d, "drive", "i_pump_ampere");
    }
    double fp = num(d, "drive", "pump_freq_hz");
    try {
      cfg.drive.emplace(idc, istar, ip, two_pi * fp);
    } catch (const DomainError& e) {
      fail("drive", e.what());
    }
    cfg.pumps_hz = num_list(d, "drive", "pumps_hz");
    for (double p : cfg.pumps_hz)
      if (!(p > 0.0)) fail("drive.pumps_hz", "pump frequencies must be positive");
    if (cfg.pumps_hz.empty()) cfg.pumps_hz = {fp};
  }

  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    if (!s.is_object()) fail("sweep", "must be an object");
    cfg.grid.f_start_hz = num(s, "sweep", "freq_start_hz", cfg.grid.f_start_hz);
    cfg.grid.f_stop_hz = num(s, "sweep", "freq_stop_hz", cfg.grid.f_stop_hz);
    cfg.grid.points = (int)integer(s, "sweep", "freq_points", cfg.grid.points);
    if (!(cfg.grid.f_start_hz > 0.0) || !(cfg.grid.f_stop_hz > cfg.grid.f_start_hz))
      fail("sweep.freq_start_hz", "need 0 < start < stop");
    if (cfg.grid.points < 16) fail("sweep.freq_points", "need >= 16");
    cfg.signal_start_hz = num(s, "sweep", "signal_start_hz", cfg.signal_start_hz);
    cfg.signal_stop_hz = num(s, "sweep", "signal_stop_hz", cfg.signal_stop_hz);
    cfg.signal_points = (int)integer(s, "sweep", "signal_points", cfg.signal_points);
    if (!(cfg.signal_stop_hz > cfg.signal_start_hz) || cfg.signal_points < 2)
      fail("sweep.signal_start_hz", "need start < stop and >= 2 points");
    cfg.seed_ratio = num(s, "sweep", "seed_ratio", cfg.seed_ratio);
    if (!(cfg.seed_ratio > 0.0)) fail("sweep.seed_ratio", "must be positive");
    cfg.seed_ratios = num_list(s, "sweep", "seed_ratios");
    for (double r : cfg.seed_ratios)
      if (!(r > 0.0)) fail("sweep.seed_ratios", "ratios must be positive");
    cfg.probe_freqs_hz = num_list(s, "sweep", "probe_freqs_hz");
    cfg.probe_dbm_start = num(s, "sweep", "probe_dbm_start", cfg.probe_dbm_start);
    cfg.probe_dbm_stop = num(s, "sweep", "probe_dbm_stop", cfg.probe_dbm_stop);
    cfg.probe_points = (int)integer(s, "sweep", "probe_points", cfg.probe_points);
    if (!(cfg.probe_dbm_stop > cfg.probe_dbm_start) || cfg.probe_points < 2)
      fail("sweep.probe_dbm_start", "need start < stop and >= 2 points");
    cfg.rtol = num(s, "sweep", "rtol", cfg.rtol);
    cfg.atol_scale = num(s, "sweep", "atol_scale", cfg.atol_scale);
    if (!(cfg.rtol > 0.0) || !(cfg.atol_scale > 0.0))
      fail("sweep.rtol", "tolerances must be positive");
    cfg.tilt_delta_hz = num(s, "sweep", "tilt_delta_hz", cfg.tilt_delta_hz);
    cfg.v_max_volt = num(s, "sweep", "v_max_volt", cfg.v_max_volt);
    cfg.v_points = (int)integer(s, "sweep", "v_points", cfg.v_points);
    if (cfg.v_points < 8) fail("sweep.v_points", "need >= 8");
    cfg.noise_sigma_quanta = num(s, "sweep", "noise_sigma_quanta", cfg.noise_sigma_quanta);
    if (cfg.noise_sigma_quanta < 0.0) fail("sweep.noise_sigma_quanta", "must be >= 0");
  }

  if (j.contains("chain")) {
    const json& c = j["chain"];
    if (!c.is_object()) fail("chain", "must be an object");
    if (c.contains("eta1_signal")) {
      try {
        cfg.chain.emplace(num(c, "chain", "eta1_signal"),
                          num(c, "chain", "eta1_idler"),
                          num(c, "chain", "eta2"),
                          db_to_linear(num(c, "chain", "kit_gain_db")),
                          db_to_linear(num(c, "chain", "hemt_gain_db", 35.0)),
                          db_to_linear(num(c, "chain", "room_gain_db", 50.0)),
                          num(c, "chain", "hemt_noise_quanta"),
                          num(c, "chain", "excess_signal_quanta", 0.0),
                          num(c, "chain", "excess_idler_quanta", 0.0));
      } catch (const DomainError& e) {
        fail("chain", e.what());
      }
    }
    cfg.chain_signal_hz = num(c, "chain", "signal_freq_hz", cfg.chain_signal_hz);
    cfg.chain_idler_hz = num(c, "chain", "idler_freq_hz", cfg.chain_idler_hz);
    if (!(cfg.chain_signal_hz > 0.0) || !(cfg.chain_idler_hz > 0.0))
      fail("chain.signal_freq_hz", "frequencies must be positive");
    cfg.temp_kelvin = num(c, "chain", "temp_kelvin", cfg.temp_kelvin);
    if (!(cfg.temp_kelvin > 0.0)) fail("chain.temp_kelvin", "must be positive");
    cfg.v_offset_volt = num(c, "chain", "v_offset_volt", cfg.v_offset_volt);
    cfg.rbw_hz = num(c, "chain", "rbw_hz", cfg.rbw_hz);
    if (!(cfg.rbw_hz > 0.0)) fail("chain.rbw_hz", "must be positive");
    if (c.contains("insertion_loss_db")) {
      const json& il = c["insertion_loss_db"];
      if (!il.is_object()) fail("chain.insertion_loss_db", "must be an object");
      ComponentLosses cl;
      auto get = [&](const char* key) -> IlValue {
        if (!il.contains(key))
          fail(std::string("chain.insertion_loss_db.") + key, "missing component");
        return il_value(il[key], std::string("chain.insertion_loss_db.") + key);
      };
      cl.sntj = get("sntj");
      cl.bias_tee = get("bias_tee");
      cl.lpf = get("lpf");
      cl.coupler = get("coupler");
      cl.isolator = get("isolator");
      cl.kit = get("kit");
      cfg.losses = std::move(cl);
    }
  }

  if (j.contains("calibration")) {
    const json& c = j["calibration"];
    if (!c.is_object()) fail("calibration", "must be an object");
    cfg.measured_phase_shift_rad =
        num(c, "calibration", "measured_phase_shift_rad", 0.0);
  }

  if (j.contains("output")) {
    const json& o = j["output"];
    if (!o.is_object()) fail("output", "must be an object");
    if (o.contains("dir")) {
      if (!o["dir"].is_string()) fail("output.dir", "must be a string");
      cfg.out_dir = o["dir"].get<std::string>();
    }
  }

  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError& e) {
    throw ConfigError(std::string("config error at <file>: ") + e.what());
  }
  return parse_config(text);
}

}  // namespace kita
