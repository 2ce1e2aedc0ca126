#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kita/dispersion.hpp"
#include "kita/model.hpp"
#include "kita/noise.hpp"
#include "kita/units.hpp"

namespace kita {

// Declarative run configuration (JSON). Sections are validated before any
// computation starts; the first problem raises ConfigError with the key path.
struct RunConfig {
  PowerConvention convention = PowerConvention::half;

  // line
  std::optional<CellParams> cell;
  std::optional<LoadingPattern> loading;
  long n_cells = 0;  // for unloaded lines; loaded lines take it from the pattern

  // drive
  std::optional<PumpDrive> drive;
  std::vector<double> pumps_hz;  // multi-pump sweeps; defaults to drive frequency

  // frequency grids and sweep controls
  DispersionOptions grid;
  double signal_start_hz = 2.5e9;
  double signal_stop_hz = 6.5e9;
  int signal_points = 201;
  double seed_ratio = 0.01;
  std::vector<double> seed_ratios;       // asymmetry sweeps
  std::vector<double> probe_freqs_hz;    // compression
  double probe_dbm_start = -80.0;
  double probe_dbm_stop = -45.0;
  int probe_points = 36;
  double rtol = 1e-9;
  double atol_scale = 1e-12;
  double tilt_delta_hz = 1e9;

  // noise chain / sweep
  std::optional<NoiseChain> chain;
  double chain_signal_hz = 4.5e9;
  double chain_idler_hz = 4.3812e9;
  double temp_kelvin = 0.03;
  double v_offset_volt = 0.0;
  double v_max_volt = 6.48e-4;
  int v_points = 2000;
  double noise_sigma_quanta = 0.0;
  double rbw_hz = 5e6;
  std::optional<ComponentLosses> losses;

  // pump-shift calibration
  double measured_phase_shift_rad = 0.0;

  // output
  std::filesystem::path out_dir = "out";

  std::string source_text;   // raw config bytes (hashed into outputs)
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace kita
