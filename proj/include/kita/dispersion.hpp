#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kita/abcd.hpp"
#include "kita/model.hpp"

namespace kita {

struct DispersionOptions {
  double f_start_hz = 0.05e9;
  double f_stop_hz = 12e9;
  int points = 12000;
  // the region +-refine_window_hz around the detected stopband minimum is
  // re-gridded refine_factor times denser (unwrapping needs the density there)
  double refine_window_hz = 300e6;
  int refine_factor = 10;
  double z0 = 50.0;
  unsigned threads = 1;
};

// Sampled k(omega) of a line, from the cascaded-ABCD s21 phase:
//   k = -unwrap(arg s21) / n_cells          [rad per cell]
//   k_star = k - omega sqrt(l_d c)          [nonlinear part]
class DispersionTable {
 public:
  DispersionTable(CellParams cell, std::optional<LoadingPattern> loading,
                  long n_cells, std::vector<double> freq_hz,
                  std::vector<double> k, std::vector<double> s21_mag,
                  std::vector<std::string> warnings);

  const CellParams& cell() const { return cell_; }
  const std::optional<LoadingPattern>& loading() const { return loading_; }
  long n_cells() const { return n_cells_; }

  const std::vector<double>& freq_hz() const { return freq_; }
  const std::vector<double>& k() const { return k_; }
  const std::vector<double>& s21_mag() const { return s21_mag_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  double k_star(std::size_t i) const;
  std::vector<double> k_star_all() const;

  double f_min_hz() const { return freq_.front(); }
  double f_max_hz() const { return freq_.back(); }

  // cubic (Catmull-Rom) interpolation of k at angular frequency omega
  double k_at(double omega) const;
  double k_star_at(double omega) const;
  double s21_mag_at(double omega) const;

  // frequency of minimum |s21| above `above_hz` (stopband center), if a dip
  // below `mag_threshold` exists
  std::optional<double> stopband_center_hz(double above_hz = 1e9,
                                           double mag_threshold = 0.5) const;

  std::string to_csv() const;
  std::string to_json() const;

 private:
  CellParams cell_;
  std::optional<LoadingPattern> loading_;
  long n_cells_;
  std::vector<double> freq_;
  std::vector<double> k_;
  std::vector<double> s21_mag_;
  std::vector<std::string> warnings_;
};

// Computes the dispersion relation on `grid_hz` (strictly increasing). Grid
// points within pole_rel_tol of a cell resonance are nudged one local step and
// flagged in warnings. Throws UnwrapError if the phase cannot be tracked.
DispersionTable dispersion_relation(const CellParams& cell,
                                    const std::optional<LoadingPattern>& loading,
                                    long n_cells, std::vector<double> grid_hz,
                                    double z0 = 50.0, unsigned threads = 1);

// Default-grid builder: uniform base grid plus local refinement around the
// detected stopband.
DispersionTable build_dispersion(const CellParams& cell,
                                 const std::optional<LoadingPattern>& loading,
                                 long n_cells_if_unloaded,
                                 const DispersionOptions& opt = {});

}  // namespace kita
