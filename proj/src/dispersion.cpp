#include "kita/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <json.hpp>

#include "kita/constants.hpp"
#include "kita/io.hpp"
#include "kita/parallel.hpp"

namespace kita {

DispersionTable::DispersionTable(CellParams cell, std::optional<LoadingPattern> loading,
                                 long n_cells, std::vector<double> freq_hz,
                                 std::vector<double> k, std::vector<double> s21_mag,
                                 std::vector<std::string> warnings)
    : cell_(cell), loading_(std::move(loading)), n_cells_(n_cells),
      freq_(std::move(freq_hz)), k_(std::move(k)), s21_mag_(std::move(s21_mag)),
      warnings_(std::move(warnings)) {
  if (freq_.size() < 4 || freq_.size() != k_.size() || freq_.size() != s21_mag_.size())
    throw DomainError("DispersionTable: need >= 4 consistent samples");
}

double DispersionTable::k_star(std::size_t i) const {
  return k_[i] - two_pi * freq_[i] * std::sqrt(cell_.l_d * cell_.c);
}

std::vector<double> DispersionTable::k_star_all() const {
  std::vector<double> ks(freq_.size());
  for (std::size_t i = 0; i < freq_.size(); i++) ks[i] = k_star(i);
  return ks;
}

namespace {

double catmull_rom(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  long i = std::clamp<long>(it - xs.begin() - 1, 1, static_cast<long>(xs.size()) - 3);
  double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
  double p0 = ys[i - 1], p1 = ys[i], p2 = ys[i + 1], p3 = ys[i + 2];
  return p1 + 0.5 * t * (p2 - p0 +
         t * (2 * p0 - 5 * p1 + 4 * p2 - p3 + t * (3 * (p1 - p2) + p3 - p0)));
}

}  // namespace

double DispersionTable::k_at(double omega) const {
  double f = omega / two_pi;
  if (f < freq_.front() || f > freq_.back())
    throw DomainError("DispersionTable::k_at: frequency outside table range");
  return catmull_rom(freq_, k_, f);
}

double DispersionTable::k_star_at(double omega) const {
  return k_at(omega) - omega * std::sqrt(cell_.l_d * cell_.c);
}

double DispersionTable::s21_mag_at(double omega) const {
  double f = omega / two_pi;
  if (f < freq_.front() || f > freq_.back())
    throw DomainError("DispersionTable::s21_mag_at: frequency outside table range");
  return catmull_rom(freq_, s21_mag_, f);
}

std::optional<double> DispersionTable::stopband_center_hz(double above_hz,
                                                          double mag_threshold) const {
  std::size_t best = freq_.size();
  for (std::size_t i = 0; i < freq_.size(); i++) {
    if (freq_[i] < above_hz) continue;
    if (best == freq_.size() || s21_mag_[i] < s21_mag_[best]) best = i;
  }
  if (best == freq_.size() || s21_mag_[best] >= mag_threshold) return std::nullopt;
  return freq_[best];
}

std::string DispersionTable::to_csv() const {
  std::string s = "freq_hz,k_rad_per_cell,k_star_rad_per_cell,s21_mag\n";
  for (std::size_t i = 0; i < freq_.size(); i++) {
    s += format_double(freq_[i]);
    s += ',';
    s += format_double(k_[i]);
    s += ',';
    s += format_double(k_star(i));
    s += ',';
    s += format_double(s21_mag_[i]);
    s += '\n';
  }
  return s;
}

std::string DispersionTable::to_json() const {
  nlohmann::json j;
  j["line"]["l_d_henry"] = cell_.l_d;
  j["line"]["c_farad"] = cell_.c;
  j["line"]["l_f_henry"] = cell_.l_f;
  if (loading_) {
    j["line"]["loading"] = {
        {"n_unloaded", loading_->n_unloaded},
        {"n_loaded", loading_->n_loaded},
        {"z_load_ohm", loading_->z_load},
        {"l_load_henry", loading_->l_load},
        {"n_supercells", loading_->n_supercells},
    };
  }
  j["n_cells"] = n_cells_;
  j["freq_hz"] = freq_;
  j["k_rad_per_cell"] = k_;
  j["k_star_rad_per_cell"] = k_star_all();
  j["s21_mag"] = s21_mag_;
  j["warnings"] = warnings_;
  return j.dump(2);
}

namespace {

// low-frequency phase estimate used to anchor the unwrap at the first grid
// point; exact as omega -> 0
double baseline_k(double omega, const CellParams& cell,
                  const std::optional<LoadingPattern>& loading) {
  double ku = omega * std::sqrt(cell.l_d * cell.c);
  if (!loading) return ku;
  double kl = omega * std::sqrt(cell.l_d * loading->loaded_capacitance(cell));
  return (loading->n_unloaded * ku + loading->n_loaded * kl) / loading->cells_per_supercell();
}

struct PhasePoint {
  double phase;
  double log_mag;
};

}  // namespace

DispersionTable dispersion_relation(const CellParams& cell,
                                    const std::optional<LoadingPattern>& loading,
                                    long n_cells, std::vector<double> grid_hz,
                                    double z0, unsigned threads) {
  if (grid_hz.size() < 4)
    throw DomainError("dispersion_relation: grid needs at least 4 points");
  for (std::size_t i = 1; i < grid_hz.size(); i++)
    if (!(grid_hz[i] > grid_hz[i - 1]))
      throw DomainError("dispersion_relation: grid must be strictly increasing");
  if (loading && n_cells != loading->total_cells())
    throw DomainError("dispersion_relation: n_cells must equal the loading pattern total");
  if (n_cells < 1) throw DomainError("dispersion_relation: n_cells must be >= 1");

  std::vector<std::string> warnings;

  // poles of the lossless cells; grid points too close are nudged one local step
  std::vector<double> poles;
  poles.push_back(std::sqrt(2.0 / (cell.l_f * cell.c)) / two_pi);
  if (loading)
    poles.push_back(std::sqrt(2.0 / (loading->l_load * loading->loaded_capacitance(cell))) /
                    two_pi);
  for (std::size_t i = 0; i < grid_hz.size(); i++) {
    for (double fp : poles) {
      if (std::abs(grid_hz[i] - fp) < 1e-6 * fp) {
        // half a local step keeps the point strictly between its neighbors
        double step = (i + 1 < grid_hz.size() ? grid_hz[i + 1] - grid_hz[i]
                                              : grid_hz[i] - grid_hz[i - 1]);
        grid_hz[i] += 0.5 * step;
        warnings.push_back("grid point at " + format_double(fp) +
                           " Hz nudged off a cell resonance pole");
      }
    }
  }
  for (std::size_t i = 1; i < grid_hz.size(); i++)
    if (!(grid_hz[i] > grid_hz[i - 1]))
      throw DomainError("dispersion_relation: grid not strictly increasing after "
                        "pole nudging; re-grid away from the cell resonances");

  long n_units = loading ? loading->n_supercells : n_cells;

  auto eval = [&](double f_hz) -> PhasePoint {
    SParams sp = line_sparams(two_pi * f_hz, cell, loading ? &*loading : nullptr,
                              n_units, z0);
    return {sp.s21_phase, sp.s21_log_mag};
  };

  const std::size_t n = grid_hz.size();
  std::vector<PhasePoint> pts(n);
  parallel_for(n, threads, [&](std::size_t i) { pts[i] = eval(grid_hz[i]); });

  // Unwrap by predictive marching. The phase slope (group delay) of the
  // lossless cascade varies continuously, so each hop is kept below pi/2 of
  // the locally extrapolated phase: intervals whose predicted change exceeds
  // that (with an 8x slope margin) are bisected before evaluation, and the
  // 2pi translate nearest the extrapolation is taken. A nearest-to-previous
  // rule alone can silently skip whole turns on coarse grids.
  std::vector<double> k(n), mag(n);
  double est0 = -baseline_k(two_pi * grid_hz[0], cell, loading) * double(n_cells);
  double prev_u = pts[0].phase + two_pi * std::round((est0 - pts[0].phase) / two_pi);
  double prev_f = grid_hz[0];
  double slope = est0 / grid_hz[0];  // d(phase)/df estimate, < 0
  k[0] = -prev_u / double(n_cells);
  mag[0] = std::exp(pts[0].log_mag);

  constexpr double slope_margin = 8.0;

  // the line's asymptotic group delay; the local slope estimate never
  // predicts below it (stopbands stall the phase, the exit does not)
  double floor_slope = two_pi * baseline_k(1.0, cell, loading) * double(n_cells);

  std::function<double(double, double, int)> advance =
      [&](double fb, double phb, int depth) -> double {
    double hop_pred =
        std::max(std::abs(slope), floor_slope) * (fb - prev_f) * slope_margin;
    if (hop_pred > pi / 2) {
      if (depth >= 60)
        throw UnwrapError("dispersion_relation: phase unwrap failed near " +
                          format_double(fb) + " Hz (phase slope too steep)");
      double fm = 0.5 * (prev_f + fb);
      advance(fm, eval(fm).phase, depth + 1);
      return advance(fb, phb, depth + 1);
    }
    double predicted = prev_u + slope * (fb - prev_f);
    double u = phb + two_pi * std::round((predicted - phb) / two_pi);
    if (!std::isfinite(u))
      throw UnwrapError("dispersion_relation: non-finite phase near " +
                        format_double(fb) + " Hz");
    if (std::abs(u - predicted) > pi / 2) {
      if (depth >= 60)
        throw UnwrapError("dispersion_relation: phase unwrap failed near " +
                          format_double(fb) + " Hz (grid too coarse)");
      double fm = 0.5 * (prev_f + fb);
      advance(fm, eval(fm).phase, depth + 1);
      return advance(fb, phb, depth + 1);
    }
    slope = (u - prev_u) / (fb - prev_f);
    prev_u = u;
    prev_f = fb;
    return u;
  };

  for (std::size_t i = 1; i < n; i++) {
    double u = advance(grid_hz[i], pts[i].phase, 0);
    k[i] = -u / double(n_cells);
    mag[i] = std::exp(pts[i].log_mag);
  }

  // per-step continuity guard: one grid step may not hop more than the
  // supercell Bragg phase
  double cells_per_unit = loading ? loading->cells_per_supercell() : 1.0;
  double bound = pi / cells_per_unit;
  for (std::size_t i = 1; i < n; i++) {
    if (std::abs(k[i] - k[i - 1]) >= bound)
      throw UnwrapError("dispersion_relation: k step exceeds the Bragg bound near " +
                        format_double(grid_hz[i]) + " Hz (grid too coarse)");
  }

  return DispersionTable(cell, loading, n_cells, std::move(grid_hz), std::move(k),
                         std::move(mag), std::move(warnings));
}

DispersionTable build_dispersion(const CellParams& cell,
                                 const std::optional<LoadingPattern>& loading,
                                 long n_cells_if_unloaded, const DispersionOptions& opt) {
  if (!(opt.f_start_hz > 0.0) || !(opt.f_stop_hz > opt.f_start_hz) || opt.points < 16)
    throw DomainError("build_dispersion: bad frequency grid options");
  long n_cells = loading ? loading->total_cells() : n_cells_if_unloaded;

  std::vector<double> base(opt.points);
  double step = (opt.f_stop_hz - opt.f_start_hz) / (opt.points - 1);
  for (int i = 0; i < opt.points; i++) base[i] = opt.f_start_hz + step * i;

  DispersionTable coarse =
      dispersion_relation(cell, loading, n_cells, base, opt.z0, opt.threads);
  auto stop = coarse.stopband_center_hz();
  if (!stop || opt.refine_factor <= 1) return coarse;

  std::vector<double> grid = base;
  double lo = *stop - opt.refine_window_hz, hi = *stop + opt.refine_window_hz;
  double fine = step / opt.refine_factor;
  for (int i = 0; i + 1 < opt.points; i++) {
    if (base[i] < lo || base[i] > hi) continue;
    for (int j = 1; j < opt.refine_factor; j++) grid.push_back(base[i] + fine * j);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return dispersion_relation(cell, loading, n_cells, std::move(grid), opt.z0, opt.threads);
}

}  // namespace kita
