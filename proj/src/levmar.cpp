#include "kita/levmar.hpp"

#include <algorithm>
#include <cmath>

#include "kita/errors.hpp"

namespace kita {

namespace {

// in-place Cholesky; returns false when not positive definite
bool cholesky(std::vector<double>& a, std::size_t n) {
  for (std::size_t j = 0; j < n; j++) {
    double s = a[j * n + j];
    for (std::size_t t = 0; t < j; t++) s -= a[j * n + t] * a[j * n + t];
    if (!(s > 0.0)) return false;
    a[j * n + j] = std::sqrt(s);
    for (std::size_t r = j + 1; r < n; r++) {
      double v = a[r * n + j];
      for (std::size_t t = 0; t < j; t++) v -= a[r * n + t] * a[j * n + t];
      a[r * n + j] = v / a[j * n + j];
    }
  }
  return true;
}

void chol_solve(const std::vector<double>& l, std::size_t n, std::vector<double>& x) {
  for (std::size_t j = 0; j < n; j++) {
    for (std::size_t t = 0; t < j; t++) x[j] -= l[j * n + t] * x[t];
    x[j] /= l[j * n + j];
  }
  for (std::size_t jj = n; jj > 0; jj--) {
    std::size_t j = jj - 1;
    for (std::size_t t = j + 1; t < n; t++) x[j] -= l[t * n + j] * x[t];
    x[j] /= l[j * n + j];
  }
}

}  // namespace

std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b) {
  std::size_t n = b.size();
  if (a.size() != n * n) throw DomainError("solve_spd: dimension mismatch");
  if (!cholesky(a, n)) throw FitError("solve_spd: matrix not positive definite");
  chol_solve(a, n, b);
  return b;
}

LmResult lm_fit(const LmModel& model, const std::vector<double>& y,
                std::vector<double> p0, const LmOptions& opt) {
  const std::size_t n = y.size();
  const std::size_t m = p0.size();
  if (n < m) throw FitError("lm_fit: fewer data points than parameters");

  auto chi2_of = [&](const std::vector<double>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; i++) {
      double r = y[i] - model(p, i);
      s += r * r;
    }
    return s;
  };

  LmResult res;
  res.params = std::move(p0);
  res.chi2 = chi2_of(res.params);
  double lambda = opt.lambda0;

  std::vector<double> jac(m * n);       // row j = d model / d p_j over data
  std::vector<double> jtj(m * m), g(m);

  for (int it = 0; it < opt.max_iterations; it++) {
    res.iterations = it + 1;
    for (std::size_t j = 0; j < m; j++) {
      double h = std::max(1e-8 * std::abs(res.params[j]), 1e-12);
      auto q = res.params;
      q[j] += h;
      for (std::size_t i = 0; i < n; i++)
        jac[j * n + i] = (model(q, i) - model(res.params, i)) / h;
    }
    std::fill(jtj.begin(), jtj.end(), 0.0);
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t i = 0; i < n; i++) {
      double r = y[i] - model(res.params, i);
      for (std::size_t j = 0; j < m; j++) {
        g[j] += jac[j * n + i] * r;
        for (std::size_t l = j; l < m; l++)
          jtj[j * m + l] += jac[j * n + i] * jac[l * n + i];
      }
    }
    for (std::size_t j = 0; j < m; j++)
      for (std::size_t l = 0; l < j; l++) jtj[j * m + l] = jtj[l * m + j];

    bool accepted = false;
    for (int tries = 0; tries < 40 && !accepted; tries++) {
      auto damped = jtj;
      for (std::size_t j = 0; j < m; j++) {
        double d = jtj[j * m + j];
        damped[j * m + j] += lambda * (d > 0.0 ? d : 1.0);
      }
      std::vector<double> step;
      try {
        step = solve_spd(std::move(damped), g);
      } catch (const FitError&) {
        lambda *= 10.0;
        continue;
      }
      auto q = res.params;
      for (std::size_t j = 0; j < m; j++) q[j] += step[j];
      double c2 = chi2_of(q);
      if (c2 <= res.chi2) {
        double rel_step = 0.0;
        for (std::size_t j = 0; j < m; j++)
          rel_step = std::max(rel_step,
                              std::abs(step[j]) / std::max(std::abs(q[j]), 1e-12));
        res.params = std::move(q);
        res.chi2 = c2;
        lambda = std::max(lambda * 0.3, 1e-14);
        accepted = true;
        if (rel_step < opt.step_tol) {
          res.converged = true;
        }
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) {  // stationary within damping range
      res.converged = true;
    }
    if (res.converged) break;
  }

  // covariance from the undamped normal matrix; a tiny ridge keeps the
  // inverse finite along numerically null directions
  double trace = 0.0;
  for (std::size_t j = 0; j < m; j++) trace += jtj[j * m + j];
  double ridge = std::max(trace, 1.0) * 1e-14;
  auto a = jtj;
  for (std::size_t j = 0; j < m; j++) a[j * m + j] += ridge;
  res.covariance.assign(m * m, 0.0);
  auto l = a;
  if (cholesky(l, m)) {
    for (std::size_t col = 0; col < m; col++) {
      std::vector<double> e(m, 0.0);
      e[col] = 1.0;
      chol_solve(l, m, e);
      for (std::size_t row = 0; row < m; row++) res.covariance[row * m + col] = e[row];
    }
  }
  return res;
}

}  // namespace kita
