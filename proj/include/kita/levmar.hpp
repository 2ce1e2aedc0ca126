#pragma once

#include <functional>
#include <vector>

namespace kita {

// residual model: predicted value for data point i at parameters p
using LmModel = std::function<double(const std::vector<double>& p, std::size_t i)>;

struct LmOptions {
  int max_iterations = 200;
  double step_tol = 1e-10;  // relative parameter step
  double lambda0 = 1e-3;
};

struct LmResult {
  std::vector<double> params;
  std::vector<double> covariance;  // (J^T J)^-1, row-major m x m; scale by sigma^2
  double chi2 = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Levenberg-Marquardt with diagonal damping and forward-difference Jacobian.
// Declares convergence on a small relative step or when no damped step
// improves chi^2.
LmResult lm_fit(const LmModel& model, const std::vector<double>& y,
                std::vector<double> p0, const LmOptions& opt = {});

// Solves the symmetric positive definite system A x = b (Cholesky); used by
// the linear fitting steps. A is row-major n x n.
std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b);

}  // namespace kita
