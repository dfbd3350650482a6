#pragma once

#include <functional>

#include <Eigen/Core>

namespace shuttle3d::optim {

struct NelderMeadOptions {
  /// Simplex iterations per run; every restart gets a fresh budget.
  int max_iterations = 2000;
  /// Converged when the spread of simplex values is below
  /// f_tolerance * (1 + |f_best|) and the simplex diameter below x_tolerance.
  double f_tolerance = 1e-8;
  double x_tolerance = 1e-8;
  /// Restarts from the converged vertex with a fresh simplex; stops early when
  /// a restart no longer improves the best value.
  int restarts = 2;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
  int iterations = 0;
  bool converged = false;
};

/// Derivative-free simplex minimisation with dimension-adaptive coefficients.
/// Non-finite objective values are treated as +infinity. `step` gives the
/// initial simplex edge per coordinate.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& start, const Eigen::VectorXd& step,
                             const NelderMeadOptions& options = {});

}  // namespace shuttle3d::optim
