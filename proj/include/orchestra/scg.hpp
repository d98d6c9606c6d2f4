#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace orchestra {

/// Objective for minimisation. Writes the gradient into `grad` when it is non-null.
/// May throw (e.g. numerical breakdown); a throwing trial point is treated as a rejected step.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct ScgOptions {
  int max_iters = 200;
  double tol_x = 1e-8;
  double tol_f = 1e-10;
};

struct ScgResult {
  Eigen::VectorXd x;
  double f = 0.0;
  /// Objective at the start point followed by the value after each accepted step.
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
};

/// Moller's scaled conjugate gradient method. Only steps that do not increase the objective
/// are accepted. Throws std::runtime_error if the objective at `x0` is not finite.
ScgResult scg_minimize(const Objective& f, Eigen::VectorXd x0, const ScgOptions& opts = {});

}  // namespace orchestra
