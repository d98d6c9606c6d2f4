#include "orchestra/scg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "orchestra/errors.hpp"

namespace orchestra {

namespace {

double safe_eval(const Objective& f, const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
  try {
    const double v = f(x, grad);
    if (grad && !grad->allFinite()) return std::numeric_limits<double>::infinity();
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  } catch (const std::exception&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

ScgResult scg_minimize(const Objective& f, Eigen::VectorXd x0, const ScgOptions& opts) {
  constexpr double sigma0 = 1e-4;
  constexpr double beta_min = 1e-15;
  constexpr double beta_max = 1e100;

  const auto nparams = x0.size();
  ScgResult res;
  res.x = std::move(x0);

  Eigen::VectorXd grad_new(nparams);
  double f_old = f(res.x, &grad_new);
  if (!std::isfinite(f_old) || !grad_new.allFinite()) {
    throw NumericError("objective is not finite at the starting point");
  }
  res.f = f_old;
  res.trace.push_back(f_old);
  if (nparams == 0 || opts.max_iters <= 0) return res;

  Eigen::VectorXd grad_old = grad_new;
  Eigen::VectorXd d = -grad_new;
  Eigen::VectorXd grad_plus(nparams);
  bool success = true;
  Eigen::Index nsuccess = 0;
  double beta = 1.0;
  double mu = 0.0, kappa = 0.0, gamma = 0.0;

  for (int j = 1; j <= opts.max_iters; ++j) {
    res.iterations = j;
    if (success) {
      mu = d.dot(grad_new);
      if (mu >= 0.0) {
        d = -grad_new;
        mu = d.dot(grad_new);
      }
      kappa = d.squaredNorm();
      if (kappa < std::numeric_limits<double>::epsilon()) {
        res.converged = true;
        return res;
      }
      const double sigma = sigma0 / std::sqrt(kappa);
      const double f_plus = safe_eval(f, res.x + sigma * d, &grad_plus);
      gamma = std::isfinite(f_plus) ? d.dot(grad_plus - grad_new) / sigma : 0.0;
    }

    double delta = gamma + beta * kappa;
    if (delta <= 0.0) {
      delta = beta * kappa;
      beta -= gamma / kappa;
    }
    const double alpha = -mu / delta;

    const Eigen::VectorXd x_new = res.x + alpha * d;
    const double f_new = safe_eval(f, x_new, nullptr);
    const double ratio = 2.0 * (f_new - f_old) / (alpha * mu);

    success = std::isfinite(f_new) && ratio >= 0.0 && f_new <= f_old;
    if (success) {
      ++nsuccess;
      const bool small_step = (alpha * d).cwiseAbs().maxCoeff() < opts.tol_x;
      const bool small_change = std::abs(f_new - f_old) < opts.tol_f;
      res.x = x_new;
      res.f = f_new;
      res.trace.push_back(f_new);
      if (small_step && small_change) {
        res.converged = true;
        return res;
      }
      f_old = f_new;
      grad_old = grad_new;
      f(res.x, &grad_new);
      if (grad_new.squaredNorm() == 0.0) {
        res.converged = true;
        return res;
      }
    }

    if (!(ratio >= 0.25)) beta = std::min(4.0 * beta, beta_max);
    if (ratio > 0.75) beta = std::max(0.5 * beta, beta_min);
    if (beta >= beta_max) return res;

    if (nsuccess == nparams) {
      d = -grad_new;
      nsuccess = 0;
    } else if (success) {
      const double g = (grad_old - grad_new).dot(grad_new) / mu;
      d = g * d - grad_new;
    }
  }
  return res;
}

}  // namespace orchestra
