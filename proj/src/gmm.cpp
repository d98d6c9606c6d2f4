#include "orchestra/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "orchestra/errors.hpp"
#include "orchestra/random.hpp"

namespace orchestra {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

// log N(x | mu, S) given the Cholesky factor of S.
double log_normal(const Eigen::VectorXd& x, const Eigen::VectorXd& mu, const Eigen::LLT<Eigen::MatrixXd>& llt) {
  const Eigen::VectorXd r = llt.matrixL().solve(x - mu);
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + logdet + r.squaredNorm());
}

Eigen::LLT<Eigen::MatrixXd> factor(const Eigen::MatrixXd& s) {
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) throw NumericError("mixture covariance is not positive definite");
  return llt;
}

std::vector<Eigen::VectorXd> kmeanspp_rows(const Eigen::MatrixXd& z, int c, std::uint64_t seed) {
  Rng rng(seed);
  const auto n = static_cast<std::uint64_t>(z.rows());
  std::vector<Eigen::VectorXd> centers{z.row(static_cast<Eigen::Index>(uniform_index(rng, n))).transpose()};
  Eigen::VectorXd d2 = (z.rowwise() - centers[0].transpose()).rowwise().squaredNorm();
  while (static_cast<int>(centers.size()) < c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0) {
      double target = uniform_unit(rng) * total;
      for (pick = 0; pick + 1 < z.rows(); ++pick) {
        target -= d2(pick);
        if (target < 0 && d2(pick) > 0) break;
      }
    } else {
      pick = static_cast<Eigen::Index>(uniform_index(rng, n));
    }
    centers.push_back(z.row(pick).transpose());
    d2 = d2.cwiseMin((z.rowwise() - centers.back().transpose()).rowwise().squaredNorm());
  }
  return centers;
}

}  // namespace

GmmModel train_pca_gmm(const PaletteSet& s, const GmmTrainOptions& opts) {
  const int n = s.size();
  const int dim = 3 * s.k();
  const int d = std::min(opts.d, dim);
  const int c = opts.components;
  if (d < 1 || c < 1) throw std::invalid_argument("PCA-GMM needs d >= 1 and C >= 1");
  if (n <= d || n <= c) throw std::invalid_argument("PCA-GMM needs more palettes than both d and C");

  GmmModel model;
  model.k = s.k();
  const Eigen::MatrixXd raw = to_spf_matrix(s);
  model.data_mean = raw.colwise().mean().transpose();
  const Eigen::MatrixXd yc = raw.rowwise() - model.data_mean.transpose();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(yc.transpose() * yc / n);
  model.basis = eig.eigenvectors().rightCols(d).rowwise().reverse();
  for (int j = 0; j < d; ++j) {
    Eigen::Index arg;
    model.basis.col(j).cwiseAbs().maxCoeff(&arg);
    if (model.basis(arg, j) < 0) model.basis.col(j) *= -1.0;
  }
  const Eigen::VectorXd evals = eig.eigenvalues().cwiseMax(0.0);
  model.residual_variance = d < dim ? evals.head(dim - d).mean() : 0.0;

  const Eigen::MatrixXd z = yc * model.basis;
  const Eigen::MatrixXd global_cov = z.transpose() * z / n;
  model.regularization = 1e-6 * global_cov.trace() / d;
  if (!(model.regularization > 0)) model.regularization = 1e-12;
  const double rho = model.regularization;
  const Eigen::MatrixXd ridge = rho * Eigen::MatrixXd::Identity(d, d);

  model.means = kmeanspp_rows(z, c, opts.seed);
  model.covariances.assign(c, global_cov + ridge);
  model.weights.assign(c, 1.0 / c);

  Eigen::MatrixXd logp(n, c);
  double previous = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter <= opts.max_iters; ++iter) {
    // E-step and objective at the current parameters.
    double penalty = 0.0;
    for (int j = 0; j < c; ++j) {
      const auto llt = factor(model.covariances[j]);
      penalty += llt.solve(Eigen::MatrixXd::Identity(d, d)).trace();
      const double lw = std::log(std::max(model.weights[j], std::numeric_limits<double>::min()));
      for (int i = 0; i < n; ++i) logp(i, j) = lw + log_normal(z.row(i).transpose(), model.means[j], llt);
    }
    double ll = 0.0;
    Eigen::MatrixXd resp(n, c);
    for (int i = 0; i < n; ++i) {
      const double lse = log_sum_exp(logp.row(i).transpose());
      ll += lse;
      resp.row(i) = (logp.row(i).array() - lse).exp();
    }
    const double objective = ll - 0.5 * rho * penalty;
    model.em_trace.push_back(objective);
    if (iter == opts.max_iters) break;
    if (iter > 0 && std::abs(objective - previous) <= opts.tolerance * std::max(1.0, std::abs(objective))) break;
    previous = objective;

    // M-step (MAP under the ridge penalty).
    for (int j = 0; j < c; ++j) {
      const double nj = resp.col(j).sum();
      model.weights[j] = nj / n;
      if (nj < 1e-8) continue;  // starved component keeps its shape
      const Eigen::VectorXd mu = z.transpose() * resp.col(j) / nj;
      const Eigen::MatrixXd centered = z.rowwise() - mu.transpose();
      const Eigen::MatrixXd scatter = centered.transpose() * resp.col(j).asDiagonal() * centered;
      model.means[j] = mu;
      model.covariances[j] = (scatter + ridge) / nj;
      model.covariances[j] = 0.5 * (model.covariances[j] + model.covariances[j].transpose());
    }
  }
  return model;
}

double gmm_log_density(const GmmModel& model, const Eigen::VectorXd& z) {
  Eigen::VectorXd terms(model.components());
  for (int j = 0; j < model.components(); ++j) {
    terms(j) = std::log(model.weights[j]) + log_normal(z, model.means[j], factor(model.covariances[j]));
  }
  return log_sum_exp(terms);
}

Palette gmm_complete(const GmmModel& model, const PartialPalette& p) {
  p.validate();
  if (p.k() != model.k) throw std::invalid_argument("partial palette K does not match the model");
  const int dim = 3 * model.k;

  Eigen::VectorXd y = Eigen::VectorXd::Zero(dim);
  std::vector<int> obs, miss;
  for (int s = 0; s < p.k(); ++s) {
    for (int t = 0; t < 3; ++t) (p.slots[s] ? obs : miss).push_back(3 * s + t);
    if (p.slots[s]) y.segment<3>(3 * s) << p.slots[s]->l, p.slots[s]->a, p.slots[s]->b;
  }
  if (miss.empty()) return from_spf(y);

  const auto no = static_cast<Eigen::Index>(obs.size());
  const auto nm = static_cast<Eigen::Index>(miss.size());
  Eigen::VectorXd yo(no);
  for (Eigen::Index i = 0; i < no; ++i) yo(i) = y(obs[i]);

  const double noise = model.residual_variance + 1e-10;
  Eigen::VectorXd logw(model.components());
  std::vector<Eigen::VectorXd> cond(model.components());
  for (int j = 0; j < model.components(); ++j) {
    const Eigen::VectorXd mu = model.data_mean + model.basis * model.means[j];
    Eigen::MatrixXd cov = model.basis * model.covariances[j] * model.basis.transpose();
    cov.diagonal().array() += noise;

    Eigen::VectorXd mu_o(no), mu_m(nm);
    Eigen::MatrixXd s_oo(no, no), s_mo(nm, no);
    for (Eigen::Index a = 0; a < no; ++a) {
      mu_o(a) = mu(obs[a]);
      for (Eigen::Index b = 0; b < no; ++b) s_oo(a, b) = cov(obs[a], obs[b]);
    }
    for (Eigen::Index a = 0; a < nm; ++a) {
      mu_m(a) = mu(miss[a]);
      for (Eigen::Index b = 0; b < no; ++b) s_mo(a, b) = cov(miss[a], obs[b]);
    }
    const auto llt = factor(s_oo);
    logw(j) = std::log(std::max(model.weights[j], std::numeric_limits<double>::min())) + log_normal(yo, mu_o, llt);
    cond[j] = mu_m + s_mo * llt.solve(yo - mu_o);
  }
  const Eigen::VectorXd w = (logw.array() - log_sum_exp(logw)).exp();
  Eigen::VectorXd ym = Eigen::VectorXd::Zero(nm);
  for (int j = 0; j < model.components(); ++j) ym += w(j) * cond[j];
  for (Eigen::Index a = 0; a < nm; ++a) y(miss[a]) = ym(a);
  return from_spf(y);
}

}  // namespace orchestra
