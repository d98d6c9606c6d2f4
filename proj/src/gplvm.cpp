#include "orchestra/gplvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "orchestra/errors.hpp"
#include "orchestra/random.hpp"
#include "orchestra/scg.hpp"

namespace orchestra {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& X) {
  const Eigen::VectorXd sq = X.rowwise().squaredNorm();
  Eigen::MatrixXd r2 = (-2.0 * X * X.transpose()).colwise() + sq;
  r2.rowwise() += sq.transpose();
  r2 = r2.cwiseMax(0.0);
  r2.diagonal().setZero();
  return r2;
}

struct NllTerms {
  double nll = 0.0;
  GplvmGradient grad;
};

NllTerms nll_terms(const Eigen::MatrixXd& X, const GplvmHyper& h, const Eigen::MatrixXd& Y, bool with_grad) {
  const auto n = X.rows();
  const double d = static_cast<double>(Y.cols());
  const Eigen::MatrixXd r2 = squared_distances(X);
  const Eigen::MatrixXd kf = h.alpha * (-0.5 * h.gamma * r2.array()).exp().matrix();
  Eigen::MatrixXd K = kf;
  K.diagonal().array() += 1.0 / h.beta;

  const auto llt = robust_cholesky(K);
  const Eigen::MatrixXd A = llt.solve(Y);
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();

  NllTerms out;
  out.nll = 0.5 * d * logdet + 0.5 * Y.cwiseProduct(A).sum() + 0.5 * static_cast<double>(n) * d * kLog2Pi;
  if (!with_grad) return out;

  const Eigen::MatrixXd kinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd G = 0.5 * (d * kinv - A * A.transpose());
  const Eigen::MatrixXd W = G.cwiseProduct(kf);
  out.grad.d_log_alpha = W.sum();
  out.grad.d_log_beta = -G.trace() / h.beta;
  out.grad.d_log_gamma = -0.5 * h.gamma * W.cwiseProduct(r2).sum();
  const Eigen::VectorXd wsum = W.rowwise().sum();
  out.grad.dX = -2.0 * h.gamma * (wsum.asDiagonal() * X - W * X);
  return out;
}

// Optimiser layout: column-major X, then log alpha, log gamma, log beta.
Eigen::VectorXd pack(const Eigen::MatrixXd& X, const GplvmHyper& h) {
  Eigen::VectorXd w(X.size() + 3);
  w.head(X.size()) = Eigen::Map<const Eigen::VectorXd>(X.data(), X.size());
  w(X.size()) = std::log(h.alpha);
  w(X.size() + 1) = std::log(h.gamma);
  w(X.size() + 2) = std::log(h.beta);
  return w;
}

void unpack(const Eigen::VectorXd& w, Eigen::Index n, Eigen::Index q, Eigen::MatrixXd& X, GplvmHyper& h) {
  X = Eigen::Map<const Eigen::MatrixXd>(w.data(), n, q);
  h.alpha = std::exp(w(n * q));
  h.gamma = std::exp(w(n * q + 1));
  h.beta = std::exp(w(n * q + 2));
}

}  // namespace

PaletteSet GplvmModel::training_palettes() const {
  return from_spf_matrix(Y.rowwise() + data_mean.transpose());
}

Eigen::MatrixXd gplvm_kernel(const Eigen::MatrixXd& X, const GplvmHyper& h) {
  Eigen::MatrixXd K = h.alpha * (-0.5 * h.gamma * squared_distances(X).array()).exp().matrix();
  K.diagonal().array() += 1.0 / h.beta;
  return K;
}

Eigen::LLT<Eigen::MatrixXd> robust_cholesky(const Eigen::MatrixXd& K, double* jitter_used) {
  if (!K.allFinite()) throw NumericError("kernel matrix has non-finite entries");
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() == Eigen::Success) {
    if (jitter_used) *jitter_used = 0.0;
    return llt;
  }
  for (double jitter = 1e-8; jitter <= 1e-4 * 1.0001; jitter *= 10.0) {
    Eigen::MatrixXd Kj = K;
    Kj.diagonal().array() += jitter;
    llt.compute(Kj);
    if (llt.info() == Eigen::Success) {
      if (jitter_used) *jitter_used = jitter;
      return llt;
    }
  }
  throw NumericError("kernel matrix is not positive definite even with 1e-4 jitter");
}

double gplvm_nll(const GplvmModel& model) { return nll_terms(model.X, model.hyper, model.Y, false).nll; }

GplvmGradient gplvm_grad(const GplvmModel& model) { return nll_terms(model.X, model.hyper, model.Y, true).grad; }

GplvmModel train_gplvm(const PaletteSet& sorted, const GplvmTrainOptions& opts) {
  const int n = sorted.size();
  const int dim = 3 * sorted.k();
  if (opts.q < 1 || opts.q >= dim) throw std::invalid_argument("latent dimension must satisfy 1 <= q < 3K");
  if (n < 2 * opts.q) throw std::invalid_argument("GPLVM training needs at least 2q palettes");

  GplvmModel model;
  model.k = sorted.k();
  model.q = opts.q;
  const Eigen::MatrixXd raw = to_spf_matrix(sorted);
  model.data_mean = raw.colwise().mean().transpose();
  model.Y = raw.rowwise() - model.data_mean.transpose();

  const double var = model.Y.squaredNorm() / (static_cast<double>(n) * dim);
  if (var < 1e-12) {
    model.degenerate = true;
    model.X = Eigen::MatrixXd::Zero(n, opts.q);
    model.hyper = {1e-6, 1.0, 1e6};
    model.training_log.push_back(gplvm_nll(model));
    return model;
  }

  // PCA initialisation, scaled so the leading latent coordinate has unit variance.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(model.Y.transpose() * model.Y / n);
  Eigen::MatrixXd basis = eig.eigenvectors().rightCols(opts.q).rowwise().reverse();
  for (int c = 0; c < opts.q; ++c) {
    Eigen::Index arg;
    basis.col(c).cwiseAbs().maxCoeff(&arg);
    if (basis(arg, c) < 0) basis.col(c) *= -1.0;
  }
  Eigen::MatrixXd X = model.Y * basis;
  const double lead_sd = std::sqrt(X.col(0).squaredNorm() / n);
  X /= lead_sd > 0 ? lead_sd : 1.0;
  Rng rng(opts.seed);
  std::normal_distribution<double> jitter(0.0, 1e-3);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] += jitter(rng);

  model.X = X;
  model.hyper = {var, 1.0, 100.0 / var};

  const Eigen::Index q = opts.q;
  const Eigen::MatrixXd& Y = model.Y;
  const Objective objective = [&](const Eigen::VectorXd& w, Eigen::VectorXd* g) {
    Eigen::MatrixXd Xw;
    GplvmHyper hw;
    unpack(w, n, q, Xw, hw);
    const auto t = nll_terms(Xw, hw, Y, g != nullptr);
    if (g) {
      g->resize(w.size());
      g->head(n * q) = Eigen::Map<const Eigen::VectorXd>(t.grad.dX.data(), n * q);
      (*g)(n * q) = t.grad.d_log_alpha;
      (*g)(n * q + 1) = t.grad.d_log_gamma;
      (*g)(n * q + 2) = t.grad.d_log_beta;
    }
    return t.nll;
  };

  ScgOptions scg;
  scg.max_iters = opts.iters;
  ScgResult res;
  try {
    res = scg_minimize(objective, pack(model.X, model.hyper), scg);
  } catch (const std::exception& e) {
    throw NumericError(std::string("GPLVM training aborted: ") + e.what());
  }
  unpack(res.x, n, q, model.X, model.hyper);
  model.training_log = std::move(res.trace);
  return model;
}

GplvmPredictor::GplvmPredictor(const GplvmModel& model)
    : model_(model), chol_(robust_cholesky(gplvm_kernel(model.X, model.hyper))), weights_(chol_.solve(model.Y)) {}

Eigen::VectorXd GplvmPredictor::kernel_vector(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::VectorXd r2 = (model_.X.rowwise() - x.transpose()).rowwise().squaredNorm();
  return model_.hyper.alpha * (-0.5 * model_.hyper.gamma * r2.array()).exp().matrix();
}

Prediction GplvmPredictor::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != model_.q) throw std::invalid_argument("latent point has wrong dimension");
  if (!x.allFinite()) throw std::invalid_argument("latent point must be finite");
  const Eigen::VectorXd k = kernel_vector(x);
  Prediction out;
  out.mean = weights_.transpose() * k + model_.data_mean;
  const double prior = model_.hyper.alpha + 1.0 / model_.hyper.beta;
  out.variance = std::max(prior - k.dot(chol_.solve(k)), 1.0 / model_.hyper.beta * 1e-6);
  return out;
}

double GplvmPredictor::projection_objective(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                            const std::vector<int>& dims, Eigen::VectorXd* grad) const {
  const Eigen::VectorXd k = kernel_vector(x);
  const Eigen::VectorXd kinv_k = chol_.solve(k);
  const double floor = 1e-12;
  const double s2 = std::max(model_.hyper.alpha + 1.0 / model_.hyper.beta - k.dot(kinv_k), floor);

  double sq = 0.0;
  Eigen::VectorXd resid(static_cast<Eigen::Index>(dims.size()));
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const int d = dims[i];
    const double mu = weights_.col(d).dot(k) + model_.data_mean(d);
    resid(static_cast<Eigen::Index>(i)) = y(d) - mu;
    sq += resid(static_cast<Eigen::Index>(i)) * resid(static_cast<Eigen::Index>(i));
  }
  const double m = static_cast<double>(dims.size());
  const double f = 0.5 * sq / s2 + 0.5 * m * (kLog2Pi + std::log(s2));
  if (grad) {
    // dk/dx = -gamma * diag(k) (x - X_n)
    const Eigen::MatrixXd diff = (-(model_.X.rowwise() - x.transpose())).eval();  // rows: x_n - x
    const Eigen::MatrixXd J = model_.hyper.gamma * (k.asDiagonal() * diff);       // N x q
    Eigen::VectorXd dmu_term = Eigen::VectorXd::Zero(model_.q);
    for (std::size_t i = 0; i < dims.size(); ++i) {
      dmu_term -= resid(static_cast<Eigen::Index>(i)) / s2 * (J.transpose() * weights_.col(dims[i]));
    }
    const double ds2_coeff = -0.5 * sq / (s2 * s2) + 0.5 * m / s2;
    const Eigen::VectorXd ds2 = -2.0 * J.transpose() * kinv_k;
    *grad = dmu_term + (s2 > floor ? ds2_coeff : 0.0) * ds2;
  }
  return f;
}

Prediction gplvm_backproject(const GplvmModel& model, const Eigen::VectorXd& x) {
  return GplvmPredictor(model).predict(x);
}

double DensityGrid::cell_area() const {
  return (extents.x_max - extents.x_min) / resolution * (extents.y_max - extents.y_min) / resolution;
}

std::pair<double, double> DensityGrid::cell_center(int col, int row) const {
  return {extents.x_min + (col + 0.5) * (extents.x_max - extents.x_min) / resolution,
          extents.y_min + (row + 0.5) * (extents.y_max - extents.y_min) / resolution};
}

std::pair<int, int> most_significant_dims(const GplvmModel& model) {
  if (model.q < 2) throw std::invalid_argument("density slices need q >= 2");
  const Eigen::RowVectorXd mean = model.X.colwise().mean();
  const Eigen::VectorXd var = (model.X.rowwise() - mean).colwise().squaredNorm().transpose();
  std::vector<int> order(static_cast<std::size_t>(model.q));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return var(a) > var(b); });
  return {order[0], order[1]};
}

LatentExtents default_extents(const GplvmModel& model, int i, int j) {
  LatentExtents e{model.X.col(i).minCoeff(), model.X.col(i).maxCoeff(), model.X.col(j).minCoeff(),
                  model.X.col(j).maxCoeff()};
  const double mx = std::max(0.1 * (e.x_max - e.x_min), 1e-3);
  const double my = std::max(0.1 * (e.y_max - e.y_min), 1e-3);
  e.x_min -= mx;
  e.x_max += mx;
  e.y_min -= my;
  e.y_max += my;
  return e;
}

DensityGrid gplvm_density(const GplvmPredictor& predictor, std::optional<std::pair<int, int>> dims, int resolution,
                          LatentExtents extents) {
  const auto& model = predictor.model();
  const auto [i, j] = dims ? *dims : most_significant_dims(model);
  if (i == j || i < 0 || j < 0 || i >= model.q || j >= model.q) {
    throw std::invalid_argument("density dims must be two distinct latent dimensions");
  }
  if (resolution < 1) throw std::invalid_argument("density resolution must be >= 1");

  DensityGrid grid;
  grid.dim_x = i;
  grid.dim_y = j;
  grid.resolution = resolution;
  grid.extents = extents.empty() ? default_extents(model, i, j) : extents;
  grid.values.resize(static_cast<std::size_t>(resolution) * resolution);
  const double d = model.dim();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(model.q);
  for (int row = 0; row < resolution; ++row) {
    for (int col = 0; col < resolution; ++col) {
      const auto [cx, cy] = grid.cell_center(col, row);
      x(i) = cx;
      x(j) = cy;
      const double s2 = predictor.predict(x).variance;
      grid.values[static_cast<std::size_t>(row) * resolution + col] = -0.5 * d * (kLog2Pi + std::log(s2));
    }
  }
  return grid;
}

CompletionResult gplvm_complete(const GplvmPredictor& predictor, const PartialPalette& p, int sim_iters,
                                bool clamp_observed_slots) {
  p.validate();
  const auto& model = predictor.model();
  if (p.k() != model.k) throw std::invalid_argument("partial palette K does not match the model");

  Eigen::VectorXd y = Eigen::VectorXd::Zero(model.dim());
  std::vector<int> dims;
  for (int s = 0; s < p.k(); ++s) {
    if (!p.slots[s]) continue;
    const auto& c = *p.slots[s];
    y.segment<3>(3 * s) << c.l, c.a, c.b;
    for (int t = 0; t < 3; ++t) dims.push_back(3 * s + t);
  }

  // Start from the training point nearest in the observed dims.
  Eigen::Index nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index n = 0; n < model.Y.rows(); ++n) {
    double dist = 0.0;
    for (int d : dims) {
      const double diff = model.Y(n, d) + model.data_mean(d) - y(d);
      dist += diff * diff;
    }
    if (dist < best) {
      best = dist;
      nearest = n;
    }
  }
  Eigen::VectorXd x = model.X.row(nearest).transpose();

  if (sim_iters > 0 && !model.degenerate) {
    const Objective obj = [&](const Eigen::VectorXd& xv, Eigen::VectorXd* g) {
      return predictor.projection_objective(xv, y, dims, g);
    };
    ScgOptions scg;
    scg.max_iters = sim_iters;
    x = scg_minimize(obj, x, scg).x;
  }

  const auto pred = predictor.predict(x);
  CompletionResult out{from_spf(pred.mean), x, pred.variance};
  if (clamp_observed_slots) out.palette = clamp_observed(out.palette, p);
  return out;
}

}  // namespace orchestra
