#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "orchestra/color.hpp"
#include "orchestra/partial.hpp"

namespace orchestra {

/// Gaussian mixture fitted in a d-dimensional PCA subspace of the flattened palettes.
struct GmmModel {
  int k = 0;
  Eigen::VectorXd data_mean;  ///< 3K
  Eigen::MatrixXd basis;      ///< 3K x d, orthonormal columns
  /// Mean discarded PCA eigenvalue; isotropic noise outside the subspace.
  double residual_variance = 0.0;
  /// Ridge rho of the covariance update Sigma_c = (S_c + rho I) / N_c.
  double regularization = 0.0;
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> means;        ///< in PCA coordinates
  std::vector<Eigen::MatrixXd> covariances;  ///< in PCA coordinates
  /// Penalised log-likelihood after every EM iteration.
  std::vector<double> em_trace;

  int components() const { return static_cast<int>(weights.size()); }
  int latent_dim() const { return static_cast<int>(basis.cols()); }
};

struct GmmTrainOptions {
  int d = 8;
  int components = 10;
  int max_iters = 200;
  double tolerance = 1e-8;
  std::uint64_t seed = 0;
};

/// PCA to min(d, 3K) dims, then EM with k-means++ seeded means. Requires N > d and N > C.
GmmModel train_pca_gmm(const PaletteSet& s, const GmmTrainOptions& opts = {});

/// Mixture log-density of PCA coordinates z (excluding the ridge penalty).
double gmm_log_density(const GmmModel& model, const Eigen::VectorXd& z);

/// Conditional expectation of the missing dims given the observed ones (Gaussian mixture
/// regression in palette space; each component is W Sigma W^T + residual I). Observed slots
/// are returned as given.
Palette gmm_complete(const GmmModel& model, const PartialPalette& p);

}  // namespace orchestra
