#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "orchestra/color.hpp"
#include "orchestra/partial.hpp"

namespace orchestra {

/// RBF kernel k(x, x') = alpha * exp(-gamma/2 |x - x'|^2) plus white noise 1/beta.
struct GplvmHyper {
  double alpha = 1.0;
  double gamma = 1.0;
  double beta = 100.0;
};

struct GplvmModel {
  int k = 0;
  int q = 4;
  Eigen::VectorXd data_mean;  ///< 3K
  Eigen::MatrixXd Y;          ///< N x 3K, centered
  Eigen::MatrixXd X;          ///< N x q latent points
  GplvmHyper hyper;
  /// NLL at initialisation and after every accepted optimiser step.
  std::vector<double> training_log;
  bool degenerate = false;

  int n() const { return static_cast<int>(Y.rows()); }
  int dim() const { return static_cast<int>(Y.cols()); }
  /// Training palettes in model slot order (Y + mean).
  PaletteSet training_palettes() const;
};

struct GplvmTrainOptions {
  int q = 4;
  int iters = 200;
  std::uint64_t seed = 0;
};

/// PCA initialisation of X, then joint SCG optimisation of X and the log hyperparameters.
/// Requires N >= 2q and q < 3K.
GplvmModel train_gplvm(const PaletteSet& sorted, const GplvmTrainOptions& opts = {});

struct GplvmGradient {
  Eigen::MatrixXd dX;
  double d_log_alpha = 0.0;
  double d_log_gamma = 0.0;
  double d_log_beta = 0.0;
};

/// Negative log marginal likelihood, all output dimensions sharing one kernel.
double gplvm_nll(const GplvmModel& model);
/// Gradient of gplvm_nll w.r.t. X and the log hyperparameters.
GplvmGradient gplvm_grad(const GplvmModel& model);

/// Kernel matrix of the model's latent points, noise included.
Eigen::MatrixXd gplvm_kernel(const Eigen::MatrixXd& X, const GplvmHyper& h);

/// Cholesky with a jitter ladder 1e-8 .. 1e-4 on the diagonal; throws std::runtime_error beyond.
Eigen::LLT<Eigen::MatrixXd> robust_cholesky(const Eigen::MatrixXd& K, double* jitter_used = nullptr);

struct Prediction {
  Eigen::VectorXd mean;  ///< 3K, data mean included
  double variance = 0.0;
};

/// Cached factorisation of a trained model, shared by back-projection, density and completion.
class GplvmPredictor {
 public:
  explicit GplvmPredictor(const GplvmModel& model);

  const GplvmModel& model() const { return model_; }
  Prediction predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd kernel_vector(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Negative log predictive density of the observed dims at latent x, and its gradient.
  double projection_objective(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const std::vector<int>& dims,
                              Eigen::VectorXd* grad) const;

 private:
  GplvmModel model_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::MatrixXd weights_;  ///< K^-1 Y
};

Prediction gplvm_backproject(const GplvmModel& model, const Eigen::VectorXd& x);

struct LatentExtents {
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
  bool empty() const { return !(x_max > x_min) || !(y_max > y_min); }
};

/// Log predictive density of the back-projected point over a 2-D latent slice (other dims 0).
/// values are row-major: values[row * resolution + col], row along dim_y.
struct DensityGrid {
  int dim_x = 0;
  int dim_y = 1;
  int resolution = 0;
  LatentExtents extents;
  std::vector<double> values;

  double cell_area() const;
  /// Latent coordinates of the centre of cell (col, row).
  std::pair<double, double> cell_center(int col, int row) const;
};

/// Two latent dims with the largest variance across X (ties by lower index).
std::pair<int, int> most_significant_dims(const GplvmModel& model);

/// Bounding box of the training latents on (i, j) plus a 10% margin.
LatentExtents default_extents(const GplvmModel& model, int i, int j);

DensityGrid gplvm_density(const GplvmPredictor& predictor, std::optional<std::pair<int, int>> dims, int resolution,
                          LatentExtents extents = {});

struct CompletionResult {
  Palette palette;
  Eigen::VectorXd latent;
  double variance = 0.0;
};

/// Projects the observed dims into latent space (missing dims carry zero precision),
/// starting from the training point nearest in the observed dims, for `sim_iters` SCG steps,
/// then back-projects.
CompletionResult gplvm_complete(const GplvmPredictor& predictor, const PartialPalette& p, int sim_iters,
                                bool clamp_observed_slots = false);

}  // namespace orchestra
