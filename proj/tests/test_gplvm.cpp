#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "orchestra/gplvm.hpp"
#include "orchestra/scg.hpp"

using namespace orchestra;

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

GplvmModel random_model(std::mt19937_64& rng, int n, int q, int k) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  GplvmModel m;
  m.k = k;
  m.q = q;
  m.X = Eigen::MatrixXd::NullaryExpr(n, q, [&] { return g(rng); });
  m.Y = Eigen::MatrixXd::NullaryExpr(n, 3 * k, [&] { return 0.2 * g(rng); });
  m.data_mean = Eigen::VectorXd::Constant(3 * k, 0.5);
  m.hyper = {u(rng), u(rng), 10.0 * u(rng)};
  return m;
}

// Points on a circular arc in a 2-D plane of the 15-D palette space.
struct Arc {
  Eigen::VectorXd center, u, v;
  double radius = 0.3;
  Eigen::VectorXd at(double t) const { return center + radius * (std::cos(t) * u + std::sin(t) * v); }
};

Arc make_arc() {
  Arc a;
  a.center = Eigen::VectorXd::Constant(15, 0.5);
  a.u = Eigen::VectorXd::Zero(15);
  a.v = Eigen::VectorXd::Zero(15);
  for (int i = 0; i < 15; ++i) {
    a.u(i) = (i % 3 == 0) ? 1.0 : 0.0;
    a.v(i) = (i % 3 == 1) ? 1.0 : (i % 3 == 2 ? -0.5 : 0.0);
  }
  a.u.normalize();
  a.v.normalize();
  return a;
}

PaletteSet arc_set(const Arc& arc, int n, double t0, double t1) {
  Eigen::MatrixXd m(n, 15);
  for (int i = 0; i < n; ++i) m.row(i) = arc.at(t0 + (t1 - t0) * i / (n - 1)).transpose();
  return from_spf_matrix(m);
}

double relative_error(double analytic, double numeric) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  return scale < 1e-8 ? 0.0 : std::abs(analytic - numeric) / scale;
}

}  // namespace

TEST_CASE("scg minimises a quadratic and a Rosenbrock valley") {
  Eigen::MatrixXd A(3, 3);
  A << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
  const Eigen::Vector3d b(1, -2, 0.5);
  const Objective quad = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    if (g) *g = A * x - b;
    return 0.5 * x.dot(A * x) - b.dot(x);
  };
  const auto r = scg_minimize(quad, Eigen::Vector3d::Zero());
  CHECK((r.x - A.ldlt().solve(b)).norm() < 1e-6);
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1]);

  const Objective rosen = [](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    if (g) {
      g->resize(2);
      (*g)(0) = -2 * (1 - x(0)) - 400 * x(0) * (x(1) - x(0) * x(0));
      (*g)(1) = 200 * (x(1) - x(0) * x(0));
    }
    return (1 - x(0)) * (1 - x(0)) + 100 * (x(1) - x(0) * x(0)) * (x(1) - x(0) * x(0));
  };
  ScgOptions o;
  o.max_iters = 2000;
  const auto rr = scg_minimize(rosen, Eigen::Vector2d(-1.2, 1.0), o);
  CHECK(rr.x(0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(rr.x(1) == doctest::Approx(1.0).epsilon(1e-3));

  const Objective bad = [](const Eigen::VectorXd&, Eigen::VectorXd*) { return std::nan(""); };
  CHECK_THROWS(scg_minimize(bad, Eigen::Vector2d::Zero()));
}

TEST_CASE("nll gradients match central differences") {
  std::mt19937_64 rng(17);
  const double h = 1e-5;
  for (int t = 0; t < 5; ++t) {
    auto m = random_model(rng, 6, 2, 3);
    const auto g = gplvm_grad(m);
    for (int i = 0; i < m.X.rows(); ++i) {
      for (int j = 0; j < m.X.cols(); ++j) {
        auto p = m, q = m;
        p.X(i, j) += h;
        q.X(i, j) -= h;
        CHECK(relative_error(g.dX(i, j), (gplvm_nll(p) - gplvm_nll(q)) / (2 * h)) < 1e-4);
      }
    }
    auto log_step = [&](double GplvmHyper::*field) {
      auto p = m, q = m;
      p.hyper.*field *= std::exp(h);
      q.hyper.*field *= std::exp(-h);
      return (gplvm_nll(p) - gplvm_nll(q)) / (2 * h);
    };
    CHECK(relative_error(g.d_log_alpha, log_step(&GplvmHyper::alpha)) < 1e-4);
    CHECK(relative_error(g.d_log_gamma, log_step(&GplvmHyper::gamma)) < 1e-4);
    CHECK(relative_error(g.d_log_beta, log_step(&GplvmHyper::beta)) < 1e-4);
  }
}

TEST_CASE("closed-form likelihoods") {
  std::mt19937_64 rng(18);
  SUBCASE("single point") {
    auto m = random_model(rng, 1, 2, 3);
    const double s = m.hyper.alpha + 1.0 / m.hyper.beta;
    const double d = 9.0;
    const double expect = 0.5 * d * std::log(s) + 0.5 * m.Y.squaredNorm() / s + 0.5 * d * kLog2Pi;
    CHECK(gplvm_nll(m) == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("noise-only model, doubling beta") {
    auto m = random_model(rng, 6, 2, 3);
    m.hyper.alpha = 1e-14;
    const double n = 6, d = 9, tr = m.Y.squaredNorm();
    const double before = gplvm_nll(m);
    m.hyper.beta *= 2.0;
    const double after = gplvm_nll(m);
    // NLL = -ND/2 log(beta) + beta/2 tr(YY^T) + const
    const double delta = -0.5 * n * d * std::log(2.0) + 0.5 * (m.hyper.beta / 2.0) * tr;
    CHECK(after - before == doctest::Approx(delta).epsilon(1e-8));
  }
}

TEST_CASE("robust cholesky jitter ladder") {
  Eigen::MatrixXd singular = Eigen::MatrixXd::Ones(3, 3);
  double jitter = -1;
  const auto llt = robust_cholesky(singular, &jitter);
  CHECK(jitter > 0.0);
  CHECK(jitter <= 1e-4);
  Eigen::MatrixXd negative = -Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS(robust_cholesky(negative));
}

TEST_CASE("training preconditions and degenerate data") {
  std::mt19937_64 rng(19);
  CHECK_THROWS_AS(train_gplvm(testing::random_set(rng, 7, 5), {4, 10, 0}), std::invalid_argument);
  CHECK_THROWS_AS(train_gplvm(testing::random_set(rng, 20, 1), {3, 10, 0}), std::invalid_argument);

  const auto p = testing::random_palette(rng, 5);
  const auto m = train_gplvm(PaletteSet(5, std::vector<Palette>(12, p)), {4, 50, 1});
  CHECK(m.degenerate);
  const auto pred = gplvm_backproject(m, Eigen::VectorXd::Zero(4));
  for (int i = 0; i < 5; ++i) CHECK(color_dist(from_spf(pred.mean)[i], p[i]) < 1e-9);
}

TEST_CASE("training decreases the nll and is deterministic") {
  std::mt19937_64 rng(20);
  const auto data = testing::random_set(rng, 30, 5);
  const auto a = train_gplvm(data, {4, 60, 3});
  CHECK(a.dim() == 15);
  CHECK(a.q == 4);
  REQUIRE(a.training_log.size() >= 2);
  for (std::size_t i = 1; i < a.training_log.size(); ++i) CHECK(a.training_log[i] <= a.training_log[i - 1]);
  CHECK(gplvm_nll(a) == doctest::Approx(a.training_log.back()).epsilon(1e-12));
  const auto b = train_gplvm(data, {4, 60, 3});
  CHECK(a.X == b.X);
  CHECK(a.training_log == b.training_log);
}

TEST_CASE("one-dimensional curve concentrates in one latent dimension") {
  const auto arc = make_arc();
  const auto m = train_gplvm(arc_set(arc, 40, 0.0, 1.2), {4, 200, 5});
  const Eigen::RowVectorXd mean = m.X.colwise().mean();
  Eigen::VectorXd var = (m.X.rowwise() - mean).colwise().squaredNorm().transpose();
  CHECK(var.maxCoeff() / var.sum() >= 0.9);
}

TEST_CASE("back-projection") {
  std::mt19937_64 rng(21);
  auto m = random_model(rng, 8, 2, 3);
  m.X *= 3.0;
  m.hyper = {1.0, 1.0, 1e8};
  const GplvmPredictor pred(m);
  for (int n = 0; n < 8; ++n) {
    const auto p = pred.predict(m.X.row(n).transpose());
    const Eigen::VectorXd truth = m.Y.row(n).transpose() + m.data_mean;
    CHECK((p.mean - truth).cwiseAbs().maxCoeff() < 1e-3);
  }
  const auto far = pred.predict(Eigen::Vector2d(1e3, -1e3));
  CHECK((far.mean - m.data_mean).norm() < 1e-12);
  CHECK(far.variance == doctest::Approx(m.hyper.alpha + 1.0 / m.hyper.beta));
}

TEST_CASE("latent midpoints stay on the curve") {
  const auto arc = make_arc();
  const double t0 = 0.0, t1 = 2.0;
  const int n = 21;
  const auto m = train_gplvm(arc_set(arc, n, t0, t1), {2, 200, 7});
  const GplvmPredictor pred(m);
  const double dt = (t1 - t0) / (n - 1);
  for (int i : {3, 8, 13}) {
    const int j = i + 4;
    const Eigen::VectorXd mid = 0.5 * (m.X.row(i) + m.X.row(j)).transpose();
    const Eigen::VectorXd y = pred.predict(mid).mean;
    const double half = 0.5 * (j - i) * dt;
    const double sagitta = arc.radius * (1.0 - std::cos(half));
    const Eigen::VectorXd chord_mid = 0.5 * (arc.at(t0 + i * dt) + arc.at(t0 + j * dt));
    double to_curve = 1e9;
    for (int s = 0; s <= 2000; ++s) to_curve = std::min(to_curve, (arc.at(t0 + (t1 - t0) * s / 2000.0) - y).norm());
    CHECK(to_curve + 0.5 * sagitta <= (y - chord_mid).norm());
  }
}

TEST_CASE("density") {
  std::mt19937_64 rng(22);
  const auto m = train_gplvm(testing::random_set(rng, 20, 4), {3, 80, 1});
  const GplvmPredictor pred(m);
  const auto grid = gplvm_density(pred, std::nullopt, 64);
  CHECK(grid.values.size() == 64 * 64);
  const auto dims = most_significant_dims(m);
  CHECK(grid.dim_x == dims.first);
  CHECK(grid.dim_y == dims.second);
  const auto e = default_extents(m, dims.first, dims.second);
  CHECK(grid.extents.x_min == e.x_min);
  CHECK(grid.extents.y_max == e.y_max);
  const double w = m.X.col(dims.first).maxCoeff() - m.X.col(dims.first).minCoeff();
  CHECK(e.x_min == doctest::Approx(m.X.col(dims.first).minCoeff() - 0.1 * w));

  // A training point versus a point three extents away.
  Eigen::VectorXd at = Eigen::VectorXd::Zero(3), away = Eigen::VectorXd::Zero(3);
  at(dims.first) = m.X(0, dims.first);
  at(dims.second) = m.X(0, dims.second);
  away(dims.first) = at(dims.first) + 3 * (e.x_max - e.x_min);
  away(dims.second) = at(dims.second) + 3 * (e.y_max - e.y_min);
  const LatentExtents near_box{at(dims.first) - 1e-3, at(dims.first) + 1e-3, at(dims.second) - 1e-3, at(dims.second) + 1e-3};
  const LatentExtents far_box{away(dims.first) - 1e-3, away(dims.first) + 1e-3, away(dims.second) - 1e-3, away(dims.second) + 1e-3};
  CHECK(gplvm_density(pred, dims, 1, near_box).values[0] > gplvm_density(pred, dims, 1, far_box).values[0]);

  CHECK_THROWS_AS(gplvm_density(pred, std::pair{1, 1}, 8), std::invalid_argument);
  CHECK_THROWS_AS(gplvm_density(pred, std::pair{0, 3}, 8), std::invalid_argument);
}

TEST_CASE("completion") {
  std::mt19937_64 rng(23);
  const auto data = testing::random_set(rng, 30, 4);
  const auto m = train_gplvm(data, {3, 150, 2});
  const GplvmPredictor pred(m);
  const auto training = m.training_palettes();

  SUBCASE("fully observed") {
    const auto r = gplvm_complete(pred, PartialPalette::full(training[5]), 200);
    const Eigen::VectorXd diff = to_spf(r.palette) - to_spf(training[5]);
    CHECK(diff.cwiseAbs().maxCoeff() <= 2.0 * std::sqrt(r.variance));
  }

  SUBCASE("one missing color from a training palette") {
    int within = 0;
    for (int n = 0; n < 10; ++n) {
      auto p = PartialPalette::full(training[n]);
      p.slots[n % 4].reset();
      const auto r = gplvm_complete(pred, p, 50);
      within += color_dist(r.palette[n % 4], training[n][n % 4]) < 0.05;
    }
    CHECK(within == 10);
  }

  SUBCASE("zero iterations back-project the nearest training point") {
    PartialPalette p(4);
    p.slots[1] = training[7][1];
    p.slots[2] = training[7][2];
    const auto r = gplvm_complete(pred, p, 0);
    CHECK(r.latent == m.X.row(7).transpose());
    CHECK(r.palette == from_spf(pred.predict(m.X.row(7).transpose()).mean));
  }

  SUBCASE("clamping keeps observed slots") {
    PartialPalette p(4);
    p.slots[0] = LabColor{0.9, 0.1, 0.2};
    const auto r = gplvm_complete(pred, p, 20, true);
    CHECK(r.palette[0] == *p.slots[0]);
  }

  SUBCASE("preconditions") {
    CHECK_THROWS_AS(gplvm_complete(pred, PartialPalette(4), 10), std::invalid_argument);
    CHECK_THROWS_AS(gplvm_complete(pred, PartialPalette::full(testing::random_palette(rng, 5)), 10), std::invalid_argument);
  }
}
