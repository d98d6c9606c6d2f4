#include <doctest.h>

#include <algorithm>
#include <limits>
#include <random>

#include "helpers.hpp"
#include "orchestra/assignment.hpp"

using namespace orchestra;

namespace {

double brute_min(const Eigen::MatrixXd& c) {
  auto p = testing::identity(static_cast<int>(c.rows()));
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (int i = 0; i < c.rows(); ++i) s += c(i, p[i]);
    best = std::min(best, s);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

double cost_of(const Eigen::MatrixXd& c, const std::vector<int>& p) {
  double s = 0.0;
  for (int i = 0; i < c.rows(); ++i) s += c(i, p[i]);
  return s;
}

bool is_permutation(const std::vector<int>& p) {
  auto q = p;
  std::sort(q.begin(), q.end());
  return q == testing::identity(static_cast<int>(p.size()));
}

}  // namespace

TEST_CASE("trivial matrices") {
  Eigen::MatrixXd one(1, 1);
  one << 3.5;
  const auto r1 = hungarian(one);
  CHECK(r1.perm == std::vector<int>{0});
  CHECK(r1.total_cost == 3.5);

  Eigen::MatrixXd eye = Eigen::MatrixXd::Ones(5, 5) - Eigen::MatrixXd::Identity(5, 5);
  const auto r = hungarian(eye);
  CHECK(r.perm == testing::identity(5));
  CHECK(r.total_cost == 0.0);
}

TEST_CASE("bad input") {
  CHECK_THROWS_AS(hungarian(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
  Eigen::MatrixXd nan = Eigen::MatrixXd::Zero(2, 2);
  nan(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(hungarian(nan), std::invalid_argument);
}

TEST_CASE("random matrices match brute force") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-5.0, 10.0);
  for (int t = 0; t < 200; ++t) {
    const int k = 2 + t % 5;
    Eigen::MatrixXd c(k, k);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) c(i, j) = u(rng);
    }
    const auto r = hungarian(c);
    REQUIRE(is_permutation(r.perm));
    CHECK(r.total_cost == doctest::Approx(brute_min(c)).epsilon(1e-12));
    CHECK(r.total_cost == doctest::Approx(cost_of(c, r.perm)).epsilon(1e-12));
  }
}

TEST_CASE("6x6 matrices against all 720 permutations") {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> u(0, 99);
  for (int t = 0; t < 30; ++t) {
    Eigen::MatrixXd c(6, 6);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) c(i, j) = u(rng);
    }
    CHECK(hungarian(c).total_cost == brute_min(c));
  }
}

TEST_CASE("ties resolve to the lexicographically smallest optimum") {
  CHECK(hungarian(Eigen::MatrixXd::Zero(4, 4)).perm == testing::identity(4));
  CHECK(hungarian(Eigen::MatrixXd::Constant(3, 3, 7.0)).perm == testing::identity(3));

  // Small integer costs produce many ties; compare with the first optimum in lexicographic order.
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> u(0, 2);
  for (int t = 0; t < 100; ++t) {
    const int k = 2 + t % 5;
    Eigen::MatrixXd c(k, k);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) c(i, j) = u(rng);
    }
    const double best = brute_min(c);
    auto p = testing::identity(k);
    while (cost_of(c, p) != best) std::next_permutation(p.begin(), p.end());
    CHECK(hungarian(c).perm == p);
  }
}

TEST_CASE("row-set alignment") {
  std::mt19937_64 rng(5);
  const int k = 5;
  const auto p = testing::random_set(rng, 6, k);

  SUBCASE("identical sets align to identity") {
    const auto r = align_row_sets(p, p);
    CHECK(r.perm == testing::identity(k));
    CHECK(r.total_cost == 0.0);
  }

  SUBCASE("cyclic shift is undone") {
    std::vector<int> shift(k);
    for (int h = 0; h < k; ++h) shift[h] = (h + 1) % k;
    std::vector<Palette> qs;
    for (const auto& x : p.palettes()) qs.push_back(x.permuted(shift));
    const auto r = align_row_sets(p, PaletteSet(k, qs));
    for (int i = 0; i < k; ++i) CHECK(r.perm[i] == (i + k - 1) % k);
    CHECK(r.total_cost == 0.0);
  }

  SUBCASE("singletons reduce to color assignment") {
    for (int t = 0; t < 40; ++t) {
      const int kk = 2 + t % 5;
      const auto a = testing::random_set(rng, 1, kk);
      const auto b = testing::random_set(rng, 1, kk);
      Eigen::MatrixXd c(kk, kk);
      for (int i = 0; i < kk; ++i) {
        for (int j = 0; j < kk; ++j) c(i, j) = color_dist(a[0][i], b[0][j]);
      }
      CHECK(align_row_sets(a, b).total_cost == doctest::Approx(brute_min(c)).epsilon(1e-12));
    }
  }

  SUBCASE("K mismatch") {
    CHECK_THROWS_AS(align_row_sets(p, testing::random_set(rng, 2, 4)), std::invalid_argument);
  }
}
