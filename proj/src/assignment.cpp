#include "orchestra/assignment.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace orchestra {

namespace {

using BoolGrid = std::vector<std::vector<char>>;

bool try_augment(int row, const BoolGrid& allowed, const std::vector<char>& col_blocked, std::vector<char>& visited,
                 std::vector<int>& match_col) {
  const int n = static_cast<int>(allowed.size());
  for (int j = 0; j < n; ++j) {
    if (!allowed[row][j] || col_blocked[j] || visited[j]) continue;
    visited[j] = 1;
    if (match_col[j] < 0 || try_augment(match_col[j], allowed, col_blocked, visited, match_col)) {
      match_col[j] = row;
      return true;
    }
  }
  return false;
}

// Can rows [first_row, n) be matched into the unblocked columns using allowed edges only?
bool has_perfect_matching(int first_row, const BoolGrid& allowed, const std::vector<char>& col_blocked) {
  const int n = static_cast<int>(allowed.size());
  std::vector<int> match_col(n, -1);
  for (int i = first_row; i < n; ++i) {
    std::vector<char> visited(n, 0);
    if (!try_augment(i, allowed, col_blocked, visited, match_col)) return false;
  }
  return true;
}

}  // namespace

AssignmentResult hungarian(const Eigen::MatrixXd& cost) {
  if (cost.rows() != cost.cols()) throw std::invalid_argument("assignment requires a square cost matrix");
  const int n = static_cast<int>(cost.rows());
  if (n == 0) return {};
  if (!cost.allFinite()) throw std::invalid_argument("assignment cost matrix must be finite");

  // Shifting by the minimum leaves the optimal permutation unchanged.
  const Eigen::MatrixXd a = cost.array() - cost.minCoeff();
  const double inf = std::numeric_limits<double>::infinity();

  // Shortest augmenting paths with row/column potentials, 1-indexed; column 0 is the root.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> found(n);
  for (int j = 1; j <= n; ++j) found[p[j] - 1] = j - 1;

  // Optimal matchings are exactly the perfect matchings on zero-reduced-cost edges of the
  // optimal dual. Walk rows in order, taking the smallest column that still completes one.
  const double eps = 1e-12 * (1.0 + a.maxCoeff());
  BoolGrid tight(n, std::vector<char>(n, 0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) tight[i][j] = a(i, j) - u[i + 1] - v[j + 1] <= eps;
    tight[i][found[i]] = 1;
  }

  std::vector<int> lex(n, -1);
  std::vector<char> col_used(n, 0);
  bool lex_ok = true;
  for (int i = 0; i < n && lex_ok; ++i) {
    lex_ok = false;
    for (int j = 0; j < n; ++j) {
      if (col_used[j] || !tight[i][j]) continue;
      col_used[j] = 1;
      if (has_perfect_matching(i + 1, tight, col_used)) {
        lex[i] = j;
        lex_ok = true;
        break;
      }
      col_used[j] = 0;
    }
  }

  auto total = [&](const std::vector<int>& perm) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += cost(i, perm[i]);
    return s;
  };

  AssignmentResult out{found, total(found)};
  if (lex_ok) {
    const double lex_cost = total(lex);
    if (lex_cost <= out.total_cost) out = {std::move(lex), lex_cost};
  }
  return out;
}

Eigen::MatrixXd row_set_costs(const PaletteSet& p, const PaletteSet& q) {
  if (p.k() != q.k()) throw std::invalid_argument("row-set alignment requires equal K");
  if (p.empty() || q.empty()) throw std::invalid_argument("row-set alignment requires non-empty sets");
  const int k = p.k();
  std::vector<std::vector<LabColor>> prow, qrow;
  for (int s = 0; s < k; ++s) {
    prow.push_back(p.row(s));
    qrow.push_back(q.row(s));
  }
  Eigen::MatrixXd cost(k, k);
  for (int s = 0; s < k; ++s) {
    for (int h = 0; h < k; ++h) cost(s, h) = mhd(prow[s], qrow[h]);
  }
  return cost;
}

AssignmentResult align_row_sets(const PaletteSet& p, const PaletteSet& q) { return hungarian(row_set_costs(p, q)); }

}  // namespace orchestra
