#pragma once

#include <vector>

#include <Eigen/Core>

#include "orchestra/color.hpp"

namespace orchestra {

/// perm[k] = column assigned to row k.
struct AssignmentResult {
  std::vector<int> perm;
  double total_cost = 0.0;
};

/// Exact minimum-cost perfect matching on a square matrix (O(K^3) shortest augmenting paths).
/// Among optimal matchings the lexicographically smallest permutation is returned.
/// Throws std::invalid_argument for non-square or non-finite input.
AssignmentResult hungarian(const Eigen::MatrixXd& cost);

/// cost(k, h) = mhd(P^k, Q^h), where P^k is the set of k-th colors across P.
Eigen::MatrixXd row_set_costs(const PaletteSet& p, const PaletteSet& q);

/// Permutation g minimising sum_k mhd(P^k, Q^g(k)).
AssignmentResult align_row_sets(const PaletteSet& p, const PaletteSet& q);

}  // namespace orchestra
