#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "orchestra/color.hpp"

namespace orchestra {

/// Palettes whose colors have been permuted into a shared slot order.
/// provenance[n][k] is the index, in the n-th input palette, of the color now in slot k.
struct SortedPaletteSet {
  PaletteSet palettes;
  std::vector<std::vector<int>> provenance;

  int size() const { return palettes.size(); }
  int k() const { return palettes.k(); }
};

/// Wraps a set with identity provenance.
SortedPaletteSet as_sorted(const PaletteSet& x);

struct PartitionResult {
  PaletteSet left;
  PaletteSet right;
  std::vector<int> left_indices;
  std::vector<int> right_indices;
  /// 1 for members of `left`, 0 otherwise, indexed like the input.
  std::vector<int> membership;
};

enum class SortMethod { bps, brightness, hue };

SortMethod parse_sort_method(const std::string& name);
std::string to_string(SortMethod m);

/// Pairwise MHD between palettes treated as color sets.
Eigen::MatrixXd palette_distances(const PaletteSet& x);

/// Coordinates on the first kernel principal component of exp(-mhd^2 / sigma^2), with sigma
/// the median pairwise distance. `dist` must be a symmetric distance matrix.
Eigen::VectorXd kpca_coordinates(const Eigen::MatrixXd& dist);

/// Stable ascending order of the palettes by their KPCA coordinate.
std::vector<int> kpca_permutation(const Eigen::MatrixXd& dist);
std::vector<int> kpca_permutation(const PaletteSet& x);
PaletteSet kpca_order(const PaletteSet& x);

/// Median split of the KPCA order; the lower-coordinate half (ceil(N/2)) is `left`.
PartitionResult partition(const PaletteSet& x);

/// P followed by Q, with every palette of Q permuted by align_row_sets(P, Q).
SortedPaletteSet merge(const SortedPaletteSet& p, const SortedPaletteSet& q);

/// Binary Palette Sort. Palette order of the output matches the input; only colors move.
SortedPaletteSet bps_sort(const PaletteSet& x);

/// Per-palette ascending sort by L.
SortedPaletteSet brightness_sort(const PaletteSet& x);
/// Per-palette ascending sort by atan2(b - 0.5, a - 0.5); neutral colors share one key.
SortedPaletteSet hue_sort(const PaletteSet& x);

SortedPaletteSet sort_palettes(const PaletteSet& x, SortMethod method);

/// sum_n sum_m sum_k |p_n^k - p_m^k| over the current slot order.
double ordering_objective(const PaletteSet& x);

/// Mean over consecutive pairs of the mean slot-wise color distance. Throws when N < 2.
double consecutive_distance(const PaletteSet& x);

}  // namespace orchestra
