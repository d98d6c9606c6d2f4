#include "orchestra/bps.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "orchestra/assignment.hpp"

namespace orchestra {

namespace {

std::vector<int> iota_vec(int n) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

Eigen::MatrixXd sub_matrix(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
  const int n = static_cast<int>(idx.size());
  Eigen::MatrixXd out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out(i, j) = m(idx[i], idx[j]);
  }
  return out;
}

// One node of the recursion: input indices in merge order, with their color permutations.
struct Block {
  std::vector<int> members;
  std::vector<std::vector<int>> perms;
};

PaletteSet materialize(const PaletteSet& x, const Block& b) {
  std::vector<Palette> out;
  out.reserve(b.members.size());
  for (std::size_t i = 0; i < b.members.size(); ++i) out.push_back(x[b.members[i]].permuted(b.perms[i]));
  return PaletteSet(x.k(), std::move(out));
}

Block merge_blocks(const PaletteSet& x, Block left, Block right) {
  if (right.members.empty()) return left;
  if (left.members.empty()) return right;
  const auto g = align_row_sets(materialize(x, left), materialize(x, right)).perm;
  for (std::size_t i = 0; i < right.members.size(); ++i) {
    const auto& old = right.perms[i];
    std::vector<int> next(old.size());
    for (std::size_t s = 0; s < old.size(); ++s) next[s] = old[g[s]];
    left.members.push_back(right.members[i]);
    left.perms.push_back(std::move(next));
  }
  return left;
}

constexpr int kParallelThreshold = 64;

Block sort_block(const PaletteSet& x, const Eigen::MatrixXd& dist, const std::vector<int>& members, int depth) {
  if (members.size() == 1) return {members, {iota_vec(x.k())}};

  const auto order = kpca_permutation(sub_matrix(dist, members));
  const std::size_t n_left = (members.size() + 1) / 2;
  std::vector<int> left, right;
  for (std::size_t i = 0; i < order.size(); ++i) (i < n_left ? left : right).push_back(members[order[i]]);

  Block lb, rb;
  if (static_cast<int>(members.size()) >= kParallelThreshold && depth < 3) {
    auto fut = std::async(std::launch::async, [&] { return sort_block(x, dist, right, depth + 1); });
    lb = sort_block(x, dist, left, depth + 1);
    rb = fut.get();
  } else {
    lb = sort_block(x, dist, left, depth + 1);
    rb = sort_block(x, dist, right, depth + 1);
  }
  return merge_blocks(x, std::move(lb), std::move(rb));
}

template <typename Key>
SortedPaletteSet per_palette_sort(const PaletteSet& x, Key key) {
  SortedPaletteSet out;
  std::vector<Palette> palettes;
  palettes.reserve(x.size());
  for (const auto& p : x.palettes()) {
    auto perm = iota_vec(p.k());
    std::stable_sort(perm.begin(), perm.end(), [&](int i, int j) { return key(p[i]) < key(p[j]); });
    palettes.push_back(p.permuted(perm));
    out.provenance.push_back(std::move(perm));
  }
  out.palettes = PaletteSet(x.k(), std::move(palettes));
  return out;
}

}  // namespace

SortedPaletteSet as_sorted(const PaletteSet& x) {
  SortedPaletteSet out{x, {}};
  out.provenance.assign(x.size(), iota_vec(x.k()));
  return out;
}

SortMethod parse_sort_method(const std::string& name) {
  if (name == "bps") return SortMethod::bps;
  if (name == "brightness") return SortMethod::brightness;
  if (name == "hue") return SortMethod::hue;
  throw std::invalid_argument("unknown sort method: " + name);
}

std::string to_string(SortMethod m) {
  switch (m) {
    case SortMethod::bps: return "bps";
    case SortMethod::brightness: return "brightness";
    case SortMethod::hue: return "hue";
  }
  return "unknown";
}

Eigen::MatrixXd palette_distances(const PaletteSet& x) {
  const int n = x.size();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) d(i, j) = d(j, i) = mhd(x[i].colors(), x[j].colors());
  }
  return d;
}

Eigen::VectorXd kpca_coordinates(const Eigen::MatrixXd& dist) {
  const int n = static_cast<int>(dist.rows());
  if (n <= 1) return Eigen::VectorXd::Zero(n);

  std::vector<double> pairs;
  pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) pairs.push_back(dist(i, j));
  }
  auto mid = pairs.begin() + static_cast<std::ptrdiff_t>(pairs.size() / 2);
  std::nth_element(pairs.begin(), mid, pairs.end());
  double sigma = *mid;
  if (pairs.size() % 2 == 0) sigma = 0.5 * (sigma + *std::max_element(pairs.begin(), mid));
  if (!(sigma > 0.0)) sigma = 1.0;

  const Eigen::MatrixXd kernel = (-(dist.array().square()) / (sigma * sigma)).exp().matrix();
  const Eigen::MatrixXd centering =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  Eigen::MatrixXd centered = centering * kernel * centering;
  centered = 0.5 * (centered + centered.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(centered);
  const double lambda = eig.eigenvalues()(n - 1);
  // Indefinite kernels: a non-positive leading eigenvalue carries no projection.
  if (!(lambda > 0.0)) return Eigen::VectorXd::Zero(n);
  Eigen::VectorXd coord = eig.eigenvectors().col(n - 1) * std::sqrt(lambda);

  const double scale = coord.cwiseAbs().maxCoeff();
  for (int i = 0; i < n; ++i) {
    if (std::abs(coord(i)) > 1e-9 * scale) {
      if (coord(i) > 0) coord = -coord;
      break;
    }
  }
  return coord;
}

std::vector<int> kpca_permutation(const Eigen::MatrixXd& dist) {
  const Eigen::VectorXd coord = kpca_coordinates(dist);
  auto order = iota_vec(static_cast<int>(coord.size()));
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return coord(i) < coord(j); });
  return order;
}

std::vector<int> kpca_permutation(const PaletteSet& x) { return kpca_permutation(palette_distances(x)); }

PaletteSet kpca_order(const PaletteSet& x) {
  const auto order = kpca_permutation(x);
  return x.subset(order);
}

PartitionResult partition(const PaletteSet& x) {
  if (x.size() < 2) throw std::invalid_argument("partition requires at least 2 palettes");
  const auto order = kpca_permutation(x);
  PartitionResult out;
  out.membership.assign(x.size(), 0);
  const std::size_t n_left = (order.size() + 1) / 2;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i < n_left) {
      out.left_indices.push_back(order[i]);
      out.membership[order[i]] = 1;
    } else {
      out.right_indices.push_back(order[i]);
    }
  }
  out.left = x.subset(out.left_indices);
  out.right = x.subset(out.right_indices);
  return out;
}

SortedPaletteSet merge(const SortedPaletteSet& p, const SortedPaletteSet& q) {
  if (q.palettes.empty()) return p;
  if (p.palettes.empty()) return q;
  if (p.k() != q.k()) throw std::invalid_argument("merge requires equal K");
  const auto g = align_row_sets(p.palettes, q.palettes).perm;

  SortedPaletteSet out = p;
  for (int i = 0; i < q.size(); ++i) {
    out.palettes.push_back(q.palettes[i].permuted(g));
    const auto& old = q.provenance[i];
    std::vector<int> next(old.size());
    for (std::size_t s = 0; s < old.size(); ++s) next[s] = old[g[s]];
    out.provenance.push_back(std::move(next));
  }
  return out;
}

SortedPaletteSet bps_sort(const PaletteSet& x) {
  if (x.empty()) throw std::invalid_argument("bps_sort requires at least one palette");
  const auto dist = palette_distances(x);
  const Block root = sort_block(x, dist, iota_vec(x.size()), 0);

  std::vector<std::vector<int>> perms(x.size());
  for (std::size_t i = 0; i < root.members.size(); ++i) perms[root.members[i]] = root.perms[i];

  SortedPaletteSet out;
  std::vector<Palette> palettes;
  palettes.reserve(x.size());
  for (int n = 0; n < x.size(); ++n) palettes.push_back(x[n].permuted(perms[n]));
  out.palettes = PaletteSet(x.k(), std::move(palettes));
  out.provenance = std::move(perms);
  return out;
}

SortedPaletteSet brightness_sort(const PaletteSet& x) {
  return per_palette_sort(x, [](const LabColor& c) { return c.l; });
}

SortedPaletteSet hue_sort(const PaletteSet& x) {
  static const double neutral_hue = std::atan2(kNeutralAxis - 0.5, kNeutralAxis - 0.5);
  return per_palette_sort(x, [](const LabColor& c) {
    if (std::hypot(c.a - kNeutralAxis, c.b - kNeutralAxis) < 1e-9) return neutral_hue;
    return std::atan2(c.b - 0.5, c.a - 0.5);
  });
}

SortedPaletteSet sort_palettes(const PaletteSet& x, SortMethod method) {
  switch (method) {
    case SortMethod::bps: return bps_sort(x);
    case SortMethod::brightness: return brightness_sort(x);
    case SortMethod::hue: return hue_sort(x);
  }
  throw std::invalid_argument("unknown sort method");
}

double ordering_objective(const PaletteSet& x) {
  double total = 0.0;
  for (int n = 0; n < x.size(); ++n) {
    for (int m = n + 1; m < x.size(); ++m) {
      for (int k = 0; k < x.k(); ++k) total += color_dist(x[n][k], x[m][k]);
    }
  }
  return 2.0 * total;
}

double consecutive_distance(const PaletteSet& x) {
  if (x.size() < 2) throw std::invalid_argument("consecutive distance requires at least 2 palettes");
  double total = 0.0;
  for (int n = 0; n + 1 < x.size(); ++n) {
    double row = 0.0;
    for (int k = 0; k < x.k(); ++k) row += color_dist(x[n][k], x[n + 1][k]);
    total += row / x.k();
  }
  return total / (x.size() - 1);
}

}  // namespace orchestra
