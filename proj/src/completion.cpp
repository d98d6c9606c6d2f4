#include "orchestra/completion.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "orchestra/assignment.hpp"

namespace orchestra {

PartialPalette PartialPalette::full(const Palette& p) {
  PartialPalette out(p.k());
  for (int s = 0; s < p.k(); ++s) out.slots[s] = p[s];
  return out;
}

int PartialPalette::observed_count() const {
  return static_cast<int>(std::count_if(slots.begin(), slots.end(), [](const auto& s) { return s.has_value(); }));
}

std::vector<LabColor> PartialPalette::observed_colors() const {
  std::vector<LabColor> out;
  for (const auto& s : slots) {
    if (s) out.push_back(*s);
  }
  return out;
}

void PartialPalette::validate() const {
  if (k() < 1 || k() > kMaxPaletteSize) throw std::invalid_argument("partial palette K out of range");
  if (observed_count() < 1) throw std::invalid_argument("partial palette needs at least one observed color");
}

Eigen::VectorXd to_spf(const Palette& p) {
  Eigen::VectorXd v(3 * p.k());
  for (int s = 0; s < p.k(); ++s) v.segment<3>(3 * s) << p[s].l, p[s].a, p[s].b;
  return v;
}

Palette from_spf(const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() == 0 || v.size() % 3 != 0) throw std::invalid_argument("SPF length must be a positive multiple of 3");
  std::vector<LabColor> colors;
  for (Eigen::Index s = 0; s < v.size() / 3; ++s) colors.push_back(clamp_unit({v(3 * s), v(3 * s + 1), v(3 * s + 2)}));
  return Palette(std::move(colors));
}

Eigen::MatrixXd to_spf_matrix(const PaletteSet& s) {
  Eigen::MatrixXd m(s.size(), 3 * s.k());
  for (int n = 0; n < s.size(); ++n) m.row(n) = to_spf(s[n]).transpose();
  return m;
}

PaletteSet from_spf_matrix(const Eigen::MatrixXd& m) {
  std::vector<Palette> out;
  out.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index n = 0; n < m.rows(); ++n) out.push_back(from_spf(m.row(n).transpose()));
  return PaletteSet(static_cast<int>(m.cols() / 3), std::move(out));
}

Palette clamp_observed(const Palette& p, const PartialPalette& observed) {
  if (p.k() != observed.k()) throw std::invalid_argument("clamp_observed: K mismatch");
  Palette out = p;
  for (int s = 0; s < p.k(); ++s) {
    if (observed.slots[s]) out[s] = *observed.slots[s];
  }
  return out;
}

PartialPalette align_partial(std::span<const LabColor> observed, const PaletteSet& sorted, int neighbors) {
  const int k = sorted.k();
  const int m = static_cast<int>(observed.size());
  if (m < 1) throw std::invalid_argument("align_partial needs at least one observed color");
  if (m > k) throw std::invalid_argument("more observed colors than palette slots");
  if (sorted.empty()) throw std::invalid_argument("align_partial needs a non-empty training set");

  std::vector<double> dist(sorted.size());
  for (int n = 0; n < sorted.size(); ++n) dist[n] = mhd(observed, sorted[n].colors());
  std::vector<int> order(sorted.size());
  std::iota(order.begin(), order.end(), 0);
  const int take = std::clamp(neighbors, 1, sorted.size());
  std::partial_sort(order.begin(), order.begin() + take, order.end(),
                    [&](int a, int b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); });
  order.resize(take);
  const PaletteSet exemplars = sorted.subset(order);

  // Rows: observed colors, then zero-cost padding rows that absorb the unobserved slots.
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(k, k);
  for (int h = 0; h < m; ++h) {
    const LabColor single[1] = {observed[h]};
    for (int s = 0; s < k; ++s) {
      const auto row = exemplars.row(s);
      cost(h, s) = mhd(single, row);
    }
  }
  const auto assignment = hungarian(cost);

  PartialPalette out(k);
  for (int h = 0; h < m; ++h) out.slots[assignment.perm[h]] = observed[h];
  return out;
}

Palette retrieval_predict(const PartialPalette& p, const PaletteSet& sorted) {
  p.validate();
  if (sorted.empty()) throw std::invalid_argument("retrieval needs a non-empty set");
  if (p.k() != sorted.k()) throw std::invalid_argument("retrieval: K mismatch");
  int best_index = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int n = 0; n < sorted.size(); ++n) {
    double d = 0.0;
    for (int s = 0; s < p.k(); ++s) {
      if (!p.slots[s]) continue;
      const double c = color_dist(*p.slots[s], sorted[n][s]);
      d += c * c;
    }
    if (d < best) {
      best = d;
      best_index = n;
    }
  }
  return sorted[best_index];
}

Palette mean_predict(const PartialPalette& p) {
  p.validate();
  LabColor mean{};
  const auto obs = p.observed_colors();
  for (const auto& c : obs) {
    mean.l += c.l;
    mean.a += c.a;
    mean.b += c.b;
  }
  const double n = static_cast<double>(obs.size());
  mean = {mean.l / n, mean.a / n, mean.b / n};
  std::vector<LabColor> colors;
  for (const auto& s : p.slots) colors.push_back(s ? *s : mean);
  return Palette(std::move(colors));
}

}  // namespace orchestra
