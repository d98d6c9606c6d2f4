#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "orchestra/color.hpp"

namespace orchestra {

/// K slots, some observed. Slot order follows the model's sorted feature layout.
struct PartialPalette {
  std::vector<std::optional<LabColor>> slots;

  PartialPalette() = default;
  explicit PartialPalette(int k) : slots(static_cast<std::size_t>(k)) {}
  static PartialPalette full(const Palette& p);

  int k() const { return static_cast<int>(slots.size()); }
  int observed_count() const;
  std::vector<LabColor> observed_colors() const;

  /// Throws unless 1 <= observed_count() <= K.
  void validate() const;
};

/// Flattened palette: [l0 a0 b0 l1 a1 b1 ...].
Eigen::VectorXd to_spf(const Palette& p);
/// Inverse of to_spf; each triple is clamped to [0,1].
Palette from_spf(const Eigen::Ref<const Eigen::VectorXd>& v);
/// N x 3K matrix of flattened palettes.
Eigen::MatrixXd to_spf_matrix(const PaletteSet& s);
PaletteSet from_spf_matrix(const Eigen::MatrixXd& m);

/// Replaces the observed slots of `p` with the observed colors.
Palette clamp_observed(const Palette& p, const PartialPalette& observed);

}  // namespace orchestra
