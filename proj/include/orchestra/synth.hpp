#pragma once

#include <cstdint>
#include <vector>

#include "orchestra/color.hpp"

namespace orchestra {

/// Synthetic palettes with planted correspondences: each palette belongs to a scene, and
/// its k-th color is the scene's k-th base color moved along a per-color drift direction by a
/// shared scene coordinate t, plus noise. Slot order is then shuffled per palette.
struct PlantedOptions {
  int n_palettes = 20;
  int k = 5;
  int n_scenes = 4;
  /// Noise standard deviation, normalized Lab units.
  double noise = 0.015;
  /// Drift amplitude, normalized Lab units.
  double drift = 0.08;
  bool shuffle = true;
  std::uint64_t seed = 0;
};

struct PlantedDataset {
  /// Palettes as delivered (slot order shuffled when requested).
  PaletteSet palettes;
  /// Same palettes in planted order (slot k = base color k).
  PaletteSet aligned;
  std::vector<int> scene;
  /// truth[n][s]: planted color index held in slot s of palettes[n].
  std::vector<std::vector<int>> truth;
};

PlantedDataset planted_dataset(const PlantedOptions& opts);

}  // namespace orchestra
