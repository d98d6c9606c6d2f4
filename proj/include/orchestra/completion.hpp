#pragma once

#include <span>

#include "orchestra/color.hpp"
#include "orchestra/partial.hpp"

namespace orchestra {

/// Assigns unordered observed colors to slots of a sorted set: the `neighbors` MHD-nearest
/// palettes act as exemplars, and colors are matched to exemplar rows by minimum-cost
/// assignment (padding rows for the missing slots). Requires 1 <= |observed| <= K.
PartialPalette align_partial(std::span<const LabColor> observed, const PaletteSet& sorted, int neighbors = 3);

/// Palette of `sorted` nearest to the observed slots (Euclidean, ties to the lower index).
Palette retrieval_predict(const PartialPalette& p, const PaletteSet& sorted);

/// Observed slots kept, every missing slot set to the mean observed color.
Palette mean_predict(const PartialPalette& p);

}  // namespace orchestra
