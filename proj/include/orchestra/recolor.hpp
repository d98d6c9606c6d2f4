#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "orchestra/bps.hpp"
#include "orchestra/color.hpp"
#include "orchestra/gplvm.hpp"
#include "orchestra/image.hpp"

namespace orchestra {

/// Per-pixel integer labels, contiguous 0..count-1.
struct SegmentMap {
  int width = 0;
  int height = 0;
  int count = 0;
  std::vector<int> labels;

  int at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
};

/// Regular grid of cell x cell blocks (cell >= 8); ceil(W/cell) * ceil(H/cell) segments.
SegmentMap segment_grid(int width, int height, int cell);
SegmentMap segment_grid(const Image& image, int cell);

/// Parses "grid:<cell>".
SegmentMap parse_segments(const std::string& spec, int width, int height);

struct RecolorSpec {
  Palette source;
  Palette target;
  bool preserve_luminance = true;
  /// 0 keeps the original, 1 applies the full shift.
  double blend = 1.0;
};

/// Nearest source slot (ab-plane when preserving luminance, full Lab otherwise) and a shift by
/// target - source for that slot. Only pixels with mask[i] != 0 are touched when a mask is given.
LabImage recolor_single(const LabImage& image, const RecolorSpec& spec, const std::vector<char>* mask = nullptr);
Image recolor_single(const Image& image, const RecolorSpec& spec);

/// `original` with only the pixels that differ between `before` and `after` re-encoded.
Image to_rgb_preserving(const Image& original, const LabImage& before, const LabImage& after);

/// Slot-ordered source palette of one segment; empty when the segment has fewer than K pixels.
struct SegmentPalette {
  std::optional<Palette> source;
  int pixel_count = 0;
};

struct EnrichedOptions {
  int sim_iters = 50;
  std::uint64_t seed = 0;
  int samples_per_segment = 1000;
  bool preserve_luminance = true;
  bool clamp_observed = false;
};

/// Per segment: k-means palette of its pixels, aligned to the model's slot order.
std::vector<SegmentPalette> segment_palettes(const LabImage& image, const SegmentMap& segments,
                                             const GplvmPredictor& predictor, const PaletteSet& training,
                                             const EnrichedOptions& opts, std::vector<std::string>* warnings = nullptr);

/// Completes each segment palette against the model and recolors the segment with it.
LabImage apply_segment_palettes(const LabImage& image, const SegmentMap& segments,
                                const std::vector<SegmentPalette>& palettes, const GplvmPredictor& predictor,
                                const EnrichedOptions& opts);

Image recolor_enriched(const Image& image, const SegmentMap& segments, const GplvmModel& model,
                       const EnrichedOptions& opts = {}, std::vector<std::string>* warnings = nullptr);

/// Pool palette (rows permuted into source slot order) with the smallest post-alignment slot
/// distance to `source`; ties to the lower pool index.
Palette match_palette(const Palette& source, const PaletteSet& pool);

/// K-means palette of up to `samples` pixels drawn from the whole image.
Palette image_palette(const LabImage& image, int k, std::uint64_t seed, int samples = 2000);

}  // namespace orchestra
