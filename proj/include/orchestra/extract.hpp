#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "orchestra/color.hpp"
#include "orchestra/image.hpp"

namespace orchestra {

struct PatchSpec {
  int patch_size = 200;
  int step = 100;
  int samples_per_patch = 1000;

  void validate(int k) const;
};

/// Axis-aligned window into an image.
struct Patch {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
};

/// Grid of patch windows. An image smaller than the patch in either dimension yields a
/// single centered patch clipped to the image.
std::vector<Patch> extract_patches(const Image& image, const PatchSpec& spec);

/// Uniform sampling with replacement, converted to normalized Lab.
std::vector<LabColor> sample_pixels(const Image& image, const Patch& patch, int n, std::uint64_t seed);

struct KMeansResult {
  Palette palette;
  /// Fewer distinct input colors than K; some centers are duplicates.
  bool degenerate = false;
  int iterations = 0;
  /// Within-cluster sum of squares after each assignment step.
  std::vector<double> objective_trace;
};

/// K-means++ seeding followed by at most `max_iters` Lloyd iterations.
KMeansResult kmeans_palette(std::span<const LabColor> pixels, int k, std::uint64_t seed, int max_iters = 100,
                            double tolerance = 1e-6);

struct DatasetManifest {
  std::vector<std::string> source_image_paths;
  int k = 5;
  int palettes_per_set = 400;
  std::uint64_t random_seed = 0;
  PatchSpec patch;

  void validate() const;
};

/// Palettes of one image, in patch order.
std::vector<Palette> image_palettes(const Image& image, int k, const PatchSpec& spec, std::uint64_t seed);

/// rescale -> patches -> sample -> k-means for every readable image, then a uniform
/// subsample (original order kept) down to palettes_per_set. Unreadable images are skipped
/// and reported through `warnings`.
PaletteSet build_dataset(const DatasetManifest& manifest, std::vector<std::string>* warnings = nullptr);

}  // namespace orchestra
