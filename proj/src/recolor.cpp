#include "orchestra/recolor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "orchestra/assignment.hpp"
#include "orchestra/completion.hpp"
#include "orchestra/extract.hpp"
#include "orchestra/random.hpp"

namespace orchestra {

namespace {

void recolor_indices(const LabImage& in, LabImage& out, const RecolorSpec& spec, const std::vector<std::size_t>& idx) {
  if (spec.source.k() != spec.target.k()) throw std::invalid_argument("recolor: source and target K differ");
  const int k = spec.source.k();
  for (std::size_t i : idx) {
    const LabColor& p = in.px[i];
    int slot = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < k; ++s) {
      const auto& c = spec.source[s];
      const double da = p.a - c.a, db = p.b - c.b, dl = p.l - c.l;
      const double d = spec.preserve_luminance ? da * da + db * db : dl * dl + da * da + db * db;
      if (d < best) {
        best = d;
        slot = s;
      }
    }
    const auto& src = spec.source[slot];
    const auto& dst = spec.target[slot];
    LabColor q = p;
    q.a = std::clamp(p.a + spec.blend * (dst.a - src.a), 0.0, 1.0);
    q.b = std::clamp(p.b + spec.blend * (dst.b - src.b), 0.0, 1.0);
    if (!spec.preserve_luminance) q.l = std::clamp(p.l + spec.blend * (dst.l - src.l), 0.0, 1.0);
    out.px[i] = q;
  }
}

}  // namespace

Image to_rgb_preserving(const Image& original, const LabImage& before, const LabImage& after) {
  Image out = original;
  for (std::size_t i = 0; i < after.px.size(); ++i) {
    if (after.px[i] == before.px[i]) continue;
    const Rgb8 c = lab_to_srgb(after.px[i]);
    out.rgb[3 * i] = c.r;
    out.rgb[3 * i + 1] = c.g;
    out.rgb[3 * i + 2] = c.b;
  }
  return out;
}

SegmentMap segment_grid(int width, int height, int cell) {
  if (cell < 8) throw std::invalid_argument("grid cell must be >= 8 pixels");
  if (width <= 0 || height <= 0) throw std::invalid_argument("segment_grid needs a non-empty image");
  SegmentMap m{width, height, 0, {}};
  const int cols = (width + cell - 1) / cell;
  const int rows = (height + cell - 1) / cell;
  m.count = cols * rows;
  m.labels.resize(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) m.labels[static_cast<std::size_t>(y) * width + x] = (y / cell) * cols + x / cell;
  }
  return m;
}

SegmentMap segment_grid(const Image& image, int cell) { return segment_grid(image.width, image.height, cell); }

SegmentMap parse_segments(const std::string& spec, int width, int height) {
  const std::string prefix = "grid:";
  if (spec.rfind(prefix, 0) != 0) throw std::invalid_argument("unsupported segmentation: " + spec);
  int cell = 0;
  try {
    std::size_t used = 0;
    cell = std::stoi(spec.substr(prefix.size()), &used);
    if (used != spec.size() - prefix.size()) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw std::invalid_argument("bad grid cell size in: " + spec);
  }
  return segment_grid(width, height, cell);
}

LabImage recolor_single(const LabImage& image, const RecolorSpec& spec, const std::vector<char>* mask) {
  if (spec.blend < 0.0 || spec.blend > 1.0) throw std::invalid_argument("blend weight must be in [0,1]");
  std::vector<std::size_t> idx;
  idx.reserve(image.px.size());
  for (std::size_t i = 0; i < image.px.size(); ++i) {
    if (!mask || (*mask)[i]) idx.push_back(i);
  }
  LabImage out = image;
  recolor_indices(image, out, spec, idx);
  return out;
}

Image recolor_single(const Image& image, const RecolorSpec& spec) {
  const LabImage lab = to_lab(image);
  return to_rgb_preserving(image, lab, recolor_single(lab, spec));
}

std::vector<SegmentPalette> segment_palettes(const LabImage& image, const SegmentMap& segments,
                                             const GplvmPredictor& predictor, const PaletteSet& training,
                                             const EnrichedOptions& opts, std::vector<std::string>* warnings) {
  if (segments.width != image.width || segments.height != image.height) {
    throw std::invalid_argument("segment map does not match the image");
  }
  const int k = predictor.model().k;
  std::vector<std::vector<std::size_t>> members(segments.count);
  for (std::size_t i = 0; i < segments.labels.size(); ++i) members[segments.labels[i]].push_back(i);

  std::vector<SegmentPalette> out(segments.count);
  for (int s = 0; s < segments.count; ++s) {
    const auto& m = members[s];
    out[s].pixel_count = static_cast<int>(m.size());
    if (static_cast<int>(m.size()) < k) {
      if (warnings) warnings->push_back("segment " + std::to_string(s) + " has fewer than K pixels; left unchanged");
      continue;
    }
    Rng rng(mix_seed(opts.seed, static_cast<std::uint64_t>(s)));
    std::vector<LabColor> sample;
    sample.reserve(static_cast<std::size_t>(opts.samples_per_segment));
    for (int i = 0; i < std::max(opts.samples_per_segment, k); ++i) sample.push_back(image.px[m[uniform_index(rng, m.size())]]);
    const auto km = kmeans_palette(sample, k, mix_seed(opts.seed, 0x5e6ULL + static_cast<std::uint64_t>(s)));
    const auto aligned = align_partial(km.palette.colors(), training);
    std::vector<LabColor> ordered;
    for (const auto& slot : aligned.slots) ordered.push_back(*slot);
    out[s].source = Palette(std::move(ordered));
  }
  return out;
}

LabImage apply_segment_palettes(const LabImage& image, const SegmentMap& segments,
                                const std::vector<SegmentPalette>& palettes, const GplvmPredictor& predictor,
                                const EnrichedOptions& opts) {
  std::vector<std::vector<std::size_t>> members(segments.count);
  for (std::size_t i = 0; i < segments.labels.size(); ++i) members[segments.labels[i]].push_back(i);

  LabImage out = image;
  for (int s = 0; s < segments.count; ++s) {
    if (!palettes[s].source) continue;
    const auto& source = *palettes[s].source;
    const auto completed = gplvm_complete(predictor, PartialPalette::full(source), opts.sim_iters, opts.clamp_observed);
    RecolorSpec spec{source, completed.palette, opts.preserve_luminance, 1.0};
    recolor_indices(image, out, spec, members[s]);
  }
  return out;
}

Image recolor_enriched(const Image& image, const SegmentMap& segments, const GplvmModel& model,
                       const EnrichedOptions& opts, std::vector<std::string>* warnings) {
  const GplvmPredictor predictor(model);
  const PaletteSet training = model.training_palettes();
  const LabImage lab = to_lab(image);
  const auto palettes = segment_palettes(lab, segments, predictor, training, opts, warnings);
  return to_rgb_preserving(image, lab, apply_segment_palettes(lab, segments, palettes, predictor, opts));
}

Palette match_palette(const Palette& source, const PaletteSet& pool) {
  if (pool.empty()) throw std::invalid_argument("match_palette needs a non-empty pool");
  if (pool.k() != source.k()) throw std::invalid_argument("match_palette: K mismatch");
  const int k = source.k();
  double best = std::numeric_limits<double>::infinity();
  Palette chosen;
  for (const auto& candidate : pool.palettes()) {
    Eigen::MatrixXd cost(k, k);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) cost(i, j) = color_dist(source[i], candidate[j]);
    }
    const auto a = hungarian(cost);
    if (a.total_cost < best) {
      best = a.total_cost;
      chosen = candidate.permuted(a.perm);
    }
  }
  return chosen;
}

Palette image_palette(const LabImage& image, int k, std::uint64_t seed, int samples) {
  if (image.px.empty()) throw std::invalid_argument("image_palette needs a non-empty image");
  Rng rng(seed);
  std::vector<LabColor> sample;
  for (int i = 0; i < std::max(samples, k); ++i) sample.push_back(image.px[uniform_index(rng, image.px.size())]);
  return kmeans_palette(sample, k, mix_seed(seed, 1)).palette;
}

}  // namespace orchestra
