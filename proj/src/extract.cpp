#include "orchestra/extract.hpp"

#include <algorithm>
#include <future>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "orchestra/random.hpp"

namespace orchestra {

namespace {

double sq_dist(const LabColor& p, const LabColor& q) {
  const double dl = p.l - q.l, da = p.a - q.a, db = p.b - q.b;
  return dl * dl + da * da + db * db;
}

int count_distinct(std::span<const LabColor> pixels, int cap) {
  std::vector<std::tuple<double, double, double>> keys;
  keys.reserve(pixels.size());
  for (const auto& c : pixels) keys.emplace_back(c.l, c.a, c.b);
  std::sort(keys.begin(), keys.end());
  const auto n = std::unique(keys.begin(), keys.end()) - keys.begin();
  return static_cast<int>(std::min<std::ptrdiff_t>(n, cap));
}

}  // namespace

void PatchSpec::validate(int k) const {
  if (step < 1 || patch_size < step) throw std::invalid_argument("patch spec requires patch_size >= step >= 1");
  if (samples_per_patch < k) throw std::invalid_argument("samples_per_patch must be at least K");
}

void DatasetManifest::validate() const {
  if (k < 1 || k > kMaxPaletteSize) throw std::invalid_argument("manifest K must be in 1..16");
  if (palettes_per_set < 1) throw std::invalid_argument("palettes_per_set must be >= 1");
  patch.validate(k);
}

std::vector<Patch> extract_patches(const Image& image, const PatchSpec& spec) {
  if (image.empty()) return {};
  const int p = spec.patch_size;
  if (image.width < p || image.height < p) {
    const int w = std::min(image.width, p);
    const int h = std::min(image.height, p);
    return {{(image.width - w) / 2, (image.height - h) / 2, w, h}};
  }
  std::vector<Patch> out;
  for (int y = 0; y + p <= image.height; y += spec.step) {
    for (int x = 0; x + p <= image.width; x += spec.step) out.push_back({x, y, p, p});
  }
  return out;
}

std::vector<LabColor> sample_pixels(const Image& image, const Patch& patch, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample count must be >= 1");
  if (patch.width <= 0 || patch.height <= 0) throw std::invalid_argument("empty patch");
  Rng rng(seed);
  std::vector<LabColor> out;
  out.reserve(static_cast<std::size_t>(n));
  const auto area = static_cast<std::uint64_t>(patch.width) * static_cast<std::uint64_t>(patch.height);
  for (int i = 0; i < n; ++i) {
    const auto idx = uniform_index(rng, area);
    const int x = patch.x + static_cast<int>(idx % static_cast<std::uint64_t>(patch.width));
    const int y = patch.y + static_cast<int>(idx / static_cast<std::uint64_t>(patch.width));
    const auto* px = image.pixel(x, y);
    out.push_back(srgb_to_lab(px[0], px[1], px[2]));
  }
  return out;
}

KMeansResult kmeans_palette(std::span<const LabColor> pixels, int k, std::uint64_t seed, int max_iters,
                            double tolerance) {
  if (k < 1 || k > kMaxPaletteSize) throw std::invalid_argument("K must be in 1..16");
  if (static_cast<int>(pixels.size()) < k) throw std::invalid_argument("need at least K pixels for k-means");

  KMeansResult result;
  result.degenerate = count_distinct(pixels, k) < k;

  Rng rng(seed);
  const std::size_t n = pixels.size();
  std::vector<LabColor> centers;
  centers.reserve(static_cast<std::size_t>(k));
  centers.push_back(pixels[uniform_index(rng, n)]);

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(pixels[i], centers[0]);
  while (static_cast<int>(centers.size()) < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    if (total <= 0.0) {
      // Every pixel coincides with a center already: duplicate existing centers.
      const std::size_t distinct = centers.size();
      for (std::size_t i = 0; static_cast<int>(centers.size()) < k; ++i) centers.push_back(centers[i % distinct]);
      break;
    }
    double target = uniform_unit(rng) * total;
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      target -= d2[i];
      if (target < 0.0) {
        pick = i;
        break;
      }
    }
    while (d2[pick] <= 0.0) --pick;  // rounding fallback: last positive-weight pixel
    centers.push_back(pixels[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(pixels[i], centers.back()));
  }

  std::vector<int> label(n, 0);
  std::vector<double> sum(3 * static_cast<std::size_t>(k));
  std::vector<int> count(static_cast<std::size_t>(k));
  for (int iter = 0; iter < max_iters; ++iter) {
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int c = 0; c < k; ++c) {
        const double d = sq_dist(pixels[i], centers[static_cast<std::size_t>(c)]);
        if (d < best) {
          best = d;
          arg = c;
        }
      }
      label[i] = arg;
      objective += best;
    }
    result.objective_trace.push_back(objective);
    result.iterations = iter + 1;

    std::fill(sum.begin(), sum.end(), 0.0);
    std::fill(count.begin(), count.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(label[i]);
      sum[3 * c] += pixels[i].l;
      sum[3 * c + 1] += pixels[i].a;
      sum[3 * c + 2] += pixels[i].b;
      ++count[c];
    }
    double moved = 0.0;
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
      if (count[c] == 0) continue;  // empty cluster keeps its center
      const LabColor next{sum[3 * c] / count[c], sum[3 * c + 1] / count[c], sum[3 * c + 2] / count[c]};
      moved = std::max(moved, color_dist(next, centers[c]));
      centers[c] = next;
    }
    if (moved < tolerance) break;
  }

  for (auto& c : centers) c = clamp_unit(c);
  result.palette = Palette(std::move(centers));
  return result;
}

std::vector<Palette> image_palettes(const Image& image, int k, const PatchSpec& spec, std::uint64_t seed) {
  const Image scaled = rescale_image(image);
  const auto patches = extract_patches(scaled, spec);
  std::vector<Palette> out;
  out.reserve(patches.size());
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const auto sample_seed = mix_seed(seed, 2 * i);
    const auto pixels = sample_pixels(scaled, patches[i], spec.samples_per_patch, sample_seed);
    out.push_back(kmeans_palette(pixels, k, mix_seed(seed, 2 * i + 1)).palette);
  }
  return out;
}

PaletteSet build_dataset(const DatasetManifest& manifest, std::vector<std::string>* warnings) {
  manifest.validate();
  const auto& paths = manifest.source_image_paths;

  std::vector<std::future<std::vector<Palette>>> jobs;
  jobs.reserve(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    jobs.push_back(std::async(std::launch::async, [&, i] {
      return image_palettes(read_png(paths[i]), manifest.k, manifest.patch, mix_seed(manifest.random_seed, i));
    }));
  }

  std::vector<Palette> all;
  int usable = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    try {
      auto palettes = jobs[i].get();
      ++usable;
      for (auto& p : palettes) all.push_back(std::move(p));
    } catch (const std::exception& e) {
      if (warnings) warnings->push_back("skipping " + paths[i] + ": " + e.what());
    }
  }
  if (usable == 0) throw std::runtime_error("no usable images in manifest");

  if (static_cast<int>(all.size()) > manifest.palettes_per_set) {
    std::vector<int> idx(all.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(mix_seed(manifest.random_seed, 0xda7a5e7ULL));
    for (std::size_t i = 0; i < static_cast<std::size_t>(manifest.palettes_per_set); ++i) {
      const auto j = i + uniform_index(rng, idx.size() - i);
      std::swap(idx[i], idx[j]);
    }
    idx.resize(static_cast<std::size_t>(manifest.palettes_per_set));
    std::sort(idx.begin(), idx.end());
    std::vector<Palette> chosen;
    chosen.reserve(idx.size());
    for (int i : idx) chosen.push_back(std::move(all[static_cast<std::size_t>(i)]));
    all = std::move(chosen);
  }
  return PaletteSet(manifest.k, std::move(all));
}

}  // namespace orchestra
