#include "orchestra/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "orchestra/random.hpp"

namespace orchestra {

PlantedDataset planted_dataset(const PlantedOptions& opts) {
  if (opts.n_palettes < 1 || opts.n_scenes < 1) throw std::invalid_argument("planted dataset needs palettes and scenes");
  if (opts.k < 1 || opts.k > kMaxPaletteSize) throw std::invalid_argument("planted dataset K out of range");

  Rng rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * uniform_unit(rng); };

  struct Scene {
    std::vector<LabColor> base;
    std::vector<LabColor> drift;
  };
  std::vector<Scene> scenes(opts.n_scenes);
  for (auto& s : scenes) {
    for (int k = 0; k < opts.k; ++k) {
      const double L = uniform(20.0, 90.0);
      double a, b;
      if (uniform_unit(rng) < 0.5) {
        a = 6.0 * gauss(rng);
        b = 6.0 * gauss(rng);
      } else {
        const double chroma = uniform(20.0, 55.0);
        const double hue = uniform(0.0, 2.0 * std::numbers::pi);
        a = chroma * std::cos(hue);
        b = chroma * std::sin(hue);
      }
      s.base.push_back(clamp_unit(normalize_lab(L, a, b)));
      LabColor d{gauss(rng), gauss(rng), gauss(rng)};
      const double norm = std::sqrt(d.l * d.l + d.a * d.a + d.b * d.b);
      s.drift.push_back({opts.drift * d.l / norm, opts.drift * d.a / norm, opts.drift * d.b / norm});
    }
  }

  PlantedDataset out;
  std::vector<Palette> shuffled, aligned;
  for (int n = 0; n < opts.n_palettes; ++n) {
    const int sc = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(opts.n_scenes)));
    const double t = uniform(-1.0, 1.0);
    std::vector<LabColor> colors;
    for (int k = 0; k < opts.k; ++k) {
      const auto& b = scenes[sc].base[k];
      const auto& d = scenes[sc].drift[k];
      colors.push_back(clamp_unit({b.l + t * d.l + opts.noise * gauss(rng), b.a + t * d.a + opts.noise * gauss(rng),
                                   b.b + t * d.b + opts.noise * gauss(rng)}));
    }
    std::vector<int> perm(opts.k);
    std::iota(perm.begin(), perm.end(), 0);
    if (opts.shuffle) {
      for (int i = opts.k - 1; i > 0; --i) std::swap(perm[i], perm[uniform_index(rng, static_cast<std::uint64_t>(i) + 1)]);
    }
    aligned.emplace_back(colors);
    shuffled.push_back(Palette(colors).permuted(perm));
    out.scene.push_back(sc);
    out.truth.push_back(std::move(perm));
  }
  out.palettes = PaletteSet(opts.k, std::move(shuffled));
  out.aligned = PaletteSet(opts.k, std::move(aligned));
  return out;
}

}  // namespace orchestra
