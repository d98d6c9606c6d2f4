#pragma once

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "orchestra/color.hpp"

namespace testing {

using orchestra::LabColor;
using orchestra::Palette;
using orchestra::PaletteSet;

inline LabColor random_color(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {u(rng), u(rng), u(rng)};
}

inline Palette random_palette(std::mt19937_64& rng, int k) {
  std::vector<LabColor> c;
  for (int i = 0; i < k; ++i) c.push_back(random_color(rng));
  return Palette(std::move(c));
}

inline PaletteSet random_set(std::mt19937_64& rng, int n, int k) {
  std::vector<Palette> ps;
  for (int i = 0; i < n; ++i) ps.push_back(random_palette(rng, k));
  return PaletteSet(k, std::move(ps));
}

inline std::vector<int> identity(int k) {
  std::vector<int> p(k);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

inline std::vector<int> shuffled(std::mt19937_64& rng, int k) {
  auto p = identity(k);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

// Colors sorted lexicographically, for multiset comparison.
inline std::vector<LabColor> sorted_colors(const Palette& p) {
  auto c = p.colors();
  std::sort(c.begin(), c.end(), [](const LabColor& x, const LabColor& y) {
    return std::tie(x.l, x.a, x.b) < std::tie(y.l, y.a, y.b);
  });
  return c;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("orchestra_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
