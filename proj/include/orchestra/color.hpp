#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace orchestra {

/// A color in normalized CIELAB: l = L/100, a = (a*+128)/255, b = (b*+128)/255.
struct LabColor {
  double l = 0.0;
  double a = 0.0;
  double b = 0.0;

  friend bool operator==(const LabColor&, const LabColor&) = default;
};

/// Normalized chroma origin (a* = b* = 0).
inline constexpr double kNeutralAxis = 128.0 / 255.0;
inline constexpr int kMaxPaletteSize = 16;

struct Rgb8 {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  /// Set by lab_to_srgb when at least one channel had to be clamped.
  bool clamped = false;
};

/// Ordered tuple of K colors, 1 <= K <= 16.
class Palette {
 public:
  Palette() = default;
  explicit Palette(std::vector<LabColor> colors);

  int k() const { return static_cast<int>(colors_.size()); }
  const std::vector<LabColor>& colors() const { return colors_; }
  const LabColor& operator[](int i) const { return colors_[static_cast<std::size_t>(i)]; }
  LabColor& operator[](int i) { return colors_[static_cast<std::size_t>(i)]; }

  /// Returns a copy whose slot i holds this palette's color perm[i].
  Palette permuted(std::span<const int> perm) const;

  friend bool operator==(const Palette&, const Palette&) = default;

 private:
  std::vector<LabColor> colors_;
};

/// N palettes sharing one K.
class PaletteSet {
 public:
  PaletteSet() = default;
  PaletteSet(int k, std::vector<Palette> palettes);

  int k() const { return k_; }
  int size() const { return static_cast<int>(palettes_.size()); }
  bool empty() const { return palettes_.empty(); }

  const std::vector<Palette>& palettes() const { return palettes_; }
  const Palette& operator[](int i) const { return palettes_[static_cast<std::size_t>(i)]; }
  Palette& operator[](int i) { return palettes_[static_cast<std::size_t>(i)]; }

  void push_back(Palette p);
  PaletteSet subset(std::span<const int> indices) const;

  /// Colors at slot `slot` across all palettes (the row-set P^k).
  std::vector<LabColor> row(int slot) const;

  friend bool operator==(const PaletteSet&, const PaletteSet&) = default;

 private:
  int k_ = 0;
  std::vector<Palette> palettes_;
};

LabColor srgb_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b);
Rgb8 lab_to_srgb(const LabColor& c);

/// Raw CIELAB (L in 0..100) <-> normalized.
LabColor normalize_lab(double L, double a, double b);
void denormalize_lab(const LabColor& c, double& L, double& a, double& b);

LabColor clamp_unit(const LabColor& c);

double color_dist(const LabColor& c1, const LabColor& c2);

/// Directed average nearest-neighbour distance from p to q.
double directed_mean_distance(std::span<const LabColor> p, std::span<const LabColor> q);

/// Modified Hausdorff distance; throws std::invalid_argument on an empty set.
double mhd(std::span<const LabColor> p, std::span<const LabColor> q);

}  // namespace orchestra
