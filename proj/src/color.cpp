#include "orchestra/color.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace orchestra {

namespace {

// sRGB primaries, D65 white, 2 degree observer.
const Eigen::Matrix3d& rgb_to_xyz() {
  static const Eigen::Matrix3d m = (Eigen::Matrix3d() << 0.4124564, 0.3575761, 0.1804375,
                                    0.2126729, 0.7151522, 0.0721750,
                                    0.0193339, 0.1191920, 0.9503041)
                                       .finished();
  return m;
}

const Eigen::Matrix3d& xyz_to_rgb() {
  static const Eigen::Matrix3d m = rgb_to_xyz().inverse();
  return m;
}

// White point taken from the matrix itself so that sRGB white maps to a* = b* = 0 exactly.
const Eigen::Vector3d& white() {
  static const Eigen::Vector3d w = rgb_to_xyz() * Eigen::Vector3d::Ones();
  return w;
}

constexpr double kDelta = 6.0 / 29.0;

double lab_f(double t) {
  return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_f_inv(double f) {
  return f > kDelta ? f * f * f : 3.0 * kDelta * kDelta * (f - 4.0 / 29.0);
}

double srgb_decode(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double srgb_encode(double c) {
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

}  // namespace

Palette::Palette(std::vector<LabColor> colors) : colors_(std::move(colors)) {
  if (colors_.empty() || colors_.size() > static_cast<std::size_t>(kMaxPaletteSize)) {
    throw std::invalid_argument("palette size must be in 1.." + std::to_string(kMaxPaletteSize) +
                                ", got " + std::to_string(colors_.size()));
  }
}

Palette Palette::permuted(std::span<const int> perm) const {
  if (static_cast<int>(perm.size()) != k()) throw std::invalid_argument("permutation size mismatch");
  std::vector<LabColor> out(colors_.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out[i] = colors_.at(static_cast<std::size_t>(perm[i]));
  return Palette(std::move(out));
}

PaletteSet::PaletteSet(int k, std::vector<Palette> palettes) : k_(k), palettes_(std::move(palettes)) {
  if (k_ < 1 || k_ > kMaxPaletteSize) throw std::invalid_argument("palette set K out of range");
  for (const auto& p : palettes_) {
    if (p.k() != k_) throw std::invalid_argument("palette set members must share K");
  }
}

void PaletteSet::push_back(Palette p) {
  if (p.k() != k_) throw std::invalid_argument("palette K does not match set K");
  palettes_.push_back(std::move(p));
}

PaletteSet PaletteSet::subset(std::span<const int> indices) const {
  std::vector<Palette> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(palettes_.at(static_cast<std::size_t>(i)));
  return PaletteSet(k_, std::move(out));
}

std::vector<LabColor> PaletteSet::row(int slot) const {
  std::vector<LabColor> out;
  out.reserve(palettes_.size());
  for (const auto& p : palettes_) out.push_back(p[slot]);
  return out;
}

LabColor normalize_lab(double L, double a, double b) {
  return {L / 100.0, (a + 128.0) / 255.0, (b + 128.0) / 255.0};
}

void denormalize_lab(const LabColor& c, double& L, double& a, double& b) {
  L = c.l * 100.0;
  a = c.a * 255.0 - 128.0;
  b = c.b * 255.0 - 128.0;
}

LabColor clamp_unit(const LabColor& c) {
  return {std::clamp(c.l, 0.0, 1.0), std::clamp(c.a, 0.0, 1.0), std::clamp(c.b, 0.0, 1.0)};
}

LabColor srgb_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const Eigen::Vector3d lin(srgb_decode(r / 255.0), srgb_decode(g / 255.0), srgb_decode(b / 255.0));
  const Eigen::Vector3d xyz = rgb_to_xyz() * lin;
  const double fx = lab_f(xyz[0] / white()[0]);
  const double fy = lab_f(xyz[1] / white()[1]);
  const double fz = lab_f(xyz[2] / white()[2]);
  return clamp_unit(normalize_lab(116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)));
}

Rgb8 lab_to_srgb(const LabColor& c) {
  double L, a, b;
  denormalize_lab(c, L, a, b);
  const double fy = (L + 16.0) / 116.0;
  const double fx = fy + a / 500.0;
  const double fz = fy - b / 200.0;
  const Eigen::Vector3d xyz(white()[0] * lab_f_inv(fx), white()[1] * lab_f_inv(fy),
                            white()[2] * lab_f_inv(fz));
  const Eigen::Vector3d lin = xyz_to_rgb() * xyz;

  Rgb8 out;
  std::uint8_t* channels[3] = {&out.r, &out.g, &out.b};
  for (int i = 0; i < 3; ++i) {
    double v = lin[i];
    if (v < -1e-9 || v > 1.0 + 1e-9) out.clamped = true;
    v = std::clamp(v, 0.0, 1.0);
    *channels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(srgb_encode(v), 0.0, 1.0) * 255.0));
  }
  return out;
}

double color_dist(const LabColor& c1, const LabColor& c2) {
  const double dl = c1.l - c2.l;
  const double da = c1.a - c2.a;
  const double db = c1.b - c2.b;
  return std::sqrt(dl * dl + da * da + db * db);
}

double directed_mean_distance(std::span<const LabColor> p, std::span<const LabColor> q) {
  if (p.empty() || q.empty()) throw std::invalid_argument("empty color set");
  double total = 0.0;
  for (const auto& pi : p) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& qj : q) best = std::min(best, color_dist(pi, qj));
    total += best;
  }
  return total / static_cast<double>(p.size());
}

double mhd(std::span<const LabColor> p, std::span<const LabColor> q) {
  return std::max(directed_mean_distance(p, q), directed_mean_distance(q, p));
}

}  // namespace orchestra
