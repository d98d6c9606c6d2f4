#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "orchestra/color.hpp"

namespace orchestra {

/// 8-bit interleaved RGB raster.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(int w, int h);

  bool empty() const { return width <= 0 || height <= 0; }
  std::uint8_t* pixel(int x, int y) { return &rgb[3 * (static_cast<std::size_t>(y) * width + x)]; }
  const std::uint8_t* pixel(int x, int y) const {
    return &rgb[3 * (static_cast<std::size_t>(y) * width + x)];
  }
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
};

struct LabImage {
  int width = 0;
  int height = 0;
  std::vector<LabColor> px;

  const LabColor& at(int x, int y) const { return px[static_cast<std::size_t>(y) * width + x]; }
};

LabImage to_lab(const Image& image);
Image to_rgb(const LabImage& image);

/// PNG codec (libpng). Alpha is dropped, grayscale expanded, 16-bit stripped.
Image decode_png(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_png(const Image& image);
Image read_png(const std::string& path);
void write_png(const std::string& path, const Image& image);
bool is_png(const std::vector<std::uint8_t>& bytes);

/// Bilinear resize to exactly w x h.
Image resize_bilinear(const Image& image, int w, int h);

/// Scales so that the larger side equals max_dim, preserving aspect (rounded).
Image rescale_image(const Image& image, int max_dim = 500);

/// Like rescale_image, but never enlarges.
Image downscale_to_fit(const Image& image, int max_dim);

}  // namespace orchestra
