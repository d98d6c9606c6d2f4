#include "orchestra/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include <png.h>

#include "orchestra/errors.hpp"

namespace orchestra {

Image::Image(int w, int h) : width(w), height(h), rgb(3 * static_cast<std::size_t>(w) * h, 0) {
  if (w < 0 || h < 0) throw std::invalid_argument("negative image dimension");
}

void Image::set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  auto* p = pixel(x, y);
  p[0] = r;
  p[1] = g;
  p[2] = b;
}

LabImage to_lab(const Image& image) {
  LabImage out{image.width, image.height, {}};
  out.px.reserve(static_cast<std::size_t>(image.width) * image.height);
  for (std::size_t i = 0; i + 2 < image.rgb.size(); i += 3) {
    out.px.push_back(srgb_to_lab(image.rgb[i], image.rgb[i + 1], image.rgb[i + 2]));
  }
  return out;
}

Image to_rgb(const LabImage& image) {
  Image out(image.width, image.height);
  for (std::size_t i = 0; i < image.px.size(); ++i) {
    const Rgb8 c = lab_to_srgb(image.px[i]);
    out.rgb[3 * i] = c.r;
    out.rgb[3 * i + 1] = c.g;
    out.rgb[3 * i + 2] = c.b;
  }
  return out;
}

bool is_png(const std::vector<std::uint8_t>& bytes) {
  return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

Image decode_png(const std::vector<std::uint8_t>& bytes) {
  if (!is_png(bytes)) throw FormatError("not a PNG stream");
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw FormatError(std::string("PNG decode failed: ") + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  if (img.width == 0 || img.height == 0) {
    png_image_free(&img);
    throw FormatError("PNG has zero dimension");
  }
  Image out(static_cast<int>(img.width), static_cast<int>(img.height));
  if (!png_image_finish_read(&img, nullptr, out.rgb.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw FormatError("PNG decode failed: " + msg);
  }
  return out;
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  if (image.empty()) throw std::invalid_argument("cannot encode an empty image");
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, image.rgb.data(), 0, nullptr)) {
    throw FormatError(std::string("PNG encode failed: ") + img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, image.rgb.data(), 0, nullptr)) {
    throw FormatError(std::string("PNG encode failed: ") + img.message);
  }
  out.resize(size);
  return out;
}

Image read_png(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_png(bytes);
}

void write_png(const std::string& path, const Image& image) {
  const auto bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Image resize_bilinear(const Image& image, int w, int h) {
  if (image.empty()) throw std::invalid_argument("cannot resize an empty image");
  if (w <= 0 || h <= 0) throw std::invalid_argument("target size must be positive");
  if (w == image.width && h == image.height) return image;

  Image out(w, h);
  const double sx = static_cast<double>(image.width) / w;
  const double sy = static_cast<double>(image.height) / h;
  for (int y = 0; y < h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, image.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height - 1);
    const double ty = fy - y0;
    for (int x = 0; x < w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, image.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width - 1);
      const double tx = fx - x0;
      auto* dst = out.pixel(x, y);
      for (int c = 0; c < 3; ++c) {
        const double top = image.pixel(x0, y0)[c] * (1 - tx) + image.pixel(x1, y0)[c] * tx;
        const double bottom = image.pixel(x0, y1)[c] * (1 - tx) + image.pixel(x1, y1)[c] * tx;
        dst[c] = static_cast<std::uint8_t>(std::lround(std::clamp(top * (1 - ty) + bottom * ty, 0.0, 255.0)));
      }
    }
  }
  return out;
}

Image rescale_image(const Image& image, int max_dim) {
  if (image.empty()) throw std::invalid_argument("cannot rescale a zero-dimension image");
  const int larger = std::max(image.width, image.height);
  if (larger == max_dim) return image;
  const double s = static_cast<double>(max_dim) / larger;
  const int w = image.width >= image.height ? max_dim : std::max(1, static_cast<int>(std::lround(image.width * s)));
  const int h = image.height >= image.width ? max_dim : std::max(1, static_cast<int>(std::lround(image.height * s)));
  return resize_bilinear(image, w, h);
}

Image downscale_to_fit(const Image& image, int max_dim) {
  if (std::max(image.width, image.height) <= max_dim) return image;
  return rescale_image(image, max_dim);
}

}  // namespace orchestra
