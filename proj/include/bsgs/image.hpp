#pragma once

#include <string>
#include <vector>

namespace bsgs {

/// Float RGB image in [0,1], row-major, 3 channels.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // height * width * 3

  Image() = default;
  Image(int w, int h, double fill = 0.0) : width(w), height(h), data(size_t(w) * h * 3, fill) {}

  double& at(int x, int y, int c) { return data[(size_t(y) * width + x) * 3 + c]; }
  double at(int x, int y, int c) const { return data[(size_t(y) * width + x) * 3 + c]; }
  size_t pixel_count() const { return size_t(width) * height; }
  bool same_shape(const Image& other) const {
    return width == other.width && height == other.height;
  }
};

/// 8-bit RGB PNG with round-to-nearest quantization of the clamped values.
void write_png(const Image& image, const std::string& path);
Image read_png(const std::string& path);

/// ASCII PPM (P3), for debugging.
void write_ppm(const Image& image, const std::string& path);

}  // namespace bsgs
