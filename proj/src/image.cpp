#include "bsgs/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "bsgs/errors.hpp"

namespace bsgs {

namespace {

unsigned char quantize(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<unsigned char>(std::lround(c * 255.0));
}

}  // namespace

void write_png(const Image& image, const std::string& path) {
  std::vector<unsigned char> bytes(image.data.size());
  for (size_t i = 0; i < image.data.size(); ++i) bytes[i] = quantize(image.data[i]);

  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    throw IoError("write_png: " + path + ": " + png.message);
  }
}

Image read_png(const std::string& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw IoError("read_png: " + path + ": " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> bytes(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, bytes.data(), 0, nullptr)) {
    throw IoError("read_png: " + path + ": " + png.message);
  }
  Image image(static_cast<int>(png.width), static_cast<int>(png.height));
  for (size_t i = 0; i < bytes.size(); ++i) image.data[i] = bytes[i] / 255.0;
  return image;
}

void write_ppm(const Image& image, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("write_ppm: cannot open " + path);
  out << "P3\n" << image.width << " " << image.height << "\n255\n";
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      out << int(quantize(image.at(x, y, 0))) << " " << int(quantize(image.at(x, y, 1)))
          << " " << int(quantize(image.at(x, y, 2))) << (x + 1 == image.width ? "" : " ");
    }
    out << "\n";
  }
}

}  // namespace bsgs
