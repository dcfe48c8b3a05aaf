#include "bsgs/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "bsgs/errors.hpp"

namespace bsgs {

Image error_map(const Image& a, const Image& b, const std::string& out_path) {
  if (!a.same_shape(b)) throw ShapeMismatch("error_map: image shapes differ");
  Image heat(a.width, a.height);
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      double diff = 0.0;
      for (int c = 0; c < 3; ++c) diff += std::abs(a.at(x, y, c) - b.at(x, y, c));
      const double v = diff / 3.0;
      heat.at(x, y, 0) = std::clamp(3.0 * v, 0.0, 1.0);
      heat.at(x, y, 1) = std::clamp(3.0 * v - 1.0, 0.0, 1.0);
      heat.at(x, y, 2) = std::clamp(3.0 * v - 2.0, 0.0, 1.0);
    }
  }
  if (!out_path.empty()) write_png(heat, out_path);
  return heat;
}

}  // namespace bsgs
