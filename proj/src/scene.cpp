#include "bsgs/scene.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "bsgs/errors.hpp"

namespace bsgs {

Mat3 covariance_3d(const GaussianPrimitive& g) {
  const Mat3 r = g.rotation.normalized().toRotationMatrix();
  const Vec3 s2 = (2.0 * g.log_scale).array().exp();
  Mat3 sigma = r * s2.asDiagonal() * r.transpose();
  // Symmetrize away the last bits of asymmetry from the triple product.
  return 0.5 * (sigma + sigma.transpose());
}

Scene init_scene(const std::vector<Vec3>& points, const std::vector<Vec3>& colors) {
  if (points.size() < 4) {
    throw InsufficientPoints("init_scene: need at least 4 points, got " +
                             std::to_string(points.size()));
  }
  if (colors.size() != points.size()) {
    throw ShapeMismatch("init_scene: point/color count mismatch");
  }

  const size_t n = points.size();
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : points) centroid += p;
  centroid /= static_cast<double>(n);

  double extent = 0.0;
  for (const Vec3& p : points) extent = std::max(extent, (p - centroid).norm());
  if (extent <= 0.0) extent = 1.0;

  Scene scene;
  scene.scene_extent = extent;
  scene.primitives.resize(n);

  const double floor = 1e-6 * extent;
  std::vector<double> d2(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) d2[j] = (points[j] - points[i]).squaredNorm();
    d2[i] = std::numeric_limits<double>::infinity();
    std::nth_element(d2.begin(), d2.begin() + 2, d2.end());
    const double mean_dist =
        (std::sqrt(d2[0]) + std::sqrt(d2[1]) + std::sqrt(d2[2])) / 3.0;
    const double scale = std::max(mean_dist, floor);

    GaussianPrimitive& g = scene.primitives[i];
    g.center = points[i];
    g.log_scale = Vec3::Constant(std::log(scale));
    g.opacity_logit = logit(0.1);
    g.color = colors[i].cwiseMax(0.0).cwiseMin(1.0);
  }
  return scene;
}

namespace {

void put_f32(std::ostream& out, double v) {
  const float f = static_cast<float>(v);
  uint32_t bits;
  std::memcpy(&bits, &f, 4);
  unsigned char b[4] = {static_cast<unsigned char>(bits & 0xff),
                        static_cast<unsigned char>((bits >> 8) & 0xff),
                        static_cast<unsigned char>((bits >> 16) & 0xff),
                        static_cast<unsigned char>((bits >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

double get_f32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  const uint32_t bits = static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
                        (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
  float f;
  std::memcpy(&f, &bits, 4);
  return static_cast<double>(f);
}

template <typename T>
void put_le(std::ostream& out, T v) {
  for (size_t i = 0; i < sizeof(T); ++i) {
    out.put(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

template <typename T>
T get_le(std::istream& in) {
  T v = 0;
  for (size_t i = 0; i < sizeof(T); ++i) {
    const int c = in.get();
    v |= static_cast<T>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

}  // namespace

void save_scene(const Scene& scene, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_scene: cannot open " + path);
  out.write("BSGS", 4);
  put_le<uint32_t>(out, 1);
  put_le<uint64_t>(out, scene.primitives.size());
  uint64_t ext_bits;
  static_assert(sizeof(double) == 8);
  std::memcpy(&ext_bits, &scene.scene_extent, 8);
  put_le<uint64_t>(out, ext_bits);
  for (const GaussianPrimitive& g : scene.primitives) {
    put_f32(out, g.center.x());
    put_f32(out, g.center.y());
    put_f32(out, g.center.z());
    put_f32(out, g.rotation.w());
    put_f32(out, g.rotation.x());
    put_f32(out, g.rotation.y());
    put_f32(out, g.rotation.z());
    put_f32(out, g.log_scale.x());
    put_f32(out, g.log_scale.y());
    put_f32(out, g.log_scale.z());
    put_f32(out, g.opacity_logit);
    put_f32(out, g.color.x());
    put_f32(out, g.color.y());
    put_f32(out, g.color.z());
  }
  if (!out) throw IoError("save_scene: write failed for " + path);
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_scene: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "BSGS", 4) != 0) {
    throw IoError("load_scene: bad magic in " + path);
  }
  const uint32_t version = get_le<uint32_t>(in);
  if (version != 1) throw IoError("load_scene: unsupported version " + std::to_string(version));
  const uint64_t count = get_le<uint64_t>(in);
  const uint64_t ext_bits = get_le<uint64_t>(in);
  Scene scene;
  std::memcpy(&scene.scene_extent, &ext_bits, 8);
  scene.primitives.resize(count);
  // Reads are sequenced one by one; packed constructor calls would leave the
  // evaluation order unspecified.
  double v[14];
  for (GaussianPrimitive& g : scene.primitives) {
    for (double& x : v) x = get_f32(in);
    g.center = Vec3(v[0], v[1], v[2]);
    g.rotation = Eigen::Quaterniond(v[3], v[4], v[5], v[6]);
    g.log_scale = Vec3(v[7], v[8], v[9]);
    g.opacity_logit = v[10];
    g.color = Vec3(v[11], v[12], v[13]);
  }
  if (!in) throw IoError("load_scene: truncated file " + path);
  return scene;
}

}  // namespace bsgs
