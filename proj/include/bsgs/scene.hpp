#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cmath>
#include <string>
#include <vector>

#include "bsgs/lie.hpp"

namespace bsgs {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// One anisotropic 3D Gaussian. Scales are stored as logs so positivity is
/// structural; opacity as a logit for the same reason. Color is SH degree 0.
struct GaussianPrimitive {
  Vec3 center = Vec3::Zero();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();  // w,x,y,z
  Vec3 log_scale = Vec3::Zero();
  double opacity_logit = 0.0;
  Vec3 color = Vec3::Zero();

  Vec3 scales() const { return log_scale.array().exp(); }
  double opacity() const { return sigmoid(opacity_logit); }
};

/// Sigma = R diag(exp(2 log_scale)) R^T, with the stored quaternion
/// normalized before use.
Mat3 covariance_3d(const GaussianPrimitive& g);

struct Scene {
  std::vector<GaussianPrimitive> primitives;
  double scene_extent = 1.0;

  size_t size() const { return primitives.size(); }
};

/// Builds one primitive per point: isotropic scale from the mean distance to
/// the 3 nearest neighbors (floored at 1e-6 * scene_extent), opacity 0.1,
/// identity rotation, colors clamped to [0,1].
/// Throws InsufficientPoints for fewer than 4 points.
Scene init_scene(const std::vector<Vec3>& points, const std::vector<Vec3>& colors);

/// Binary checkpoint: "BSGS" magic, u32 version, u64 count, f64 scene_extent,
/// then 14 little-endian f32 per primitive (center, quaternion wxyz,
/// log_scale, opacity_logit, color).
void save_scene(const Scene& scene, const std::string& path);
Scene load_scene(const std::string& path);

}  // namespace bsgs
