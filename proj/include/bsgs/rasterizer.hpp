#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "bsgs/image.hpp"
#include "bsgs/lie.hpp"
#include "bsgs/scene.hpp"

namespace bsgs {

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  void validate() const;
};

/// A Gaussian after EWA projection to the image plane. cov2d includes the
/// 0.3-pixel dilation. Pixel sample positions are the integer coordinates
/// (x, y), and mean2d lives in the same continuous frame.
struct ProjectedGaussian {
  Eigen::Vector2d mean2d = Eigen::Vector2d::Zero();
  Eigen::Matrix2d cov2d = Eigen::Matrix2d::Identity();
  double depth = 0.0;
  double compositing_alpha_peak = 0.0;  // opacity clamped to the 0.99 cap
};

struct RenderOptions {
  Vec3 background = Vec3::Zero();
  double near_clip_frac = 0.01;  // near clip = frac * scene_extent
  // When set (indexed by scene primitive), projected covariances are taken
  // from this array instead of the pose. Used by the covariance-frozen
  // pose-gradient harness; parameter gradients other than the pose are not
  // meaningful in this mode.
  const std::vector<Eigen::Matrix2d>* frozen_cov2d = nullptr;
};

/// Retained intermediates of one forward render, enough to run the exact
/// backward pass without re-sorting.
struct RenderGraph {
  Pose camera_pose;
  CameraIntrinsics intrinsics;
  RenderOptions options;
  double near_clip = 0.0;

  std::vector<int> visible;                  // scene indices, depth ascending
  std::vector<ProjectedGaussian> projected;  // per visible
  std::vector<Eigen::Matrix2d> cov2d_inv;    // per visible
  std::vector<double> radius_px;             // per visible, bounding radius

  int tiles_x = 0;
  int tiles_y = 0;
  std::vector<std::vector<int>> tile_lists;  // per tile, indices into visible

  std::vector<double> final_transmittance;  // per pixel
};

/// Gradients for every primitive parameter plus the per-primitive view-space
/// positional gradient (pixels) that drives densification.
struct SceneGradients {
  std::vector<Vec3> d_center;
  std::vector<Eigen::Vector4d> d_rotation;  // w,x,y,z
  std::vector<Vec3> d_log_scale;
  std::vector<double> d_opacity_logit;
  std::vector<Vec3> d_color;
  std::vector<Eigen::Vector2d> d_mean2d;

  explicit SceneGradients(size_t n = 0)
      : d_center(n, Vec3::Zero()),
        d_rotation(n, Eigen::Vector4d::Zero()),
        d_log_scale(n, Vec3::Zero()),
        d_opacity_logit(n, 0.0),
        d_color(n, Vec3::Zero()),
        d_mean2d(n, Eigen::Vector2d::Zero()) {}

  size_t size() const { return d_center.size(); }
};

/// EWA projection of one primitive; nullopt means culled (center at or
/// behind the near clip plane).
std::optional<ProjectedGaussian> project_gaussian(const GaussianPrimitive& g,
                                                  const Pose& camera_pose,
                                                  const CameraIntrinsics& intrinsics,
                                                  double near_clip);

struct RenderResult {
  Image image;
  RenderGraph graph;
};

/// Front-to-back alpha compositing over 16x16 tiles with a global depth
/// sort. Contributions with alpha below 1/255 are skipped; alpha is capped
/// at 0.99.
RenderResult render(const Scene& scene, const Pose& camera_pose,
                    const CameraIntrinsics& intrinsics, const RenderOptions& options = {});

struct BackwardResult {
  SceneGradients gradients;
  Twist pose_gradient;  // left-perturbation twist of the camera pose
};

/// Exact adjoint of the forward compositing for all Gaussian parameters
/// (including the covariance path). The pose gradient deliberately flows
/// only through the Gaussian centers, with the covariance's pose dependence
/// dropped. The scene must be the one the graph was rendered from.
/// Throws ShapeMismatch if the gradient image shape differs from the render.
BackwardResult render_backward(const RenderGraph& graph, const Scene& scene,
                               const Image& loss_gradient);

}  // namespace bsgs
