#pragma once

#include <Eigen/Core>
#include <vector>

#include "bsgs/image.hpp"
#include "bsgs/lie.hpp"
#include "bsgs/rasterizer.hpp"
#include "bsgs/scene.hpp"

namespace bsgs {

enum class BlurStage { PoseStage, RigidStage };

/// One training image's exposure trajectory. In PoseStage, start/end are the
/// camera poses at the shutter endpoints. In RigidStage they are the global
/// rigid scene transforms M at the endpoints, applied around the frozen
/// mid-exposure pose base_pose; the effective camera pose of subframe i is
/// base_pose * M_i (transforming all Gaussians by M is the same render).
struct BlurTrajectory {
  BlurStage stage = BlurStage::PoseStage;
  Pose start;
  Pose end;
  Pose base_pose;
  TrajectoryScheme scheme;
  int n_subframes = 21;
  Eigen::VectorXd weight_logits;

  /// softmax(weight_logits): strictly positive, sums to 1.
  Eigen::VectorXd weights() const;

  /// Subframe parameters s_i = i/(n-1); a single subframe sits at s = 0.5.
  std::vector<double> sample_params() const;
};

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

/// Effective camera pose for every subframe.
std::vector<Pose> sample_trajectory(const BlurTrajectory& traj);

struct SubframeStack {
  std::vector<Image> frames;
  std::vector<RenderGraph> graphs;
  std::vector<double> params;

  int count() const { return static_cast<int>(frames.size()); }
};

struct BlurResult {
  Image blurred;
  SubframeStack stack;
};

/// Renders every subframe and blends them with the softmax weights:
/// B = sum_i w_i C_i.
BlurResult synthesize_blur(const Scene& scene, const BlurTrajectory& traj,
                           const CameraIntrinsics& intrinsics,
                           const RenderOptions& options = {});

struct BlurBackwardResult {
  std::vector<Image> d_frames;      // w_i * dL/dB per subframe
  Eigen::VectorXd d_weight_logits;  // pulled back through the softmax
};

BlurBackwardResult blur_backward(const SubframeStack& stack, const Eigen::VectorXd& weights,
                                 const Image& d_blurred);

}  // namespace bsgs
