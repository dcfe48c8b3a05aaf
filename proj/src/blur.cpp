#include "bsgs/blur.hpp"

#include "bsgs/errors.hpp"

namespace bsgs {

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double max = logits.maxCoeff();
  Eigen::VectorXd w = (logits.array() - max).exp();
  return w / w.sum();
}

Eigen::VectorXd BlurTrajectory::weights() const { return softmax(weight_logits); }

std::vector<double> BlurTrajectory::sample_params() const {
  if (n_subframes < 1) {
    throw ParameterOutOfRange("BlurTrajectory: n_subframes must be >= 1");
  }
  if (n_subframes == 1) return {0.5};
  std::vector<double> s(n_subframes);
  for (int i = 0; i < n_subframes; ++i) {
    s[i] = static_cast<double>(i) / (n_subframes - 1);
  }
  return s;
}

std::vector<Pose> sample_trajectory(const BlurTrajectory& traj) {
  std::vector<Pose> poses;
  poses.reserve(traj.n_subframes);
  for (const double s : traj.sample_params()) {
    const Pose p = interpolate_pose(traj.start, traj.end, s, traj.scheme);
    poses.push_back(traj.stage == BlurStage::PoseStage ? p : traj.base_pose * p);
  }
  return poses;
}

BlurResult synthesize_blur(const Scene& scene, const BlurTrajectory& traj,
                           const CameraIntrinsics& intrinsics,
                           const RenderOptions& options) {
  if (traj.weight_logits.size() != traj.n_subframes) {
    throw ShapeMismatch("synthesize_blur: weight logits size != n_subframes");
  }
  const Eigen::VectorXd w = traj.weights();
  const std::vector<Pose> poses = sample_trajectory(traj);

  BlurResult result;
  result.blurred = Image(intrinsics.width, intrinsics.height);
  result.stack.params = traj.sample_params();
  result.stack.frames.reserve(poses.size());
  result.stack.graphs.reserve(poses.size());

  for (size_t i = 0; i < poses.size(); ++i) {
    RenderResult r = render(scene, poses[i], intrinsics, options);
    for (size_t p = 0; p < result.blurred.data.size(); ++p) {
      result.blurred.data[p] += w[i] * r.image.data[p];
    }
    result.stack.frames.push_back(std::move(r.image));
    result.stack.graphs.push_back(std::move(r.graph));
  }
  return result;
}

BlurBackwardResult blur_backward(const SubframeStack& stack, const Eigen::VectorXd& weights,
                                 const Image& d_blurred) {
  const int n = stack.count();
  if (weights.size() != n) {
    throw ShapeMismatch("blur_backward: weight count != subframe count");
  }
  for (const Image& f : stack.frames) {
    if (!f.same_shape(d_blurred)) {
      throw ShapeMismatch("blur_backward: gradient image shape mismatch");
    }
  }

  BlurBackwardResult out;
  out.d_frames.reserve(n);
  Eigen::VectorXd d_weights(n);
  for (int i = 0; i < n; ++i) {
    Image df(d_blurred.width, d_blurred.height);
    double dot = 0.0;
    for (size_t p = 0; p < df.data.size(); ++p) {
      df.data[p] = weights[i] * d_blurred.data[p];
      dot += d_blurred.data[p] * stack.frames[i].data[p];
    }
    d_weights[i] = dot;
    out.d_frames.push_back(std::move(df));
  }

  // Softmax Jacobian: d w_i / d logit_j = w_i (delta_ij - w_j).
  const double mixed = weights.dot(d_weights);
  out.d_weight_logits = weights.cwiseProduct((d_weights.array() - mixed).matrix());
  return out;
}

}  // namespace bsgs
