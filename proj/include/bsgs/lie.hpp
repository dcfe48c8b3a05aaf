#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <vector>

namespace bsgs {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Rotation stored as a unit quaternion. Every constructor and operation
/// renormalizes, so the norm-1 invariant holds to machine precision.
class Rotation {
 public:
  Rotation() : q_(1.0, 0.0, 0.0, 0.0) {}
  explicit Rotation(const Eigen::Quaterniond& q) : q_(q.normalized()) {}
  static Rotation identity() { return Rotation(); }
  static Rotation from_matrix(const Mat3& m) { return Rotation(Eigen::Quaterniond(m)); }

  const Eigen::Quaterniond& quaternion() const { return q_; }
  Mat3 matrix() const { return q_.toRotationMatrix(); }

  Rotation operator*(const Rotation& rhs) const { return Rotation(q_ * rhs.q_); }
  Vec3 operator*(const Vec3& p) const { return q_ * p; }
  Rotation inverse() const { return Rotation(q_.conjugate()); }

  /// Rotation angle in [0, pi].
  double angle() const;

 private:
  Eigen::Quaterniond q_;
};

/// Rigid transform in SE(3): p -> R p + t.
struct Pose {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  Pose() = default;
  Pose(const Rotation& r, const Vec3& t) : rotation(r), translation(t) {}
  static Pose identity() { return Pose(); }

  Pose operator*(const Pose& rhs) const {
    return Pose(rotation * rhs.rotation, rotation * rhs.translation + translation);
  }
  Pose inverse() const {
    Rotation rinv = rotation.inverse();
    return Pose(rinv, -(rinv * translation));
  }
  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
};

/// Element of se(3): translational part rho, rotational part omega (radians).
struct Twist {
  Vec3 rho = Vec3::Zero();
  Vec3 omega = Vec3::Zero();

  Twist() = default;
  Twist(const Vec3& rho_, const Vec3& omega_) : rho(rho_), omega(omega_) {}
  explicit Twist(const Vec6& v) : rho(v.head<3>()), omega(v.tail<3>()) {}

  Vec6 vector() const {
    Vec6 v;
    v << rho, omega;
    return v;
  }
  Twist operator*(double s) const { return Twist(rho * s, omega * s); }
  double norm() const { return vector().norm(); }
};

Mat3 skew(const Vec3& v);

Rotation so3_exp(const Vec3& omega);
Vec3 so3_log(const Rotation& r);

/// Left Jacobian of SO(3); also the V matrix coupling rotation and
/// translation in the SE(3) exponential.
Mat3 so3_left_jacobian(const Vec3& omega);
Mat3 so3_left_jacobian_inv(const Vec3& omega);

Pose se3_exp(const Twist& xi);
/// Throws NearSingularRotation when the rotation angle is within 1e-6 of pi.
Twist se3_log(const Pose& t);

/// 6x6 left Jacobian of SE(3) and its inverse, in (rho, omega) block order.
Mat6 se3_left_jacobian(const Twist& xi);
Mat6 se3_left_jacobian_inv(const Twist& xi);

/// Adjoint of T: maps twists so that T * exp(xi) = exp(Adj(T) xi) * T.
Mat6 se3_adjoint(const Pose& t);

enum class SchemeKind { Linear, CubicSpline, Bezier };

/// Exposure-trajectory interpolation scheme. Linear uses only the two
/// endpoint poses; spline/Bezier thread the curve through
/// [start, interior..., end] with a cumulative-basis product, so the
/// endpoints are hit exactly at s=0 and s=1. Control-pose count is
/// interior.size() + 2 (default 4 via two interior poses).
struct TrajectoryScheme {
  SchemeKind kind = SchemeKind::Linear;
  std::vector<Pose> interior;

  static TrajectoryScheme linear() { return TrajectoryScheme{}; }
  static TrajectoryScheme cubic_spline(std::vector<Pose> interior_poses) {
    return TrajectoryScheme{SchemeKind::CubicSpline, std::move(interior_poses)};
  }
  static TrajectoryScheme bezier(std::vector<Pose> interior_poses) {
    return TrajectoryScheme{SchemeKind::Bezier, std::move(interior_poses)};
  }

  int control_count() const { return static_cast<int>(interior.size()) + 2; }
};

/// Virtual pose at parameter s in [0,1] along the exposure trajectory.
/// Throws ParameterOutOfRange for s outside [0,1].
Pose interpolate_pose(const Pose& t_start, const Pose& t_end, double s,
                      const TrajectoryScheme& scheme);

/// Left-perturbation Jacobians of interpolate_pose with respect to every
/// control pose, ordered [start, interior..., end]: entry k maps a left
/// twist perturbation of control pose k to the induced left twist
/// perturbation of the interpolated pose. Linear uses the closed form via
/// the SE(3) left Jacobian; spline/Bezier use central differences.
std::vector<Mat6> interpolate_pose_jacobians(const Pose& t_start, const Pose& t_end,
                                             double s, const TrajectoryScheme& scheme);

inline Vec3 apply_pose(const Pose& t, const Vec3& p) { return t.apply(p); }

}  // namespace bsgs
