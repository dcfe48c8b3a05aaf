#include "bsgs/lie.hpp"

#include <cmath>

#include "bsgs/errors.hpp"

namespace bsgs {

namespace {

constexpr double kSeriesAngle = 5e-2;  // below this, use Taylor series

// (1 - cos t) / t^2
double coeff_one_minus_cos(double t) {
  if (t < kSeriesAngle) {
    const double t2 = t * t;
    return 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
  }
  return (1.0 - std::cos(t)) / (t * t);
}

// (t - sin t) / t^3
double coeff_t_minus_sin(double t) {
  if (t < kSeriesAngle) {
    const double t2 = t * t;
    return 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
  }
  return (t - std::sin(t)) / (t * t * t);
}

// (1 - t^2/2 - cos t) / t^4
double coeff_q2(double t) {
  if (t < kSeriesAngle) {
    const double t2 = t * t;
    return 1.0 / 24.0 - t2 / 720.0 + t2 * t2 / 40320.0;
  }
  const double t2 = t * t;
  return (1.0 - 0.5 * t2 - std::cos(t)) / (t2 * t2);
}

// (t - sin t - t^3/6) / t^5
double coeff_q3(double t) {
  if (t < kSeriesAngle) {
    const double t2 = t * t;
    return -1.0 / 120.0 + t2 / 5040.0 - t2 * t2 / 362880.0;
  }
  const double t2 = t * t;
  return (t - std::sin(t) - t * t2 / 6.0) / (t2 * t2 * t);
}

// Barfoot's Q matrix: the off-diagonal block of the SE(3) left Jacobian.
Mat3 se3_jacobian_q(const Vec3& rho, const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 wx = skew(omega);
  const Mat3 px = skew(rho);
  const double c1 = coeff_t_minus_sin(theta);
  const double c2 = coeff_q2(theta);
  const double c3 = c2 - 3.0 * coeff_q3(theta);

  Mat3 q = 0.5 * px;
  q += c1 * (wx * px + px * wx + wx * px * wx);
  q -= c2 * (wx * wx * px + px * wx * wx - 3.0 * wx * px * wx);
  q -= 0.5 * c3 * (wx * px * wx * wx + wx * wx * px * wx);
  return q;
}

}  // namespace

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

double Rotation::angle() const {
  // Canonical w >= 0 keeps the angle in [0, pi].
  const double w = std::abs(q_.w());
  const double v = q_.vec().norm();
  return 2.0 * std::atan2(v, w);
}

Rotation so3_exp(const Vec3& omega) {
  const double theta = omega.norm();
  double half_sinc;  // sin(theta/2) / theta
  if (theta < 1e-8) {
    half_sinc = 0.5 - theta * theta / 48.0;
  } else {
    half_sinc = std::sin(0.5 * theta) / theta;
  }
  Eigen::Quaterniond q(std::cos(0.5 * theta), half_sinc * omega.x(),
                       half_sinc * omega.y(), half_sinc * omega.z());
  return Rotation(q);
}

Vec3 so3_log(const Rotation& r) {
  // The quaternion route is stable for all angles up to and including pi;
  // near pi it plays the role of the eigenvector-based axis extraction.
  Eigen::Quaterniond q = r.quaternion();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();  // canonical form, angle in [0, pi]
  const double vnorm = q.vec().norm();
  const double theta = 2.0 * std::atan2(vnorm, q.w());
  if (vnorm < 1e-12) {
    return 2.0 * q.vec();  // theta/2 ~ vnorm, axis*theta ~ 2*vec
  }
  return (theta / vnorm) * q.vec();
}

Mat3 so3_left_jacobian(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 wx = skew(omega);
  return Mat3::Identity() + coeff_one_minus_cos(theta) * wx +
         coeff_t_minus_sin(theta) * wx * wx;
}

Mat3 so3_left_jacobian_inv(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 wx = skew(omega);
  double k;
  if (theta < kSeriesAngle) {
    const double t2 = theta * theta;
    k = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
  } else {
    k = 1.0 / (theta * theta) -
        (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  }
  return Mat3::Identity() - 0.5 * wx + k * wx * wx;
}

Pose se3_exp(const Twist& xi) {
  return Pose(so3_exp(xi.omega), so3_left_jacobian(xi.omega) * xi.rho);
}

Twist se3_log(const Pose& t) {
  const Vec3 omega = so3_log(t.rotation);
  if (omega.norm() > M_PI - 1e-6) {
    throw NearSingularRotation("se3_log: rotation angle within 1e-6 of pi");
  }
  return Twist(so3_left_jacobian_inv(omega) * t.translation, omega);
}

Mat6 se3_left_jacobian(const Twist& xi) {
  const Mat3 j = so3_left_jacobian(xi.omega);
  Mat6 out = Mat6::Zero();
  out.topLeftCorner<3, 3>() = j;
  out.bottomRightCorner<3, 3>() = j;
  out.topRightCorner<3, 3>() = se3_jacobian_q(xi.rho, xi.omega);
  return out;
}

Mat6 se3_left_jacobian_inv(const Twist& xi) {
  const Mat3 jinv = so3_left_jacobian_inv(xi.omega);
  const Mat3 q = se3_jacobian_q(xi.rho, xi.omega);
  Mat6 out = Mat6::Zero();
  out.topLeftCorner<3, 3>() = jinv;
  out.bottomRightCorner<3, 3>() = jinv;
  out.topRightCorner<3, 3>() = -jinv * q * jinv;
  return out;
}

Mat6 se3_adjoint(const Pose& t) {
  const Mat3 r = t.rotation.matrix();
  Mat6 out = Mat6::Zero();
  out.topLeftCorner<3, 3>() = r;
  out.bottomRightCorner<3, 3>() = r;
  out.topRightCorner<3, 3>() = skew(t.translation) * r;
  return out;
}

namespace {

// Bernstein basis values B_j^{n}(u), j = 0..n.
std::vector<double> bernstein_basis(int n, double u) {
  std::vector<double> b(n + 1, 0.0);
  b[0] = 1.0;
  for (int j = 1; j <= n; ++j) {
    for (int k = j; k >= 1; --k) b[k] = b[k - 1] * u + b[k] * (1.0 - u);
    b[0] *= (1.0 - u);
  }
  return b;
}

// Clamped cubic B-spline basis over m control points, open-uniform knots on
// [0,1]. Returns N_j(u) for j = 0..m-1.
std::vector<double> clamped_cubic_bspline_basis(int m, double u) {
  const int degree = 3;
  const int n_knots = m + degree + 1;
  std::vector<double> knots(n_knots);
  const int n_interior = m - degree - 1;  // strictly interior knots
  for (int i = 0; i < n_knots; ++i) {
    if (i <= degree) {
      knots[i] = 0.0;
    } else if (i >= m) {
      knots[i] = 1.0;
    } else {
      knots[i] = static_cast<double>(i - degree) / (n_interior + 1);
    }
  }

  // Cox-de Boor, degree 0 seeds. The last span is closed at u = 1.
  std::vector<double> basis(n_knots - 1, 0.0);
  for (int j = 0; j < n_knots - 1; ++j) {
    const bool last_span = knots[j] < 1.0 && knots[j + 1] >= 1.0;
    if ((u >= knots[j] && u < knots[j + 1]) || (u >= 1.0 && last_span)) {
      basis[j] = 1.0;
    }
  }
  for (int d = 1; d <= degree; ++d) {
    for (int j = 0; j + d + 1 < n_knots; ++j) {
      double left = 0.0, right = 0.0;
      if (knots[j + d] > knots[j]) {
        left = (u - knots[j]) / (knots[j + d] - knots[j]) * basis[j];
      }
      if (knots[j + d + 1] > knots[j + 1]) {
        right = (knots[j + d + 1] - u) / (knots[j + d + 1] - knots[j + 1]) * basis[j + 1];
      }
      basis[j] = left + right;
    }
  }
  basis.resize(m);
  return basis;
}

Pose cumulative_basis_pose(const std::vector<Pose>& control, const std::vector<double>& basis,
                           double /*u*/) {
  const int m = static_cast<int>(control.size());
  // Cumulative weights: btilde_i = sum_{j >= i} basis_j. btilde_0 is 1 by
  // partition of unity and multiplies nothing.
  Pose out = control[0];
  double cumulative = 1.0;
  for (int i = 1; i < m; ++i) {
    cumulative -= basis[i - 1];
    const double w = std::clamp(cumulative, 0.0, 1.0);
    const Twist step = se3_log(control[i - 1].inverse() * control[i]);
    out = out * se3_exp(step * w);
  }
  return out;
}

std::vector<Pose> control_list(const Pose& t_start, const Pose& t_end,
                               const TrajectoryScheme& scheme) {
  std::vector<Pose> control;
  control.reserve(scheme.interior.size() + 2);
  control.push_back(t_start);
  for (const Pose& p : scheme.interior) control.push_back(p);
  control.push_back(t_end);
  return control;
}

Pose interpolate_checked(const Pose& t_start, const Pose& t_end, double s,
                         const TrajectoryScheme& scheme) {
  switch (scheme.kind) {
    case SchemeKind::Linear: {
      if (s == 0.0) return t_start;
      const Twist xi = se3_log(t_start.inverse() * t_end);
      return t_start * se3_exp(xi * s);
    }
    case SchemeKind::CubicSpline: {
      const std::vector<Pose> control = control_list(t_start, t_end, scheme);
      const int m = static_cast<int>(control.size());
      if (m < 4) {
        // Fewer than degree+1 control poses: fall back to Bezier of lower order.
        return cumulative_basis_pose(control, bernstein_basis(m - 1, s), s);
      }
      return cumulative_basis_pose(control, clamped_cubic_bspline_basis(m, s), s);
    }
    case SchemeKind::Bezier: {
      const std::vector<Pose> control = control_list(t_start, t_end, scheme);
      return cumulative_basis_pose(control, bernstein_basis(static_cast<int>(control.size()) - 1, s), s);
    }
  }
  return t_start;
}

}  // namespace

Pose interpolate_pose(const Pose& t_start, const Pose& t_end, double s,
                      const TrajectoryScheme& scheme) {
  if (s < 0.0 || s > 1.0) {
    throw ParameterOutOfRange("interpolate_pose: s = " + std::to_string(s) +
                              " outside [0,1]");
  }
  return interpolate_checked(t_start, t_end, s, scheme);
}

std::vector<Mat6> interpolate_pose_jacobians(const Pose& t_start, const Pose& t_end,
                                             double s, const TrajectoryScheme& scheme) {
  if (s < 0.0 || s > 1.0) {
    throw ParameterOutOfRange("interpolate_pose_jacobians: s outside [0,1]");
  }

  if (scheme.kind == SchemeKind::Linear) {
    // T(s) = T_a exp(s xi), xi = log(T_a^-1 T_b). A left perturbation of T_b
    // maps through A_end below; T_a gets the complement I - A_end.
    const Twist xi = se3_log(t_start.inverse() * t_end);
    const Mat6 adj = se3_adjoint(t_start);
    const Mat6 a_end =
        adj * (s * se3_left_jacobian(xi * s) * se3_left_jacobian_inv(xi)) *
        se3_adjoint(t_start.inverse());
    return {Mat6::Identity() - a_end, a_end};
  }

  // Spline/Bezier: central differences of the interpolation map per control
  // pose. Cheap relative to rendering, and exact enough for optimization.
  const double h = 1e-6;
  std::vector<Pose> control = control_list(t_start, t_end, scheme);
  const int m = static_cast<int>(control.size());
  std::vector<Mat6> jacobians(m);
  for (int k = 0; k < m; ++k) {
    Mat6 jac;
    for (int j = 0; j < 6; ++j) {
      Vec6 delta = Vec6::Zero();
      delta[j] = h;
      std::vector<Pose> cp = control;
      cp[k] = se3_exp(Twist(delta)) * control[k];
      TrajectoryScheme plus{scheme.kind, {cp.begin() + 1, cp.end() - 1}};
      const Pose tp = interpolate_checked(cp.front(), cp.back(), s, plus);
      cp[k] = se3_exp(Twist(-delta)) * control[k];
      TrajectoryScheme minus{scheme.kind, {cp.begin() + 1, cp.end() - 1}};
      const Pose tm = interpolate_checked(cp.front(), cp.back(), s, minus);
      jac.col(j) = se3_log(tp * tm.inverse()).vector() / (2.0 * h);
    }
    jacobians[k] = jac;
  }
  return jacobians;
}

}  // namespace bsgs
