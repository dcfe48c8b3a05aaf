#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "bsgs/errors.hpp"
#include "bsgs/lie.hpp"

using namespace bsgs;

namespace {

// 4x4 homogeneous form, for oracles only.
Eigen::Matrix4d homogeneous(const Pose& t) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = t.rotation.matrix();
  m.topRightCorner<3, 1>() = t.translation;
  return m;
}

Eigen::Matrix4d twist_hat(const Twist& xi) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m.topLeftCorner<3, 3>() = skew(xi.omega);
  m.topRightCorner<3, 1>() = xi.rho;
  return m;
}

// Oracle: integrate dT/dt = hat(xi) * T from identity over [0,1] with RK4.
Eigen::Matrix4d integrate_screw(const Twist& xi, int steps) {
  const Eigen::Matrix4d a = twist_hat(xi);
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  const double h = 1.0 / steps;
  for (int i = 0; i < steps; ++i) {
    const Eigen::Matrix4d k1 = a * t;
    const Eigen::Matrix4d k2 = a * (t + 0.5 * h * k1);
    const Eigen::Matrix4d k3 = a * (t + 0.5 * h * k2);
    const Eigen::Matrix4d k4 = a * (t + h * k3);
    t += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return t;
}

std::mt19937_64 rng_with(uint64_t seed) { return std::mt19937_64(seed); }

Vec3 random_vec3(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> d(-scale, scale);
  return Vec3(d(rng), d(rng), d(rng));
}

Pose random_pose(std::mt19937_64& rng, double rot_scale = 2.0, double trans_scale = 3.0) {
  return Pose(so3_exp(random_vec3(rng, rot_scale)), random_vec3(rng, trans_scale));
}

double pose_distance(const Pose& a, const Pose& b) {
  const Pose d = a.inverse() * b;
  return d.translation.norm() + d.rotation.angle();
}

}  // namespace

TEST_CASE("so3_exp closed forms") {
  CHECK(so3_exp(Vec3::Zero()).matrix().isApprox(Mat3::Identity(), 1e-15));

  Mat3 expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  CHECK(so3_exp(Vec3(0, 0, M_PI / 2)).matrix().isApprox(expected, 1e-12));
}

TEST_CASE("so3_exp tiny angle matches truncated series") {
  const Vec3 w(1e-10, 0, 0);
  // Oracle: R = I + [w]x + [w]x^2/2 truncated at second order.
  const Mat3 series = Mat3::Identity() + skew(w) + 0.5 * skew(w) * skew(w);
  CHECK((so3_exp(w).matrix() - series).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("so3_log closed forms and round trip") {
  CHECK(so3_log(Rotation::identity()).norm() == doctest::Approx(0.0));
  CHECK((so3_log(so3_exp(Vec3(0, 0, M_PI / 2))) - Vec3(0, 0, M_PI / 2)).norm() < 1e-12);

  auto rng = rng_with(17);
  for (int i = 0; i < 1000; ++i) {
    const Rotation r = so3_exp(random_vec3(rng, 3.0));
    const Rotation back = so3_exp(so3_log(r));
    CHECK((back.matrix() - r.matrix()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("so3_log near pi returns a valid axis") {
  const Vec3 axis = Vec3(1, 2, -1).normalized();
  for (double angle : {M_PI - 1e-7, M_PI - 1e-10, M_PI}) {
    const Rotation r = so3_exp(axis * angle);
    const Vec3 w = so3_log(r);
    CHECK(w.norm() <= M_PI + 1e-12);
    CHECK((so3_exp(w).matrix() - r.matrix()).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("rotation invariants") {
  auto rng = rng_with(3);
  Rotation r = Rotation::identity();
  for (int i = 0; i < 200; ++i) {
    r = r * so3_exp(random_vec3(rng, 2.0));
    CHECK(std::abs(r.quaternion().norm() - 1.0) < 1e-9);
    const Mat3 m = r.matrix();
    CHECK((m * m.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(m.determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("se3_exp trivial cases") {
  const Pose id = se3_exp(Twist());
  CHECK(id.translation.norm() == 0.0);
  CHECK(id.rotation.angle() == 0.0);

  const Pose t = se3_exp(Twist(Vec3(1, 2, 3), Vec3::Zero()));
  CHECK((t.translation - Vec3(1, 2, 3)).norm() < 1e-15);
  CHECK(t.rotation.angle() < 1e-15);
}

TEST_CASE("se3_exp matches screw-motion integration oracle") {
  const Twist xi(Vec3(1, 0, 0), Vec3(0, 0, M_PI / 2));
  const Eigen::Matrix4d oracle = integrate_screw(xi, 2000);
  const Eigen::Matrix4d ours = homogeneous(se3_exp(xi));
  CHECK((ours - oracle).cwiseAbs().maxCoeff() < 1e-10);

  auto rng = rng_with(11);
  for (int i = 0; i < 20; ++i) {
    const Twist x(random_vec3(rng, 2.0), random_vec3(rng, 2.5));
    CHECK((homogeneous(se3_exp(x)) - integrate_screw(x, 2000)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("se3 exp/log round trip over 1000 random twists") {
  auto rng = rng_with(42);
  std::uniform_real_distribution<double> mag(0.0, 2.99);
  for (int i = 0; i < 1000; ++i) {
    Vec3 w = random_vec3(rng, 1.0);
    if (w.norm() > 0) w = w.normalized() * mag(rng);
    const Twist xi(random_vec3(rng, 5.0), w);
    const Twist back = se3_log(se3_exp(xi));
    CHECK((back.vector() - xi.vector()).norm() < 1e-8);
  }
}

TEST_CASE("se3_log near pi throws") {
  const Pose t(so3_exp(Vec3(0, 0, M_PI - 1e-9)), Vec3(1, 0, 0));
  CHECK_THROWS_AS(se3_log(t), NearSingularRotation);
}

TEST_CASE("apply_pose") {
  auto rng = rng_with(5);
  const Vec3 p = random_vec3(rng, 2.0);
  CHECK((apply_pose(Pose::identity(), p) - p).norm() == 0.0);
  CHECK((apply_pose(Pose(Rotation::identity(), Vec3(1, 0, 0)), Vec3::Zero()) - Vec3(1, 0, 0)).norm() == 0.0);
  CHECK((apply_pose(Pose(so3_exp(Vec3(0, 0, M_PI / 2)), Vec3::Zero()), Vec3(1, 0, 0)) - Vec3(0, 1, 0)).norm() < 1e-12);
}

TEST_CASE("interpolation endpoint exactness for all schemes") {
  auto rng = rng_with(7);
  for (int i = 0; i < 50; ++i) {
    const Pose a = random_pose(rng);
    const Pose b = random_pose(rng);
    std::vector<TrajectoryScheme> schemes = {
        TrajectoryScheme::linear(),
        TrajectoryScheme::cubic_spline({random_pose(rng), random_pose(rng)}),
        TrajectoryScheme::bezier({random_pose(rng), random_pose(rng)}),
    };
    for (const auto& scheme : schemes) {
      CHECK(pose_distance(interpolate_pose(a, b, 0.0, scheme), a) < 1e-12);
      CHECK(pose_distance(interpolate_pose(a, b, 1.0, scheme), b) < 1e-9);
    }
  }
}

TEST_CASE("linear geodesic midpoint of a 90 degree z-rotation") {
  const Pose a = Pose::identity();
  const Pose b(so3_exp(Vec3(0, 0, M_PI / 2)), Vec3::Zero());
  const Pose mid = interpolate_pose(a, b, 0.5, TrajectoryScheme::linear());
  // Oracle: closed-form 45 degree rotation about z.
  CHECK((mid.rotation.matrix() - so3_exp(Vec3(0, 0, M_PI / 4)).matrix()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(mid.translation.norm() < 1e-12);
}

TEST_CASE("linear geodesic consistency") {
  auto rng = rng_with(23);
  for (int i = 0; i < 100; ++i) {
    const Pose a = random_pose(rng);
    const Pose b = random_pose(rng);
    const double s = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    const Pose mid = interpolate_pose(a, b, s, TrajectoryScheme::linear());
    const Pose rest = interpolate_pose(mid, b, 1.0, TrajectoryScheme::linear());
    CHECK(pose_distance(rest, b) < 1e-8);
    // Continuing from mid by the remaining fraction of the residual geodesic
    // must land on the same point as interpolating a->b directly.
    const double s2 = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const Pose via = interpolate_pose(mid, b, s2, TrajectoryScheme::linear());
    const Pose direct = interpolate_pose(a, b, s + (1.0 - s) * s2, TrajectoryScheme::linear());
    CHECK(pose_distance(via, direct) < 1e-8);
  }
}

TEST_CASE("linear scheme is left invariant") {
  auto rng = rng_with(31);
  for (int i = 0; i < 100; ++i) {
    const Pose a = random_pose(rng);
    const Pose b = random_pose(rng);
    const Pose g = random_pose(rng);
    const double s = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const Pose lhs = interpolate_pose(g * a, g * b, s, TrajectoryScheme::linear());
    const Pose rhs = g * interpolate_pose(a, b, s, TrajectoryScheme::linear());
    CHECK(pose_distance(lhs, rhs) < 1e-9);
  }
}

TEST_CASE("spline and bezier are left invariant too") {
  auto rng = rng_with(37);
  for (int i = 0; i < 20; ++i) {
    const Pose a = random_pose(rng, 0.8, 1.0);
    const Pose b = random_pose(rng, 0.8, 1.0);
    const Pose c0 = random_pose(rng, 0.8, 1.0);
    const Pose c1 = random_pose(rng, 0.8, 1.0);
    const Pose g = random_pose(rng);
    const double s = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    for (auto kind : {SchemeKind::CubicSpline, SchemeKind::Bezier}) {
      const TrajectoryScheme plain{kind, {c0, c1}};
      const TrajectoryScheme moved{kind, {g * c0, g * c1}};
      const Pose lhs = interpolate_pose(g * a, g * b, s, moved);
      const Pose rhs = g * interpolate_pose(a, b, s, plain);
      CHECK(pose_distance(lhs, rhs) < 1e-9);
    }
  }
}

TEST_CASE("parameter out of range") {
  CHECK_THROWS_AS(interpolate_pose(Pose::identity(), Pose::identity(), -0.1, TrajectoryScheme::linear()),
                  ParameterOutOfRange);
  CHECK_THROWS_AS(interpolate_pose(Pose::identity(), Pose::identity(), 1.1, TrajectoryScheme::linear()),
                  ParameterOutOfRange);
}

TEST_CASE("translation-only interpolation is linear in translation") {
  const Pose a(Rotation::identity(), Vec3::Zero());
  const Pose b(Rotation::identity(), Vec3(2, 0, 0));
  for (int i = 0; i < 3; ++i) {
    const double s = i / 2.0;
    const Pose p = interpolate_pose(a, b, s, TrajectoryScheme::linear());
    CHECK((p.translation - Vec3(2.0 * s, 0, 0)).norm() < 1e-12);
  }
}

TEST_CASE("se3 left jacobian matches finite differences of exp") {
  auto rng = rng_with(53);
  const double h = 1e-6;
  for (int i = 0; i < 25; ++i) {
    const Twist xi(random_vec3(rng, 2.0), random_vec3(rng, 1.8));
    const Mat6 jl = se3_left_jacobian(xi);
    const Pose base = se3_exp(xi);
    for (int j = 0; j < 6; ++j) {
      Vec6 d = Vec6::Zero();
      d[j] = h;
      const Pose plus = se3_exp(Twist(xi.vector() + d));
      const Pose minus = se3_exp(Twist(xi.vector() - d));
      const Vec6 fd = se3_log(plus * minus.inverse()).vector() / (2.0 * h);
      CHECK((fd - jl.col(j)).norm() < 1e-5);
    }
    CHECK((se3_left_jacobian_inv(xi) * jl - Mat6::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("adjoint identity") {
  auto rng = rng_with(59);
  for (int i = 0; i < 50; ++i) {
    const Pose t = random_pose(rng);
    const Twist xi(random_vec3(rng, 0.5), random_vec3(rng, 0.5));
    const Pose lhs = t * se3_exp(xi) * t.inverse();
    const Pose rhs = se3_exp(Twist(se3_adjoint(t) * xi.vector()));
    CHECK(pose_distance(lhs, rhs) < 1e-9);
  }
}

TEST_CASE("interpolation jacobians match finite differences") {
  auto rng = rng_with(61);
  const double h = 1e-6;
  for (int trial = 0; trial < 8; ++trial) {
    const Pose a = random_pose(rng, 1.0, 2.0);
    const Pose b = random_pose(rng, 1.0, 2.0);
    std::vector<TrajectoryScheme> schemes = {
        TrajectoryScheme::linear(),
        TrajectoryScheme::bezier({random_pose(rng, 1.0, 2.0), random_pose(rng, 1.0, 2.0)}),
        TrajectoryScheme::cubic_spline({random_pose(rng, 1.0, 2.0), random_pose(rng, 1.0, 2.0)}),
    };
    const double s = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
    for (const auto& scheme : schemes) {
      const auto jacs = interpolate_pose_jacobians(a, b, s, scheme);
      // Endpoint k=0 is T_start; the last is T_end.
      for (size_t k : {size_t(0), jacs.size() - 1}) {
        for (int j = 0; j < 6; ++j) {
          Vec6 d = Vec6::Zero();
          d[j] = h;
          Pose ap = a, bp = b, am = a, bm = b;
          if (k == 0) {
            ap = se3_exp(Twist(d)) * a;
            am = se3_exp(Twist(-d)) * a;
          } else {
            bp = se3_exp(Twist(d)) * b;
            bm = se3_exp(Twist(-d)) * b;
          }
          const Pose tp = interpolate_pose(ap, bp, s, scheme);
          const Pose tm = interpolate_pose(am, bm, s, scheme);
          const Vec6 fd = se3_log(tp * tm.inverse()).vector() / (2.0 * h);
          CHECK((fd - jacs[k].col(j)).norm() < 2e-5);
        }
      }
    }
  }
}
