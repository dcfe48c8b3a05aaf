#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <random>

#include "bsgs/errors.hpp"
#include "bsgs/scene.hpp"

using namespace bsgs;

TEST_CASE("covariance of an axis-aligned unit Gaussian is identity") {
  GaussianPrimitive g;
  CHECK(covariance_3d(g).isApprox(Mat3::Identity(), 1e-15));
}

TEST_CASE("covariance scales as exp(2 log_scale)") {
  GaussianPrimitive g;
  g.log_scale = Vec3(std::log(2.0), 0, 0);
  const Mat3 sigma = covariance_3d(g);
  CHECK(sigma(0, 0) == doctest::Approx(4.0));
  CHECK(sigma(1, 1) == doctest::Approx(1.0));
  CHECK(sigma(2, 2) == doctest::Approx(1.0));
}

TEST_CASE("rotated covariance matches the explicit R S S R^T oracle") {
  GaussianPrimitive g;
  g.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(M_PI / 2, Vec3::UnitZ()));
  g.log_scale = Vec3(std::log(2.0), 0, 0);  // scales (2,1,1) -> diag(4,1,1)
  const Mat3 sigma = covariance_3d(g);
  // Oracle: explicit multiplication.
  const Mat3 r = g.rotation.toRotationMatrix();
  const Mat3 s = Vec3(2.0, 1.0, 1.0).asDiagonal();
  const Mat3 expected = r * s * s.transpose() * r.transpose();
  CHECK(sigma.isApprox(expected, 1e-12));
  // 90 degrees about z moves the long axis from x to y.
  CHECK(sigma(1, 1) == doctest::Approx(4.0));
  CHECK(sigma(0, 0) == doctest::Approx(1.0));

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    GaussianPrimitive p;
    p.rotation = Eigen::Quaterniond(u(rng) + 2.0, u(rng), u(rng), u(rng)).normalized();
    p.log_scale = Vec3(u(rng), u(rng), u(rng));
    const Mat3 cov = covariance_3d(p);
    CHECK((cov - cov.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(Eigen::SelfAdjointEigenSolver<Mat3>(cov).eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("init_scene on a unit tetrahedron matches the brute-force 3-NN oracle") {
  const std::vector<Vec3> points = {
      {1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  const std::vector<Vec3> colors(4, Vec3(0.5, 0.5, 0.5));
  const Scene scene = init_scene(points, colors);
  REQUIRE(scene.size() == 4);

  // Oracle: all pairwise distances are equal (regular tetrahedron), so the
  // 3-NN mean distance is the edge length.
  const double edge = (points[0] - points[1]).norm();
  for (const auto& g : scene.primitives) {
    CHECK(g.scales().x() == doctest::Approx(edge));
    CHECK(g.scales().y() == doctest::Approx(edge));
    CHECK(g.opacity() == doctest::Approx(0.1));
    CHECK(g.rotation.isApprox(Eigen::Quaterniond::Identity()));
  }
  CHECK(scene.scene_extent == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("init_scene floors the scale for coincident points") {
  const std::vector<Vec3> points = {
      {0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {5, 0, 0}};
  const std::vector<Vec3> colors(5, Vec3::Zero());
  const Scene scene = init_scene(points, colors);
  // The duplicated cluster has zero 3-NN distance; the floor applies.
  const double floor = 1e-6 * scene.scene_extent;
  CHECK(scene.primitives[0].scales().x() == doctest::Approx(floor));
}

TEST_CASE("init_scene clamps colors") {
  const std::vector<Vec3> points = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const std::vector<Vec3> colors = {
      {-0.5, 0.5, 1.5}, {0, 0, 0}, {1, 1, 1}, {0.25, 0.5, 0.75}};
  const Scene scene = init_scene(points, colors);
  CHECK(scene.primitives[0].color.x() == 0.0);
  CHECK(scene.primitives[0].color.y() == 0.5);
  CHECK(scene.primitives[0].color.z() == 1.0);
  CHECK((scene.primitives[3].color - Vec3(0.25, 0.5, 0.75)).norm() == 0.0);
}

TEST_CASE("init_scene requires at least 4 points") {
  const std::vector<Vec3> points = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  CHECK_THROWS_AS(init_scene(points, std::vector<Vec3>(3, Vec3::Zero())), InsufficientPoints);
}

TEST_CASE("checkpoint round trip is lossless at float precision") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Scene scene;
  scene.scene_extent = 3.25;
  for (int i = 0; i < 17; ++i) {
    GaussianPrimitive g;
    g.center = Vec3(u(rng), u(rng), u(rng));
    g.rotation = Eigen::Quaterniond(u(rng) + 3.0, u(rng), u(rng), u(rng)).normalized();
    g.log_scale = Vec3(u(rng), u(rng), u(rng));
    g.opacity_logit = u(rng);
    g.color = Vec3(0.1, 0.5, 0.9);
    scene.primitives.push_back(g);
  }

  const std::string path = (std::filesystem::temp_directory_path() / "bsgs_ckpt_test.bin").string();
  save_scene(scene, path);
  const Scene loaded = load_scene(path);
  save_scene(loaded, path + ".second");

  REQUIRE(loaded.size() == scene.size());
  CHECK(loaded.scene_extent == scene.scene_extent);
  for (size_t i = 0; i < scene.size(); ++i) {
    // Values survive exactly at float precision.
    CHECK(loaded.primitives[i].center.x() == double(float(scene.primitives[i].center.x())));
    CHECK(loaded.primitives[i].opacity_logit == double(float(scene.primitives[i].opacity_logit)));
    CHECK(loaded.primitives[i].rotation.w() == double(float(scene.primitives[i].rotation.w())));
  }

  // Save-load-save is byte identical.
  std::ifstream f1(path, std::ios::binary), f2(path + ".second", std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  const std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(b1 == b2);
  std::remove(path.c_str());
  std::remove((path + ".second").c_str());
}

TEST_CASE("load_scene rejects garbage") {
  const std::string path = (std::filesystem::temp_directory_path() / "bsgs_bad_ckpt.bin").string();
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOPE";
  }
  CHECK_THROWS_AS(load_scene(path), IoError);
  std::remove(path.c_str());
}
