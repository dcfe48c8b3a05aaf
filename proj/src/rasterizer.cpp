#include "bsgs/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bsgs/errors.hpp"
#include "bsgs/threading.hpp"

namespace bsgs {

namespace {

constexpr int kTileSize = 16;
constexpr double kCovDilation = 0.3;
constexpr double kAlphaCap = 0.99;
constexpr double kAlphaMin = 1.0 / 255.0;

double max_eigenvalue_2x2(const Eigen::Matrix2d& m) {
  const double mid = 0.5 * (m(0, 0) + m(1, 1));
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return mid + std::sqrt(std::max(0.0, mid * mid - det));
}

Eigen::Matrix<double, 2, 3> perspective_jacobian(const Vec3& mu_cam,
                                                 const CameraIntrinsics& k) {
  const double z = mu_cam.z();
  Eigen::Matrix<double, 2, 3> j;
  j << k.fx / z, 0.0, -k.fx * mu_cam.x() / (z * z), 0.0, k.fy / z,
      -k.fy * mu_cam.y() / (z * z);
  return j;
}

// d(loss)/d(quaternion) for R built from the normalized quaternion.
Eigen::Vector4d quaternion_backward(const Eigen::Quaterniond& q_raw, const Mat3& d_rot) {
  const double norm = q_raw.norm();
  const Eigen::Quaterniond q = q_raw.normalized();
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();

  Mat3 dw, dx, dy, dz;
  dw << 0, -z, y, z, 0, -x, -y, x, 0;
  dx << 0, y, z, y, -2 * x, -w, z, w, -2 * x;
  dy << -2 * y, x, w, x, 0, z, -w, z, -2 * y;
  dz << -2 * z, -w, x, w, -2 * z, y, x, y, 0;

  Eigen::Vector4d g_unit;
  g_unit[0] = 2.0 * (d_rot.cwiseProduct(dw)).sum();
  g_unit[1] = 2.0 * (d_rot.cwiseProduct(dx)).sum();
  g_unit[2] = 2.0 * (d_rot.cwiseProduct(dy)).sum();
  g_unit[3] = 2.0 * (d_rot.cwiseProduct(dz)).sum();

  const Eigen::Vector4d qv(q.w(), q.x(), q.y(), q.z());
  return (g_unit - qv * qv.dot(g_unit)) / norm;
}

struct TilePartial {
  Eigen::Vector2d d_mean2d = Eigen::Vector2d::Zero();
  Eigen::Matrix2d d_cov2d = Eigen::Matrix2d::Zero();
  Vec3 d_color = Vec3::Zero();
  double d_opacity_logit = 0.0;
};

}  // namespace

void CameraIntrinsics::validate() const {
  if (fx <= 0.0 || fy <= 0.0 || width <= 0 || height <= 0 || cx <= 0.0 ||
      cx >= width || cy <= 0.0 || cy >= height) {
    throw ParameterOutOfRange("CameraIntrinsics: invalid fx/fy/cx/cy/size");
  }
}

std::optional<ProjectedGaussian> project_gaussian(const GaussianPrimitive& g,
                                                  const Pose& camera_pose,
                                                  const CameraIntrinsics& intrinsics,
                                                  double near_clip) {
  const Vec3 mu_cam = camera_pose.apply(g.center);
  if (mu_cam.z() <= near_clip) return std::nullopt;

  ProjectedGaussian out;
  out.depth = mu_cam.z();
  out.mean2d = Eigen::Vector2d(intrinsics.fx * mu_cam.x() / mu_cam.z() + intrinsics.cx,
                               intrinsics.fy * mu_cam.y() / mu_cam.z() + intrinsics.cy);
  out.compositing_alpha_peak = std::min(g.opacity(), kAlphaCap);

  const Eigen::Matrix<double, 2, 3> m =
      perspective_jacobian(mu_cam, intrinsics) * camera_pose.rotation.matrix();
  out.cov2d = m * covariance_3d(g) * m.transpose() +
              kCovDilation * Eigen::Matrix2d::Identity();
  return out;
}

RenderResult render(const Scene& scene, const Pose& camera_pose,
                    const CameraIntrinsics& intrinsics, const RenderOptions& options) {
  intrinsics.validate();
  if (scene.primitives.empty()) {
    throw ParameterOutOfRange("render: scene has no primitives");
  }
  if (options.frozen_cov2d &&
      options.frozen_cov2d->size() != scene.primitives.size()) {
    throw ShapeMismatch("render: frozen covariance count != primitive count");
  }

  RenderResult result;
  RenderGraph& graph = result.graph;
  graph.camera_pose = camera_pose;
  graph.intrinsics = intrinsics;
  graph.options = options;
  graph.near_clip = options.near_clip_frac * scene.scene_extent;

  const size_t n = scene.primitives.size();
  std::vector<ProjectedGaussian> projected(n);
  std::vector<char> keep(n, 0);
  parallel_for(n, [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      auto p = project_gaussian(scene.primitives[i], camera_pose, intrinsics,
                                graph.near_clip);
      if (!p) continue;
      if (options.frozen_cov2d) {
        p->cov2d = (*options.frozen_cov2d)[i];
      }
      // A peak alpha at or below 1/255 can never contribute.
      if (255.0 * p->compositing_alpha_peak <= 1.0) continue;
      projected[i] = *p;
      keep[i] = 1;
    }
  });

  for (size_t i = 0; i < n; ++i) {
    if (keep[i]) {
      graph.visible.push_back(static_cast<int>(i));
      graph.projected.push_back(projected[i]);
    }
  }
  // Global depth sort; stable so equal depths keep insertion (scene) order.
  {
    std::vector<size_t> order(graph.visible.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return graph.projected[a].depth < graph.projected[b].depth;
    });
    std::vector<int> vis;
    std::vector<ProjectedGaussian> proj;
    vis.reserve(order.size());
    proj.reserve(order.size());
    for (size_t idx : order) {
      vis.push_back(graph.visible[idx]);
      proj.push_back(graph.projected[idx]);
    }
    graph.visible = std::move(vis);
    graph.projected = std::move(proj);
  }

  const size_t nvis = graph.visible.size();
  graph.cov2d_inv.resize(nvis);
  graph.radius_px.resize(nvis);
  for (size_t i = 0; i < nvis; ++i) {
    const ProjectedGaussian& p = graph.projected[i];
    graph.cov2d_inv[i] = p.cov2d.inverse();
    // Radius where the uncapped alpha falls to exactly 1/255, so the bounding
    // box never cuts off a contribution the alpha test would keep.
    const double q_max = std::log(255.0 * scene.primitives[graph.visible[i]].opacity());
    graph.radius_px[i] = std::sqrt(2.0 * q_max * max_eigenvalue_2x2(p.cov2d));
  }

  graph.tiles_x = (intrinsics.width + kTileSize - 1) / kTileSize;
  graph.tiles_y = (intrinsics.height + kTileSize - 1) / kTileSize;
  graph.tile_lists.assign(size_t(graph.tiles_x) * graph.tiles_y, {});
  for (size_t i = 0; i < nvis; ++i) {
    const Eigen::Vector2d& c = graph.projected[i].mean2d;
    const double r = graph.radius_px[i];
    const int x0 = std::max(0, int(std::floor((c.x() - r) / kTileSize)));
    const int x1 = std::min(graph.tiles_x - 1, int(std::floor((c.x() + r) / kTileSize)));
    const int y0 = std::max(0, int(std::floor((c.y() - r) / kTileSize)));
    const int y1 = std::min(graph.tiles_y - 1, int(std::floor((c.y() + r) / kTileSize)));
    for (int ty = y0; ty <= y1; ++ty) {
      for (int tx = x0; tx <= x1; ++tx) {
        graph.tile_lists[size_t(ty) * graph.tiles_x + tx].push_back(static_cast<int>(i));
      }
    }
  }

  Image image(intrinsics.width, intrinsics.height);
  graph.final_transmittance.assign(size_t(intrinsics.width) * intrinsics.height, 1.0);

  std::vector<double> opacity(nvis);
  std::vector<Vec3> prim_color(nvis);
  for (size_t i = 0; i < nvis; ++i) {
    opacity[i] = scene.primitives[graph.visible[i]].opacity();
    prim_color[i] = scene.primitives[graph.visible[i]].color;
  }

  const size_t n_tiles = graph.tile_lists.size();
  parallel_for(n_tiles, [&](size_t begin, size_t end) {
    for (size_t t = begin; t < end; ++t) {
      const int tx = static_cast<int>(t) % graph.tiles_x;
      const int ty = static_cast<int>(t) / graph.tiles_x;
      const int px0 = tx * kTileSize;
      const int px1 = std::min(intrinsics.width, px0 + kTileSize);
      const int py0 = ty * kTileSize;
      const int py1 = std::min(intrinsics.height, py0 + kTileSize);
      const std::vector<int>& list = graph.tile_lists[t];

      for (int py = py0; py < py1; ++py) {
        for (int px = px0; px < px1; ++px) {
          double transmittance = 1.0;
          Vec3 color = Vec3::Zero();
          for (const int vi : list) {
            const ProjectedGaussian& p = graph.projected[vi];
            const double dx = px - p.mean2d.x();
            const double dy = py - p.mean2d.y();
            const double r = graph.radius_px[vi];
            if (std::abs(dx) > r || std::abs(dy) > r) continue;
            const Eigen::Matrix2d& a = graph.cov2d_inv[vi];
            const double q =
                0.5 * (a(0, 0) * dx * dx + 2.0 * a(0, 1) * dx * dy + a(1, 1) * dy * dy);
            double alpha = opacity[vi] * std::exp(-q);
            if (alpha < kAlphaMin) continue;
            alpha = std::min(alpha, kAlphaCap);
            color += prim_color[vi] * (alpha * transmittance);
            transmittance *= (1.0 - alpha);
          }
          color += transmittance * options.background;
          const size_t pix = size_t(py) * intrinsics.width + px;
          graph.final_transmittance[pix] = transmittance;
          image.at(px, py, 0) = color.x();
          image.at(px, py, 1) = color.y();
          image.at(px, py, 2) = color.z();
        }
      }
    }
  });

  result.image = std::move(image);
  return result;
}

BackwardResult render_backward(const RenderGraph& graph, const Scene& scene,
                               const Image& loss_gradient) {
  const CameraIntrinsics& k = graph.intrinsics;
  if (loss_gradient.width != k.width || loss_gradient.height != k.height) {
    throw ShapeMismatch("render_backward: gradient image shape mismatch");
  }

  const size_t nvis = graph.visible.size();
  const size_t n_tiles = graph.tile_lists.size();

  std::vector<double> opacity(nvis);
  std::vector<Vec3> prim_color(nvis);
  for (size_t i = 0; i < nvis; ++i) {
    opacity[i] = scene.primitives[graph.visible[i]].opacity();
    prim_color[i] = scene.primitives[graph.visible[i]].color;
  }

  // Phase 1: per-tile partials in 2D quantities, merged in tile order so the
  // result is independent of the worker count.
  std::vector<std::vector<TilePartial>> partials(n_tiles);
  parallel_for(n_tiles, [&](size_t begin, size_t end) {
    for (size_t t = begin; t < end; ++t) {
      const std::vector<int>& list = graph.tile_lists[t];
      if (list.empty()) continue;
      std::vector<TilePartial>& part = partials[t];
      part.resize(list.size());

      const int tx = static_cast<int>(t) % graph.tiles_x;
      const int ty = static_cast<int>(t) / graph.tiles_x;
      const int px0 = tx * kTileSize;
      const int px1 = std::min(k.width, px0 + kTileSize);
      const int py0 = ty * kTileSize;
      const int py1 = std::min(k.height, py0 + kTileSize);

      for (int py = py0; py < py1; ++py) {
        for (int px = px0; px < px1; ++px) {
          const size_t pix = size_t(py) * k.width + px;
          const Vec3 d_pixel(loss_gradient.at(px, py, 0), loss_gradient.at(px, py, 1),
                             loss_gradient.at(px, py, 2));
          if (d_pixel.isZero(0.0)) continue;

          double t_run = graph.final_transmittance[pix];
          Vec3 suffix = t_run * graph.options.background;

          for (size_t li = list.size(); li-- > 0;) {
            const int vi = list[li];
            const ProjectedGaussian& p = graph.projected[vi];
            const double dx = px - p.mean2d.x();
            const double dy = py - p.mean2d.y();
            const double r = graph.radius_px[vi];
            if (std::abs(dx) > r || std::abs(dy) > r) continue;
            const Eigen::Matrix2d& a = graph.cov2d_inv[vi];
            const double q =
                0.5 * (a(0, 0) * dx * dx + 2.0 * a(0, 1) * dx * dy + a(1, 1) * dy * dy);
            const double alpha_raw = opacity[vi] * std::exp(-q);
            if (alpha_raw < kAlphaMin) continue;
            const double alpha = std::min(alpha_raw, kAlphaCap);

            const double t_before = t_run / (1.0 - alpha);
            TilePartial& acc = part[li];

            const double weight = alpha * t_before;
            acc.d_color += d_pixel * weight;

            const double d_alpha =
                d_pixel.dot(prim_color[vi] * t_before - suffix / (1.0 - alpha));

            suffix += prim_color[vi] * weight;
            t_run = t_before;

            if (alpha_raw <= kAlphaCap) {
              // alpha = opacity * exp(-q)
              acc.d_opacity_logit += d_alpha * alpha * (1.0 - opacity[vi]);
              const Eigen::Vector2d v(a(0, 0) * dx + a(0, 1) * dy,
                                      a(1, 0) * dx + a(1, 1) * dy);
              acc.d_mean2d += (d_alpha * alpha) * v;
              acc.d_cov2d += (0.5 * d_alpha * alpha) * (v * v.transpose());
            }
          }
        }
      }
    }
  });

  // Merge tile partials (tile order) into per-visible 2D gradients.
  std::vector<Eigen::Vector2d> g_mean2d(nvis, Eigen::Vector2d::Zero());
  std::vector<Eigen::Matrix2d> g_cov2d(nvis, Eigen::Matrix2d::Zero());
  std::vector<Vec3> g_color(nvis, Vec3::Zero());
  std::vector<double> g_opacity(nvis, 0.0);
  for (size_t t = 0; t < n_tiles; ++t) {
    const std::vector<int>& list = graph.tile_lists[t];
    for (size_t li = 0; li < partials[t].size(); ++li) {
      const int vi = list[li];
      g_mean2d[vi] += partials[t][li].d_mean2d;
      g_cov2d[vi] += partials[t][li].d_cov2d;
      g_color[vi] += partials[t][li].d_color;
      g_opacity[vi] += partials[t][li].d_opacity_logit;
    }
  }

  // Phase 2: chain 2D gradients to 3D parameters per primitive.
  BackwardResult result;
  result.gradients = SceneGradients(scene.primitives.size());
  SceneGradients& grads = result.gradients;

  const Mat3 w_rot = graph.camera_pose.rotation.matrix();
  std::vector<Vec3> center_route(nvis, Vec3::Zero());  // for the pose twist
  std::vector<Vec3> mu_cam_all(nvis, Vec3::Zero());

  parallel_for(nvis, [&](size_t begin, size_t end) {
    for (size_t vi = begin; vi < end; ++vi) {
      const int si = graph.visible[vi];
      const GaussianPrimitive& g = scene.primitives[si];
      const Vec3 mu_cam = graph.camera_pose.apply(g.center);
      mu_cam_all[vi] = mu_cam;
      const double z = mu_cam.z();
      const Eigen::Matrix<double, 2, 3> j = perspective_jacobian(mu_cam, k);

      const Vec3 gmc_center = j.transpose() * g_mean2d[vi];
      center_route[vi] = gmc_center;
      Vec3 gmc = gmc_center;

      if (!graph.options.frozen_cov2d) {
        const Eigen::Matrix<double, 2, 3> m = j * w_rot;
        const Mat3 sigma = covariance_3d(g);
        const Eigen::Matrix2d gcov = 0.5 * (g_cov2d[vi] + g_cov2d[vi].transpose());
        const Eigen::Matrix<double, 2, 3> gm = 2.0 * gcov * m * sigma;
        const Mat3 gsigma = m.transpose() * gcov * m;
        const Eigen::Matrix<double, 2, 3> gj = gm * w_rot.transpose();

        const double z2 = z * z;
        const double z3 = z2 * z;
        Vec3 gmc_cov;
        gmc_cov.x() = gj(0, 2) * (-k.fx / z2);
        gmc_cov.y() = gj(1, 2) * (-k.fy / z2);
        gmc_cov.z() = gj(0, 0) * (-k.fx / z2) + gj(1, 1) * (-k.fy / z2) +
                      gj(0, 2) * (2.0 * k.fx * mu_cam.x() / z3) +
                      gj(1, 2) * (2.0 * k.fy * mu_cam.y() / z3);
        gmc += gmc_cov;

        // Sigma = A A^T with A = R diag(exp(log_scale)).
        const Vec3 s = g.scales();
        const Mat3 r = g.rotation.normalized().toRotationMatrix();
        const Mat3 a = r * s.asDiagonal();
        const Mat3 ga = 2.0 * gsigma * a;
        const Mat3 rt_ga = r.transpose() * ga;
        for (int kk = 0; kk < 3; ++kk) {
          grads.d_log_scale[si][kk] = s[kk] * rt_ga(kk, kk);
        }
        grads.d_rotation[si] = quaternion_backward(g.rotation, ga * s.asDiagonal());
      }

      grads.d_center[si] = w_rot.transpose() * gmc;
      grads.d_color[si] = g_color[vi];
      grads.d_opacity_logit[si] = g_opacity[vi];
      grads.d_mean2d[si] = g_mean2d[vi];
    }
  });

  // Pose gradient: centers-only chain, accumulated in a fixed order.
  Twist pose_grad;
  for (size_t vi = 0; vi < nvis; ++vi) {
    pose_grad.rho += center_route[vi];
    pose_grad.omega += mu_cam_all[vi].cross(center_route[vi]);
  }
  result.pose_gradient = pose_grad;
  return result;
}

}  // namespace bsgs
