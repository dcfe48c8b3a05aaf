#include "bsgs/loss.hpp"

#include <cmath>
#include <vector>

#include "bsgs/errors.hpp"

namespace bsgs {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

const std::vector<double>& gaussian_kernel() {
  static const std::vector<double> kernel = [] {
    std::vector<double> k(kWindow);
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
      const double x = i - kWindow / 2;
      k[i] = std::exp(-x * x / (2.0 * kSigma * kSigma));
      sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
  }();
  return kernel;
}

// One channel as a dense plane.
struct Plane {
  int w = 0, h = 0;
  std::vector<double> v;
  Plane() = default;
  Plane(int w_, int h_) : w(w_), h(h_), v(size_t(w_) * h_, 0.0) {}
  double& at(int x, int y) { return v[size_t(y) * w + x]; }
  double at(int x, int y) const { return v[size_t(y) * w + x]; }
};

// Zero-padded separable Gaussian filter. The kernel is symmetric, so this
// linear map is self-adjoint and also serves as its own transpose in the
// backward pass.
Plane blur(const Plane& in) {
  const auto& k = gaussian_kernel();
  const int half = kWindow / 2;
  Plane tmp(in.w, in.h), out(in.w, in.h);
  for (int y = 0; y < in.h; ++y) {
    for (int x = 0; x < in.w; ++x) {
      double acc = 0.0;
      for (int i = -half; i <= half; ++i) {
        const int xx = x + i;
        if (xx >= 0 && xx < in.w) acc += k[i + half] * in.at(xx, y);
      }
      tmp.at(x, y) = acc;
    }
  }
  for (int y = 0; y < in.h; ++y) {
    for (int x = 0; x < in.w; ++x) {
      double acc = 0.0;
      for (int i = -half; i <= half; ++i) {
        const int yy = y + i;
        if (yy >= 0 && yy < in.h) acc += k[i + half] * tmp.at(x, yy);
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

Plane channel(const Image& img, int c) {
  Plane p(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) p.at(x, y) = img.at(x, y, c);
  }
  return p;
}

struct SsimChannel {
  double mean = 0.0;
  Plane d_x;  // d(mean ssim of this channel)/dx, unscaled by channel count
};

// SSIM of one channel plus its gradient with respect to x.
SsimChannel ssim_channel(const Plane& x, const Plane& y, bool with_grad) {
  const int w = x.w, h = x.h;
  Plane x2(w, h), y2(w, h), xy(w, h);
  for (size_t i = 0; i < x.v.size(); ++i) {
    x2.v[i] = x.v[i] * x.v[i];
    y2.v[i] = y.v[i] * y.v[i];
    xy.v[i] = x.v[i] * y.v[i];
  }
  const Plane mu_x = blur(x), mu_y = blur(y);
  const Plane m_x2 = blur(x2), m_y2 = blur(y2), m_xy = blur(xy);

  const double inv_n = 1.0 / (double(w) * h);
  SsimChannel out;
  Plane g_mu(w, h), g_sx(w, h), g_sxy(w, h);
  for (int yy = 0; yy < h; ++yy) {
    for (int xx = 0; xx < w; ++xx) {
      const double mx = mu_x.at(xx, yy), my = mu_y.at(xx, yy);
      const double sx = m_x2.at(xx, yy) - mx * mx;
      const double sy = m_y2.at(xx, yy) - my * my;
      const double sxy = m_xy.at(xx, yy) - mx * my;
      const double a1 = 2.0 * mx * my + kC1;
      const double a2 = 2.0 * sxy + kC2;
      const double b1 = mx * mx + my * my + kC1;
      const double b2 = sx + sy + kC2;
      const double value = (a1 * a2) / (b1 * b2);
      out.mean += value * inv_n;
      if (with_grad) {
        // Partials of the per-pixel SSIM value.
        g_mu.at(xx, yy) = inv_n * ((2.0 * my * a2) / (b1 * b2) - value * 2.0 * mx / b1);
        g_sx.at(xx, yy) = inv_n * (-value / b2);
        g_sxy.at(xx, yy) = inv_n * (2.0 * a1 / (b1 * b2));
      }
    }
  }
  if (!with_grad) return out;

  // Chain through mu_x = G*x, sigma_x = G*x^2 - mu_x^2, sigma_xy = G*xy - mu_x mu_y.
  Plane mu_term(w, h), sxy_mu_term(w, h);
  for (size_t i = 0; i < g_mu.v.size(); ++i) {
    mu_term.v[i] = g_mu.v[i] - 2.0 * g_sx.v[i] * mu_x.v[i] - g_sxy.v[i] * mu_y.v[i];
  }
  const Plane back_mu = blur(mu_term);
  const Plane back_sx = blur(g_sx);
  const Plane back_sxy = blur(g_sxy);
  out.d_x = Plane(w, h);
  for (size_t i = 0; i < out.d_x.v.size(); ++i) {
    out.d_x.v[i] = back_mu.v[i] + 2.0 * x.v[i] * back_sx.v[i] + y.v[i] * back_sxy.v[i];
  }
  return out;
}

void check_shapes(const Image& a, const Image& b, const char* who) {
  if (!a.same_shape(b) || a.width == 0 || a.height == 0) {
    throw ShapeMismatch(std::string(who) + ": image shapes differ or are empty");
  }
}

}  // namespace

LossResult loss(const Image& rendered, const Image& target, double lambda) {
  check_shapes(rendered, target, "loss");
  if (lambda < 0.0 || lambda > 1.0) {
    throw ParameterOutOfRange("loss: lambda outside [0,1]");
  }

  LossResult out;
  out.gradient = Image(rendered.width, rendered.height);
  const double inv_n = 1.0 / static_cast<double>(rendered.data.size());

  double l1 = 0.0;
  for (size_t i = 0; i < rendered.data.size(); ++i) {
    const double d = rendered.data[i] - target.data[i];
    l1 += std::abs(d) * inv_n;
    out.gradient.data[i] = (1.0 - lambda) * inv_n * (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0));
  }

  double ssim_mean = 0.0;
  if (lambda > 0.0) {
    for (int c = 0; c < 3; ++c) {
      const SsimChannel sc = ssim_channel(channel(rendered, c), channel(target, c), true);
      ssim_mean += sc.mean / 3.0;
      // d[(1 - ssim)/2]/dx = -0.5 * d(ssim)/dx, averaged over channels.
      const double scale = -0.5 * lambda / 3.0;
      for (int y = 0; y < rendered.height; ++y) {
        for (int x = 0; x < rendered.width; ++x) {
          out.gradient.at(x, y, c) += scale * sc.d_x.at(x, y);
        }
      }
    }
  } else {
    for (int c = 0; c < 3; ++c) {
      ssim_mean += ssim_channel(channel(rendered, c), channel(target, c), false).mean / 3.0;
    }
  }

  out.value = (1.0 - lambda) * l1 + lambda * 0.5 * (1.0 - ssim_mean);
  return out;
}

double ssim(const Image& a, const Image& b) {
  check_shapes(a, b, "ssim");
  double mean = 0.0;
  for (int c = 0; c < 3; ++c) {
    mean += ssim_channel(channel(a, c), channel(b, c), false).mean / 3.0;
  }
  return mean;
}

double psnr(const Image& a, const Image& b) {
  check_shapes(a, b, "psnr");
  double mse = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.data.size());
  if (mse < 1e-10) return 100.0;
  return 10.0 * std::log10(1.0 / mse);
}

}  // namespace bsgs
