#pragma once

#include "bsgs/image.hpp"

namespace bsgs {

struct LossResult {
  double value = 0.0;
  Image gradient;  // dL/d(rendered)
};

/// (1 - lambda) * L1 + lambda * (1 - SSIM)/2 with the exact adjoint of both
/// terms. SSIM uses an 11x11 Gaussian window (sigma 1.5), C1 = 0.01^2,
/// C2 = 0.03^2, computed per channel over a zero-padded same-size map (the
/// 3DGS convention), averaged over all positions and channels.
LossResult loss(const Image& rendered, const Image& target, double lambda);

/// SSIM alone, same definition as in the loss.
double ssim(const Image& a, const Image& b);

/// 10 log10(1 / MSE), capped at 100 dB for MSE below 1e-10.
double psnr(const Image& a, const Image& b);

}  // namespace bsgs
