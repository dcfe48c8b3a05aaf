#include "bsgs/optimizer.hpp"

#include <cmath>

#include "bsgs/errors.hpp"

namespace bsgs {

Eigen::VectorXd Adam::step_direction(const Eigen::VectorXd& grad, double lr) {
  if (m_.size() != grad.size()) {
    if (m_.size() != 0) {
      throw ShapeMismatch("Adam: gradient size changed without remap()");
    }
    m_ = Eigen::VectorXd::Zero(grad.size());
    v_ = Eigen::VectorXd::Zero(grad.size());
  }
  ++step_count_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
  const Eigen::VectorXd m_hat = m_ / bc1;
  const Eigen::VectorXd v_hat = v_ / bc2;
  return lr * (m_hat.array() / (v_hat.array().sqrt() + eps_)).matrix();
}

void Adam::remap(const std::vector<std::ptrdiff_t>& source, int stride) {
  const Eigen::Index n = static_cast<Eigen::Index>(source.size()) * stride;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  if (m_.size() > 0) {
    for (size_t i = 0; i < source.size(); ++i) {
      const std::ptrdiff_t src = source[i];
      if (src < 0) continue;
      for (int c = 0; c < stride; ++c) {
        m[i * stride + c] = m_[src * stride + c];
        v[i * stride + c] = v_[src * stride + c];
      }
    }
  }
  m_ = std::move(m);
  v_ = std::move(v);
}

void Adam::reset() {
  m_.resize(0);
  v_.resize(0);
  step_count_ = 0;
}

}  // namespace bsgs
