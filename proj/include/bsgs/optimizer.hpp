#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace bsgs {

/// Adam for one parameter group. The caller applies the returned direction
/// (vector parameters subtract it; poses retract through exp(-direction)).
/// Moments follow densification through remap(): surviving rows keep their
/// state, fresh rows start at zero.
class Adam {
 public:
  Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-15)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  Eigen::VectorXd step_direction(const Eigen::VectorXd& grad, double lr);

  /// Rebuilds the moment vectors for a new primitive layout. source[i] is
  /// the old primitive index whose state row i inherits, or -1 for a fresh
  /// row. stride is the number of scalars per primitive in this group.
  void remap(const std::vector<std::ptrdiff_t>& source, int stride);

  void reset();
  int64_t steps() const { return step_count_; }

 private:
  double beta1_, beta2_, eps_;
  Eigen::VectorXd m_, v_;
  int64_t step_count_ = 0;
};

}  // namespace bsgs
