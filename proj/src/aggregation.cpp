#include "bsgs/aggregation.hpp"

#include <algorithm>
#include <cmath>

#include "bsgs/errors.hpp"

namespace bsgs {

namespace {

void check_stack(const SubframeGradStack& stack) {
  if (stack.empty()) throw EmptyStack("aggregate: empty subframe stack");
  for (const auto& m : stack) {
    if (m.rows() != stack[0].rows() || m.cols() != stack[0].cols()) {
      throw ShapeMismatch("aggregate: ragged subframe stack");
    }
  }
}

}  // namespace

AggregationMode parse_aggregation_mode(const std::string& name) {
  if (name == "max") return AggregationMode::Max;
  if (name == "mean") return AggregationMode::Mean;
  if (name == "topk") return AggregationMode::TopK;
  throw ParameterOutOfRange("unknown aggregation mode '" + name + "'");
}

std::string aggregation_mode_name(AggregationMode mode) {
  switch (mode) {
    case AggregationMode::Max: return "max";
    case AggregationMode::Mean: return "mean";
    case AggregationMode::TopK: return "topk";
  }
  return "?";
}

Eigen::MatrixXd aggregate_max(const SubframeGradStack& stack) {
  check_stack(stack);
  Eigen::MatrixXd out = stack[0];
  for (size_t i = 1; i < stack.size(); ++i) {
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      for (Eigen::Index c = 0; c < out.cols(); ++c) {
        // Strict comparison keeps the lowest subframe index on ties.
        if (std::abs(stack[i](r, c)) > std::abs(out(r, c))) {
          out(r, c) = stack[i](r, c);
        }
      }
    }
  }
  return out;
}

Eigen::MatrixXd aggregate_mean(const SubframeGradStack& stack) {
  check_stack(stack);
  Eigen::MatrixXd out = stack[0];
  for (size_t i = 1; i < stack.size(); ++i) out += stack[i];
  return out / static_cast<double>(stack.size());
}

Eigen::MatrixXd aggregate_topk(const SubframeGradStack& stack, int k) {
  check_stack(stack);
  const int n = static_cast<int>(stack.size());
  if (k < 1 || k > n) {
    throw ParameterOutOfRange("aggregate_topk: k = " + std::to_string(k) +
                              " outside [1, " + std::to_string(n) + "]");
  }
  Eigen::MatrixXd out(stack[0].rows(), stack[0].cols());
  std::vector<int> idx(n);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      for (int i = 0; i < n; ++i) idx[i] = i;
      // Largest magnitudes first; ties by lowest subframe index.
      std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](int a, int b) {
        const double ma = std::abs(stack[a](r, c));
        const double mb = std::abs(stack[b](r, c));
        return ma != mb ? ma > mb : a < b;
      });
      // Sum the selected entries in subframe order so k = n reproduces the
      // mean bit-exactly.
      std::sort(idx.begin(), idx.begin() + k);
      double sum = 0.0;
      for (int i = 0; i < k; ++i) sum += stack[idx[i]](r, c);
      out(r, c) = sum / k;
    }
  }
  return out;
}

Eigen::MatrixXd aggregate(const SubframeGradStack& stack, AggregationMode mode, int topk_k) {
  switch (mode) {
    case AggregationMode::Max: return aggregate_max(stack);
    case AggregationMode::Mean: return aggregate_mean(stack);
    case AggregationMode::TopK: return aggregate_topk(stack, topk_k);
  }
  throw ParameterOutOfRange("aggregate: bad mode");
}

}  // namespace bsgs
