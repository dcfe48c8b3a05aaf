#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace bsgs {

/// Per-subframe gradient rows: stack[i] holds subframe i's gradients, one
/// row per primitive (2 columns for view-space gradients, 3 for world-space
/// position gradients).
using SubframeGradStack = std::vector<Eigen::MatrixXd>;

enum class AggregationMode { Max, Mean, TopK };

AggregationMode parse_aggregation_mode(const std::string& name);
std::string aggregation_mode_name(AggregationMode mode);

/// Component-wise magnitude-maximizing pooling: each output entry is the
/// stack entry with the largest absolute value, sign preserved; ties go to
/// the lowest subframe index. Throws EmptyStack for an empty stack.
Eigen::MatrixXd aggregate_max(const SubframeGradStack& stack);

/// Component-wise mean over subframes.
Eigen::MatrixXd aggregate_mean(const SubframeGradStack& stack);

/// Component-wise mean of the k largest-magnitude entries (signs retained).
/// k = 1 reduces to aggregate_max and k = n to aggregate_mean, bit-exactly.
Eigen::MatrixXd aggregate_topk(const SubframeGradStack& stack, int k);

Eigen::MatrixXd aggregate(const SubframeGradStack& stack, AggregationMode mode, int topk_k);

}  // namespace bsgs
