#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "bsgs/aggregation.hpp"
#include "bsgs/errors.hpp"

using namespace bsgs;

namespace {

SubframeGradStack random_stack(uint64_t seed, int n, int rows, int cols = 2) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  SubframeGradStack stack(n);
  for (auto& m : stack) {
    m.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = u(rng);
    }
  }
  return stack;
}

}  // namespace

TEST_CASE("magnitude-maximizing pooling picks the strongest signed entry") {
  SubframeGradStack stack(2);
  stack[0].resize(1, 2);
  stack[0] << 3.0, -1.0;
  stack[1].resize(1, 2);
  stack[1] << -5.0, 2.0;
  const Eigen::MatrixXd out = aggregate_max(stack);
  CHECK(out(0, 0) == -5.0);
  CHECK(out(0, 1) == 2.0);
}

TEST_CASE("single subframe pooling is the identity") {
  const auto stack = random_stack(1, 1, 6);
  CHECK(aggregate_max(stack) == stack[0]);
}

TEST_CASE("all-zero stack pools to zero") {
  SubframeGradStack stack(3, Eigen::MatrixXd::Zero(4, 2));
  CHECK(aggregate_max(stack).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mean of +3 and -5 is -1") {
  SubframeGradStack stack(2);
  stack[0] = Eigen::MatrixXd::Constant(1, 1, 3.0);
  stack[1] = Eigen::MatrixXd::Constant(1, 1, -5.0);
  CHECK(aggregate_mean(stack)(0, 0) == -1.0);
}

TEST_CASE("topk reductions coincide with max and mean bit-exactly") {
  const auto stack = random_stack(7, 9, 20);
  const Eigen::MatrixXd k1 = aggregate_topk(stack, 1);
  const Eigen::MatrixXd mx = aggregate_max(stack);
  const Eigen::MatrixXd kn = aggregate_topk(stack, 9);
  const Eigen::MatrixXd mean = aggregate_mean(stack);
  for (Eigen::Index r = 0; r < mx.rows(); ++r) {
    for (Eigen::Index c = 0; c < mx.cols(); ++c) {
      CHECK(k1(r, c) == mx(r, c));
      CHECK(kn(r, c) == mean(r, c));
    }
  }
}

TEST_CASE("pooled magnitude equals the per-component max magnitude exactly") {
  const auto stack = random_stack(11, 5, 30);
  const Eigen::MatrixXd out = aggregate_max(stack);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      double max_mag = 0.0;
      bool member = false;
      for (const auto& m : stack) {
        max_mag = std::max(max_mag, std::abs(m(r, c)));
        member = member || m(r, c) == out(r, c);
      }
      CHECK(std::abs(out(r, c)) == max_mag);
      CHECK(member);  // selection, never interpolation
    }
  }
}

TEST_CASE("permuting subframes only matters through the tie break") {
  auto stack = random_stack(13, 6, 15);
  const Eigen::MatrixXd before = aggregate_max(stack);
  std::mt19937_64 rng(5);
  std::shuffle(stack.begin(), stack.end(), rng);
  const Eigen::MatrixXd after = aggregate_max(stack);
  // Random values have no exact magnitude ties, so the pool is unchanged.
  for (Eigen::Index r = 0; r < before.rows(); ++r) {
    for (Eigen::Index c = 0; c < before.cols(); ++c) {
      CHECK(before(r, c) == after(r, c));
    }
  }
}

TEST_CASE("ties break toward the lowest subframe index") {
  SubframeGradStack stack(3);
  stack[0] = Eigen::MatrixXd::Constant(1, 1, -2.0);
  stack[1] = Eigen::MatrixXd::Constant(1, 1, 2.0);
  stack[2] = Eigen::MatrixXd::Constant(1, 1, 2.0);
  CHECK(aggregate_max(stack)(0, 0) == -2.0);
}

TEST_CASE("error paths") {
  CHECK_THROWS_AS(aggregate_max({}), EmptyStack);
  const auto stack = random_stack(1, 4, 3);
  CHECK_THROWS_AS(aggregate_topk(stack, 0), ParameterOutOfRange);
  CHECK_THROWS_AS(aggregate_topk(stack, 5), ParameterOutOfRange);
  CHECK_NOTHROW(aggregate_topk(stack, 4));
}

TEST_CASE("mode parsing round trip") {
  CHECK(parse_aggregation_mode("max") == AggregationMode::Max);
  CHECK(parse_aggregation_mode("mean") == AggregationMode::Mean);
  CHECK(parse_aggregation_mode("topk") == AggregationMode::TopK);
  CHECK_THROWS_AS(parse_aggregation_mode("median"), ParameterOutOfRange);
  CHECK(aggregation_mode_name(AggregationMode::Max) == "max");
}
