// Copyright 2026 The CZSL Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include "czsl/gcn.h"

#include <random>

#include <gtest/gtest.h>

#include "czsl/common.h"
#include "czsl/comp_graph.h"
#include "czsl/synthgen.h"
#include "support/oracles.h"
#include "support/test_support.h"

namespace czsl {
namespace {

Eigen::MatrixXd RandomMatrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

// Symmetric 0/1 matrix with self-loops and random extra edges.
Eigen::MatrixXd RandomAdjacency(int k, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution edge(p);
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      if (edge(rng)) a(i, j) = a(j, i) = 1.0;
    }
  }
  return a;
}

double MaxAbs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

TEST(InitGcnTest, ShapesAndDeterminism) {
  const std::vector<int> widths = {600, 4096, 512};
  const GcnStack a = InitGcn(widths, 512, GcnMode::kGcn, 7);
  ASSERT_EQ(a.num_layers(), 2);
  EXPECT_EQ(a.weights[0].rows(), 600);
  EXPECT_EQ(a.weights[0].cols(), 4096);
  EXPECT_EQ(a.weights[1].rows(), 4096);
  EXPECT_EQ(a.weights[1].cols(), 512);
  const double bound = std::sqrt(6.0 / (600 + 4096));
  EXPECT_LE(MaxAbs(a.weights[0]), bound);
  const GcnStack b = InitGcn(widths, 512, GcnMode::kGcn, 7);
  EXPECT_EQ(a.weights[0], b.weights[0]);
  EXPECT_EQ(a.weights[1], b.weights[1]);
  const GcnStack c = InitGcn(widths, 512, GcnMode::kGcn, 8);
  EXPECT_NE(a.weights[1], c.weights[1]);
}

TEST(InitGcnTest, RejectsBadWidths) {
  const std::vector<int> widths = {600, 512, 300};
  EXPECT_THROW(InitGcn(widths, 512, GcnMode::kGcn, 7), Error);
  const std::vector<int> uneven = {10, 8, 9, 4};
  EXPECT_THROW(InitGcn(uneven, 4, GcnMode::kGcnii, 7), Error);
  const std::vector<int> too_short = {10, 4};
  EXPECT_THROW(InitGcn(too_short, 4, GcnMode::kGcnii, 7), Error);
}

TEST(InitGcnTest, GcniiBetaSchedule) {
  const std::vector<int> widths = {6, 8, 8, 8, 3};
  const GcnStack s = InitGcn(widths, 3, GcnMode::kGcnii, 1, 0.1, 0.5);
  ASSERT_EQ(s.num_layers(), 3);
  ASSERT_EQ(s.betas.size(), 2u);
  EXPECT_DOUBLE_EQ(s.betas[0], std::log(1.5));
  EXPECT_DOUBLE_EQ(s.betas[1], std::log(1.25));
  EXPECT_EQ(s.input_projection.rows(), 6);
  EXPECT_EQ(s.input_projection.cols(), 8);
}

TEST(ForwardGcnTest, SingleSelfLoopIsIdentity) {
  SparseMatrix a(1, 1);
  a.insert(0, 0) = 1.0;
  const PropagationMatrix p = NormalizeAdjacency(a);
  GcnStack stack;
  stack.weights = {Eigen::MatrixXd::Identity(3, 3)};
  const Eigen::MatrixXd e = Eigen::RowVector3d(0.5, 2.0, 0.0);
  EXPECT_EQ(Forward(stack, p, e).output, e);
}

TEST(ForwardGcnTest, TwoNodeCliqueAverages) {
  const PropagationMatrix p =
      NormalizeAdjacency(Eigen::MatrixXd::Ones(2, 2).sparseView());
  GcnStack stack;
  stack.weights = {Eigen::MatrixXd::Identity(2, 2)};
  const Eigen::MatrixXd e = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  EXPECT_EQ(Forward(stack, p, e).output, Eigen::MatrixXd::Ones(2, 2));
}

TEST(ForwardGcnTest, MatchesDenseOracle) {
  std::mt19937_64 rng(21);
  for (GcnMode mode : {GcnMode::kGcn, GcnMode::kGcnii}) {
    for (int trial = 0; trial < 10; ++trial) {
      const int k = 10 + trial * 5;
      const Eigen::MatrixXd adjacency = RandomAdjacency(k, 0.2, rng);
      const PropagationMatrix p = NormalizeAdjacency(adjacency.sparseView());
      const std::vector<int> widths =
          mode == GcnMode::kGcn ? std::vector<int>{5, 7, 4}
                                : std::vector<int>{5, 7, 7, 7, 4};
      const GcnStack stack = InitGcn(widths, 4, mode, trial);
      const Eigen::MatrixXd e = RandomMatrix(k, 5, rng);
      const Eigen::MatrixXd expected =
          testing::DenseGcnForward(stack, testing::DenseRowNormalize(adjacency), e);
      EXPECT_LT(MaxAbs(Forward(stack, p, e).output - expected), 1e-10);
    }
  }
}

TEST(ForwardGcnTest, FinalLayerKeepsNegativeValues) {
  std::mt19937_64 rng(2);
  const PropagationMatrix p =
      NormalizeAdjacency(RandomAdjacency(12, 0.3, rng).sparseView());
  const std::vector<int> widths = {4, 6, 6};
  const GcnStack stack = InitGcn(widths, 6, GcnMode::kGcn, 3);
  EXPECT_LT(Forward(stack, p, RandomMatrix(12, 4, rng)).output.minCoeff(), 0.0);
}

TEST(ForwardGcniiTest, ReducesToGcnWithoutResidualAndFullMapping) {
  std::mt19937_64 rng(4);
  const PropagationMatrix p =
      NormalizeAdjacency(RandomAdjacency(15, 0.25, rng).sparseView());
  const std::vector<int> widths = {6, 6, 6, 6, 3};
  GcnStack gcnii = InitGcn(widths, 3, GcnMode::kGcnii, 9, 0.0, 0.5);
  gcnii.input_projection = Eigen::MatrixXd::Identity(6, 6);
  for (double& beta : gcnii.betas) beta = 1.0;
  GcnStack gcn;
  gcn.weights = gcnii.weights;
  const Eigen::MatrixXd e = RandomMatrix(15, 6, rng);
  EXPECT_LT(MaxAbs(Forward(gcnii, p, e).output - Forward(gcn, p, e).output), 1e-12);
}

TEST(ForwardGcniiTest, FullResidualIgnoresGraph) {
  std::mt19937_64 rng(5);
  const PropagationMatrix p1 =
      NormalizeAdjacency(RandomAdjacency(9, 0.4, rng).sparseView());
  const PropagationMatrix p2 = NormalizeAdjacency(
      Eigen::MatrixXd::Identity(9, 9).sparseView());
  const std::vector<int> widths = {4, 5, 5, 2};
  const GcnStack stack = InitGcn(widths, 2, GcnMode::kGcnii, 1, 1.0, 0.5);
  const Eigen::MatrixXd e = RandomMatrix(9, 4, rng);
  const GcnOutput a = Forward(stack, p1, e);
  EXPECT_EQ(a.output, Forward(stack, p2, e).output);
  for (const auto& s : a.cache.propagated) EXPECT_EQ(s, a.cache.initial);
}

// Mean over feature columns of the across-node variance.
double NodeVariance(const Eigen::MatrixXd& h) {
  const Eigen::RowVectorXd mean = h.colwise().mean();
  return (h.rowwise() - mean).array().square().colwise().mean().mean();
}

TEST(ForwardGcniiTest, DeepStackKeepsNodesApart) {
  const SynthData data = GenerateSynthetic(testing::BenchmarkSynthConfig(1));
  const CompGraph graph = BuildGraph(*data.split, GraphVariant::kFullCge);
  const PropagationMatrix p = Normalize(graph);
  const Eigen::MatrixXd e = BuildNodeFeatures(
      *data.split, graph, EmbeddingTable::FromSource(data.embeddings));
  std::vector<int> gcn_widths(11, 16);
  gcn_widths.front() = 8;
  std::vector<int> gcnii_widths(12, 16);
  gcnii_widths.front() = 8;
  const GcnStack gcn = InitGcn(gcn_widths, 16, GcnMode::kGcn, 3);
  const GcnStack gcnii = InitGcn(gcnii_widths, 16, GcnMode::kGcnii, 3);
  ASSERT_EQ(gcn.num_layers(), 10);
  ASSERT_EQ(gcnii.num_layers(), 10);
  EXPECT_GT(NodeVariance(Forward(gcnii, p, e).output),
            NodeVariance(Forward(gcn, p, e).output));
}

TEST(ForwardGcnTest, PermutationEquivariance) {
  std::mt19937_64 rng(6);
  const int k = 14;
  const Eigen::MatrixXd adjacency = RandomAdjacency(k, 0.3, rng);
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(k);
  for (int i = 0; i < k; ++i) perm.indices()[i] = order[i];
  const Eigen::MatrixXd permuted = perm * adjacency * perm.transpose();
  const Eigen::MatrixXd e = RandomMatrix(k, 3, rng);
  for (GcnMode mode : {GcnMode::kGcn, GcnMode::kGcnii}) {
    const std::vector<int> widths = {3, 5, 5, 2};
    const GcnStack stack = InitGcn(widths, 2, mode, 4);
    const Eigen::MatrixXd h =
        Forward(stack, NormalizeAdjacency(adjacency.sparseView()), e).output;
    const Eigen::MatrixXd hp =
        Forward(stack, NormalizeAdjacency(permuted.sparseView()), perm * e).output;
    EXPECT_LT(MaxAbs(hp - perm * h), 1e-12);
  }
}

TEST(ForwardGcnTest, RejectsMismatchedInputs) {
  const PropagationMatrix p =
      NormalizeAdjacency(Eigen::MatrixXd::Identity(3, 3).sparseView());
  const std::vector<int> widths = {4, 2};
  const GcnStack stack = InitGcn(widths, 2, GcnMode::kGcn, 0);
  EXPECT_THROW(Forward(stack, p, Eigen::MatrixXd::Ones(3, 5)), Error);
  EXPECT_THROW(Forward(stack, p, Eigen::MatrixXd::Ones(4, 4)), Error);
  Eigen::MatrixXd e = Eigen::MatrixXd::Ones(3, 4);
  e(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(Forward(stack, p, e), Error);
}

// Scalarized loss sum(G .* H) for a fixed random G.
double Scalarize(const GcnStack& stack, const PropagationMatrix& p,
                 const Eigen::MatrixXd& e, const Eigen::MatrixXd& g) {
  return (Forward(stack, p, e).output.array() * g.array()).sum();
}

double FiniteDifferenceError(GcnMode mode, int depth, uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int k = 8;
  const PropagationMatrix p =
      NormalizeAdjacency(RandomAdjacency(k, 0.35, rng).sparseView());
  std::vector<int> widths;
  if (mode == GcnMode::kGcn) {
    widths.push_back(4);
    for (int l = 1; l < depth; ++l) widths.push_back(5);
    widths.push_back(3);
  } else {
    widths.push_back(4);
    for (int l = 0; l < depth; ++l) widths.push_back(5);
    widths.push_back(3);
  }
  GcnStack stack = InitGcn(widths, 3, mode, seed);
  Eigen::MatrixXd e = RandomMatrix(k, 4, rng);
  const Eigen::MatrixXd g = RandomMatrix(k, 3, rng);
  const GcnOutput out = Forward(stack, p, e);
  const GcnGradients grads = Backward(stack, p, out.cache, g);

  std::vector<std::pair<Eigen::MatrixXd*, const Eigen::MatrixXd*>> tensors;
  for (size_t l = 0; l < stack.weights.size(); ++l) {
    tensors.emplace_back(&stack.weights[l], &grads.weights[l]);
  }
  if (mode == GcnMode::kGcnii) {
    tensors.emplace_back(&stack.input_projection, &grads.input_projection);
  }
  tensors.emplace_back(&e, &grads.features);

  const double h = 1e-5;
  double worst = 0.0;
  for (auto [param, analytic] : tensors) {
    for (int i = 0; i < param->size(); ++i) {
      const double saved = param->data()[i];
      param->data()[i] = saved + h;
      const double plus = Scalarize(stack, p, e, g);
      param->data()[i] = saved - h;
      const double minus = Scalarize(stack, p, e, g);
      param->data()[i] = saved;
      const double numeric = (plus - minus) / (2 * h);
      const double exact = analytic->data()[i];
      const double denom = std::max({std::abs(numeric), std::abs(exact), 1e-6});
      worst = std::max(worst, std::abs(numeric - exact) / denom);
    }
  }
  return worst;
}

TEST(BackwardTest, MatchesFiniteDifferences) {
  for (GcnMode mode : {GcnMode::kGcn, GcnMode::kGcnii}) {
    for (int depth : {1, 2, 4}) {
      EXPECT_LT(FiniteDifferenceError(mode, depth, 100 + depth), 1e-4)
          << GcnModeName(mode) << " depth " << depth;
    }
  }
}

TEST(BackwardTest, ZeroUpstreamGivesZeroGradients) {
  std::mt19937_64 rng(7);
  const PropagationMatrix p =
      NormalizeAdjacency(RandomAdjacency(6, 0.5, rng).sparseView());
  const std::vector<int> widths = {3, 4, 4, 2};
  for (GcnMode mode : {GcnMode::kGcn, GcnMode::kGcnii}) {
    const GcnStack stack = InitGcn(widths, 2, mode, 1);
    const Eigen::MatrixXd e = RandomMatrix(6, 3, rng);
    const GcnOutput out = Forward(stack, p, e);
    const GcnGradients g =
        Backward(stack, p, out.cache, Eigen::MatrixXd::Zero(6, 2));
    for (const auto& w : g.weights) EXPECT_EQ(MaxAbs(w), 0.0);
    EXPECT_EQ(MaxAbs(g.features), 0.0);
  }
}

TEST(BackwardTest, DeadReluPassesNoGradient) {
  // One hidden unit whose pre-activation is negative for every node.
  const PropagationMatrix p =
      NormalizeAdjacency(Eigen::MatrixXd::Ones(3, 3).sparseView());
  GcnStack stack;
  stack.weights = {Eigen::MatrixXd(2, 2), Eigen::MatrixXd(2, 1)};
  stack.weights[0] << 1.0, -1.0, 1.0, -1.0;
  stack.weights[1] << 1.0, 1.0;
  const Eigen::MatrixXd e = Eigen::MatrixXd::Ones(3, 2);
  const GcnOutput out = Forward(stack, p, e);
  const GcnGradients g = Backward(stack, p, out.cache, Eigen::MatrixXd::Ones(3, 1));
  EXPECT_EQ(g.weights[0].col(1).cwiseAbs().sum(), 0.0);
  EXPECT_EQ(g.weights[1](1, 0), 0.0);
  EXPECT_NE(g.weights[0].col(0).cwiseAbs().sum(), 0.0);
}

TEST(BackwardTest, StaleCacheIsRejected) {
  std::mt19937_64 rng(8);
  const PropagationMatrix p =
      NormalizeAdjacency(RandomAdjacency(5, 0.5, rng).sparseView());
  const std::vector<int> small = {3, 4, 2};
  const std::vector<int> large = {3, 4, 4, 2};
  const GcnStack a = InitGcn(small, 2, GcnMode::kGcn, 1);
  const GcnStack b = InitGcn(large, 2, GcnMode::kGcn, 1);
  const GcnOutput out = Forward(a, p, RandomMatrix(5, 3, rng));
  EXPECT_THROW(Backward(b, p, out.cache, Eigen::MatrixXd::Ones(5, 2)), Error);
  EXPECT_THROW(Backward(a, p, out.cache, Eigen::MatrixXd::Ones(5, 3)), Error);
}

}  // namespace
}  // namespace czsl
