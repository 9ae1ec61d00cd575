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

#include "czsl/comp_graph.h"

#include <random>

#include <gtest/gtest.h>

#include "czsl/common.h"
#include "support/oracles.h"
#include "support/test_support.h"

namespace czsl {
namespace {

SplitSpec ToySplit() {
  SplitSpec split;
  split.states = {"red", "old"};
  split.objects = {"car", "dog"};
  split.seen_pairs = {{StateId{0}, ObjectId{0}}, {StateId{1}, ObjectId{1}}};
  split.val_unseen = {{StateId{1}, ObjectId{0}}};
  return split;
}

Eigen::MatrixXd Dense(const SparseMatrix& m) { return Eigen::MatrixXd(m); }

TEST(BuildGraphTest, ToyEdgeCounts) {
  const SplitSpec split = ToySplit();
  const CompGraph full = BuildGraph(split, GraphVariant::kFullCge);
  EXPECT_EQ(full.num_nodes(), 7);
  EXPECT_EQ(full.adjacency.nonZeros(), 25);
  const CompGraph b = BuildGraph(split, GraphVariant::kPairEdgesNoSelfLoopOnY);
  EXPECT_EQ(b.adjacency.nonZeros(), 16);
  const CompGraph c = BuildGraph(split, GraphVariant::kPairEdges);
  EXPECT_EQ(c.adjacency.nonZeros(), 19);
}

TEST(BuildGraphTest, MatchesBruteForceForEveryVariant) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const SplitSpec split = testing::RandomSplit(rng, 7, 7);
    for (GraphVariant v : {GraphVariant::kPairEdgesNoSelfLoopOnY,
                           GraphVariant::kPairEdges, GraphVariant::kFullCge}) {
      const CompGraph graph = BuildGraph(split, v);
      const Eigen::MatrixXd expected = testing::BruteForceAdjacency(split, v);
      ASSERT_EQ(Dense(graph.adjacency), expected) << GraphVariantName(v);
      for (int i = 0; i < graph.num_nodes(); ++i) {
        EXPECT_EQ(graph.degree[i], expected.row(i).sum());
      }
    }
  }
}

TEST(BuildGraphTest, VariantsAreNested) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const SplitSpec split = testing::RandomSplit(rng, 6, 6);
    const Eigen::MatrixXd b =
        Dense(BuildGraph(split, GraphVariant::kPairEdgesNoSelfLoopOnY).adjacency);
    const Eigen::MatrixXd c = Dense(BuildGraph(split, GraphVariant::kPairEdges).adjacency);
    const Eigen::MatrixXd d = Dense(BuildGraph(split, GraphVariant::kFullCge).adjacency);
    EXPECT_TRUE(((c - b).array() >= 0).all());
    EXPECT_TRUE(((d - c).array() >= 0).all());
    // d adds exactly the state-object block.
    const int ns = static_cast<int>(split.states.size());
    const int no = static_cast<int>(split.objects.size());
    Eigen::MatrixXd diff = d - c;
    diff.block(0, ns, ns, no).setZero();
    diff.block(ns, 0, no, ns).setZero();
    EXPECT_EQ(diff.cwiseAbs().sum(), 0.0);
  }
}

TEST(BuildGraphTest, IsDeterministicAndSymmetric) {
  std::mt19937_64 rng(8);
  const SplitSpec split = testing::RandomSplit(rng, 8, 8);
  const CompGraph a = BuildGraph(split, GraphVariant::kFullCge);
  const CompGraph b = BuildGraph(split, GraphVariant::kFullCge);
  EXPECT_EQ(Dense(a.adjacency), Dense(b.adjacency));
  EXPECT_EQ(Dense(a.adjacency), Dense(a.adjacency).transpose());
}

TEST(BuildGraphTest, RejectsDirectEmbeddingAndMissingAux) {
  const SplitSpec split = ToySplit();
  EXPECT_THROW(BuildGraph(split, GraphVariant::kDirectEmbedding), Error);
  EXPECT_THROW(BuildGraph(split, GraphVariant::kFullCgePlusAux), Error);
}

TEST(BuildGraphTest, AuxNodesAndEdges) {
  testing::ScopedTempDir dir;
  testing::WriteText(dir / "aux.txt",
                     "#node\tvehicle\n#node\tanimal\nvehicle\tcar\nanimal\tdog\n"
                     "vehicle\tanimal\n");
  const AuxEdges aux = LoadAuxEdges(dir / "aux.txt");
  const SplitSpec split = ToySplit();
  const CompGraph graph = BuildGraph(split, GraphVariant::kFullCgePlusAux, &aux);
  EXPECT_EQ(graph.num_nodes(), 9);
  // FullCGE entries plus 2 aux self-loops and 3 undirected edges.
  EXPECT_EQ(graph.adjacency.nonZeros(), 25 + 2 + 6);
  EXPECT_EQ(NodeName(graph, split, graph.AuxNode(1)), "aux:animal");
  EXPECT_EQ(graph.adjacency.coeff(graph.AuxNode(0), graph.ObjectNode(ObjectId{0})), 1);

  testing::WriteText(dir / "bad.txt", "vehicle\tcar\n");
  const AuxEdges bad = LoadAuxEdges(dir / "bad.txt");
  EXPECT_THROW(BuildGraph(split, GraphVariant::kFullCgePlusAux, &bad), Error);
  testing::WriteText(dir / "malformed.txt", "vehicle car\n");
  EXPECT_THROW(LoadAuxEdges(dir / "malformed.txt"), Error);
}

TEST(BuildGraphTest, NodeNamesFollowOrdering) {
  const SplitSpec split = ToySplit();
  const CompGraph graph = BuildGraph(split, GraphVariant::kFullCge);
  EXPECT_EQ(NodeName(graph, split, 0), "state:red");
  EXPECT_EQ(NodeName(graph, split, 3), "object:dog");
  EXPECT_EQ(NodeName(graph, split, 6), "pair:old car");
}

TEST(ParseGraphVariantTest, LettersAndNames) {
  EXPECT_EQ(ParseGraphVariant("a"), GraphVariant::kDirectEmbedding);
  EXPECT_EQ(ParseGraphVariant("d"), GraphVariant::kFullCge);
  EXPECT_EQ(ParseGraphVariant("full-aux"), GraphVariant::kFullCgePlusAux);
  EXPECT_EQ(GraphVariantLetter(GraphVariant::kPairEdges), 'c');
  EXPECT_THROW(ParseGraphVariant("z"), Error);
}

TEST(NormalizeTest, SingleSelfLoop) {
  SparseMatrix a(1, 1);
  a.insert(0, 0) = 1.0;
  const PropagationMatrix p = NormalizeAdjacency(a);
  EXPECT_EQ(p.matrix.coeff(0, 0), 1.0);
}

TEST(NormalizeTest, DegreeFourRow) {
  Eigen::MatrixXd dense = Eigen::MatrixXd::Identity(4, 4);
  dense.row(0).setOnes();
  dense.col(0).setOnes();
  const PropagationMatrix p = NormalizeAdjacency(dense.sparseView());
  for (int j = 0; j < 4; ++j) EXPECT_EQ(p.matrix.coeff(0, j), 0.25);
  EXPECT_EQ(p.matrix.coeff(1, 0), 0.5);
}

TEST(NormalizeTest, ZeroDegreeRowIsNamed) {
  SplitSpec split = ToySplit();
  CompGraph graph = BuildGraph(split, GraphVariant::kPairEdgesNoSelfLoopOnY);
  // Strip the self-loop of state "old" and its pair edges to isolate it.
  Eigen::MatrixXd dense = Dense(graph.adjacency);
  dense.row(1).setZero();
  dense.col(1).setZero();
  graph.adjacency = dense.sparseView();
  graph.degree = dense.rowwise().sum();
  try {
    Normalize(graph, &split);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("state:old"), std::string::npos) << e.what();
  }
}

TEST(NormalizeTest, RandomGraphsMatchDenseOracle) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const SplitSpec split = testing::RandomSplit(rng, 5, 5);
    const CompGraph graph = BuildGraph(split, GraphVariant::kFullCge);
    const PropagationMatrix p = Normalize(graph);
    const Eigen::MatrixXd expected = testing::DenseRowNormalize(
        testing::BruteForceAdjacency(split, GraphVariant::kFullCge));
    EXPECT_LT((Dense(p.matrix) - expected).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(Dense(p.transpose), Dense(p.matrix).transpose());
    EXPECT_EQ(p.matrix.nonZeros(), graph.adjacency.nonZeros());
    for (int i = 0; i < p.size(); ++i) {
      EXPECT_NEAR(Dense(p.matrix).row(i).sum(), 1.0, 1e-9);
    }
  }
}

}  // namespace
}  // namespace czsl
