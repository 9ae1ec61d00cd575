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

#include "czsl/eval_czsl.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "czsl/common.h"
#include "czsl/model_config.h"
#include "czsl/synthgen.h"
#include "support/oracles.h"
#include "support/test_support.h"

namespace czsl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

EvalInput RandomInput(std::mt19937_64& rng, bool integer_scores) {
  std::uniform_int_distribution<int> rows_dist(1, 20), cols_dist(2, 10);
  const int rows = rows_dist(rng);
  const int cols = cols_dist(rng);
  EvalInput input;
  input.unseen_columns.assign(static_cast<size_t>(cols), false);
  const int unseen = std::uniform_int_distribution<int>(1, cols - 1)(rng);
  if (integer_scores) {
    // Seen columns first, as in MakeEvalInput, so exact ties agree with a
    // plain first-maximum argmax.
    std::fill(input.unseen_columns.end() - unseen, input.unseen_columns.end(), true);
  } else {
    std::vector<int> order(static_cast<size_t>(cols));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (int i = 0; i < unseen; ++i) input.unseen_columns[order[i]] = true;
  }
  input.scores.resize(rows, cols);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> small(-3, 3);
  for (int i = 0; i < input.scores.size(); ++i) {
    input.scores.data()[i] = integer_scores ? small(rng) : normal(rng);
  }
  std::uniform_int_distribution<int> label(0, cols - 1);
  for (int i = 0; i < rows; ++i) input.labels.push_back(label(rng));
  return input;
}

std::set<std::pair<double, double>> CurvePoints(const EvalCurve& curve) {
  std::set<std::pair<double, double>> points;
  for (const auto& p : curve.points) points.emplace(p.seen_acc, p.unseen_acc);
  return points;
}

TEST(CandidateBiasesTest, SingleRow) {
  EvalInput input;
  input.scores = Eigen::RowVector2d(2.0, 1.5);
  input.unseen_columns = {false, true};
  input.labels = {0};
  EXPECT_EQ(CandidateBiases(input), (std::vector<double>{-kInf, 0.5, kInf}));
  EXPECT_EQ(Sweep(input).points.size(), 3u);
}

TEST(CandidateBiasesTest, EqualMarginsDeduplicate) {
  EvalInput input;
  input.scores.resize(2, 2);
  input.scores << 2.0, 1.0, 5.0, 4.0;
  input.unseen_columns = {false, true};
  input.labels = {0, 1};
  EXPECT_EQ(CandidateBiases(input), (std::vector<double>{-kInf, 1.0, kInf}));
}

TEST(CandidateBiasesTest, NeedsBothGroups) {
  EvalInput input;
  input.scores = Eigen::RowVector2d(2.0, 1.5);
  input.unseen_columns = {false, false};
  input.labels = {0};
  EXPECT_THROW(CandidateBiases(input), Error);
}

TEST(AccuracyAtBiasTest, SentinelsAndSeparableCase) {
  EvalInput input;
  input.scores = Eigen::MatrixXd::Identity(2, 2);
  input.unseen_columns = {false, true};
  input.labels = {0, 1};
  const BiasAccuracy mid = AccuracyAtBias(input, 0.0);
  EXPECT_EQ(mid.seen_acc, 1.0);
  EXPECT_EQ(mid.unseen_acc, 1.0);
  EXPECT_EQ(AccuracyAtBias(input, kInf).seen_acc, 0.0);
  EXPECT_EQ(AccuracyAtBias(input, -kInf).unseen_acc, 0.0);
  EXPECT_EQ(PredictWithBias(input, kInf), (std::vector<int>{1, 1}));

  input.labels = {0, 0};
  const BiasAccuracy only_seen = AccuracyAtBias(input, 0.0);
  EXPECT_TRUE(only_seen.seen_defined);
  EXPECT_FALSE(only_seen.unseen_defined);
  EXPECT_EQ(only_seen.unseen_acc, 0.0);
}

TEST(SweepTest, MatchesGridOracleOnRandomInstances) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const EvalInput input = RandomInput(rng, trial % 2 == 1);
    const EvalCurve curve = Sweep(input);
    const auto expected = testing::GridSweepPoints(input.scores, input.labels,
                                                   input.unseen_columns, 10000);
    EXPECT_EQ(CurvePoints(curve), expected) << "trial " << trial;
    EXPECT_NEAR(ComputeAuc(curve), testing::SegmentAuc(expected), 1e-10);
  }
}

TEST(SweepTest, PerfectClassifierReachesOneOne) {
  EvalInput input;
  input.scores.resize(2, 2);
  input.scores << 3.0, 2.0, 1.0, 2.0;
  input.unseen_columns = {false, true};
  input.labels = {0, 1};
  const EvalCurve curve = Sweep(input);
  EXPECT_TRUE(CurvePoints(curve).count({1.0, 1.0}));
  for (double b : {-0.99, 0.0, 0.5, 0.99}) {
    const BiasAccuracy acc = AccuracyAtBias(input, b);
    EXPECT_EQ(acc.seen_acc, 1.0);
    EXPECT_EQ(acc.unseen_acc, 1.0);
  }
  EXPECT_EQ(Summarize(curve, input).best_hm, 1.0);
}

TEST(SweepTest, CurveIsMonotone) {
  std::mt19937_64 rng(78);
  for (int trial = 0; trial < 50; ++trial) {
    const EvalCurve curve = Sweep(RandomInput(rng, false));
    EXPECT_EQ(curve.points.front().bias, -kInf);
    EXPECT_EQ(curve.points.back().bias, kInf);
    for (size_t i = 1; i < curve.points.size(); ++i) {
      EXPECT_LE(curve.points[i].seen_acc, curve.points[i - 1].seen_acc);
      EXPECT_GE(curve.points[i].unseen_acc, curve.points[i - 1].unseen_acc);
      EXPECT_LT(curve.points[i - 1].bias, curve.points[i].bias);
    }
  }
}

EvalCurve CurveOf(std::initializer_list<std::pair<double, double>> points) {
  EvalCurve curve;
  double bias = 0.0;
  for (const auto& [s, u] : points) curve.points.push_back({bias++, s, u});
  return curve;
}

TEST(ComputeAucTest, PerfectAndStepCurves) {
  EXPECT_EQ(ComputeAuc(CurveOf({{0, 1}, {1, 1}})), 1.0);
  const EvalCurve step = CurveOf({{0, 0.5}, {0.5, 0.5}, {0.5, 0}, {1, 0}});
  // Frozen from the midpoint-quadrature oracle.
  const double expected = 0.375;
  EXPECT_NEAR(testing::QuadratureAuc(CurvePoints(step), 1000000), expected, 1e-9);
  EXPECT_NEAR(ComputeAuc(step), expected, 1e-15);
}

TEST(ComputeAucTest, SinglePointIsRectangle) {
  EXPECT_DOUBLE_EQ(ComputeAuc(CurveOf({{0.4, 0.5}, {0.4, 0.25}})), 0.2);
  EXPECT_EQ(ComputeAuc(EvalCurve{}), 0.0);
}

TEST(ComputeAucTest, InvariantToGlobalShift) {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 30; ++trial) {
    EvalInput input = RandomInput(rng, true);
    const double base = ComputeAuc(Sweep(input));
    input.scores.array() += 3.0;
    EXPECT_EQ(ComputeAuc(Sweep(input)), base);
  }
}

TEST(SummarizeTest, HarmonicMeanAndPrimitiveAccuracy) {
  EXPECT_NEAR(HarmonicMean(0.6, 0.3), 0.4, 1e-15);
  EXPECT_EQ(HarmonicMean(0.0, 0.0), 0.0);

  // Candidates: seen (old,dog), unseen (old,cat), unseen (new,dog).
  EvalInput input;
  input.candidates = {{StateId{0}, ObjectId{0}},
                      {StateId{0}, ObjectId{1}},
                      {StateId{1}, ObjectId{0}}};
  input.unseen_columns = {false, true, true};
  input.scores.resize(2, 3);
  input.scores << 5, 1, 0,   // seen row, label 0
      0, 2, 1;               // unseen row, label 2, predicted 1 at +inf
  input.labels = {0, 2};
  const EvalResult r = Summarize(Sweep(input), input);
  EXPECT_EQ(r.state_acc, 0.0);
  EXPECT_EQ(r.obj_acc, 0.0);
  input.labels = {0, 1};
  const EvalResult perfect = Summarize(Sweep(input), input);
  EXPECT_EQ(perfect.state_acc, 1.0);
  EXPECT_EQ(perfect.obj_acc, 1.0);
  input.candidates[2] = {StateId{0}, ObjectId{2}};
  input.labels = {0, 2};
  const EvalResult state_only = Summarize(Sweep(input), input);
  EXPECT_EQ(state_only.state_acc, 1.0);
  EXPECT_EQ(state_only.obj_acc, 0.0);
}

TEST(SummarizeTest, InvariantsOnRandomInstances) {
  std::mt19937_64 rng(80);
  for (int trial = 0; trial < 50; ++trial) {
    const EvalInput input = RandomInput(rng, trial % 2 == 0);
    const EvalInput copy = input;
    const EvalCurve curve = Sweep(input);
    const EvalResult r = Summarize(curve, input);
    EXPECT_EQ(input.scores, copy.scores);
    EXPECT_EQ(r.best_seen, AccuracyAtBias(input, -kInf).seen_acc);
    EXPECT_EQ(r.best_unseen, AccuracyAtBias(input, kInf).unseen_acc);
    EXPECT_GE(r.auc, 0.0);
    EXPECT_LE(r.auc, 1.0);
    EXPECT_LE(r.best_hm, 1.0);
    for (const auto& p : curve.points) {
      EXPECT_GE(r.best_hm, HarmonicMean(p.seen_acc, p.unseen_acc));
    }
  }
}

struct EvalFixture {
  SynthData data;
  GraphInputs inputs;
  CompatModel model;
};

EvalFixture MakeEvalFixture() {
  EvalFixture f;
  SynthConfig config = testing::BenchmarkSynthConfig(12);
  config.samples_per_pair = 3;
  f.data = GenerateSynthetic(config);
  f.inputs = MakeGraphInputs(*f.data.split, GraphVariant::kFullCge,
                             EmbeddingTable::FromSource(f.data.embeddings));
  ModelConfig mc;
  mc.extractor_kind = FeatureExtractor::Kind::kIdentity;
  mc.extractor_widths = {32, 32, 32};
  mc.gcn_widths = {16};
  f.model = BuildModel(mc, 32, 8, 4);
  return f;
}

TEST(MakeEvalInputTest, PhaseCandidateSets) {
  const EvalFixture f = MakeEvalFixture();
  const SplitSpec& split = *f.data.split;
  const Eigen::MatrixXd all = Classifiers(f.model, f.inputs);
  const Eigen::MatrixXd phi = f.data.test.AllFeatures();
  const EvalInput test = MakeEvalInput(f.model, f.inputs, f.data.test);
  ASSERT_EQ(test.candidates.size(), split.seen_pairs.size() + split.test_unseen.size());
  const int seen = static_cast<int>(split.seen_pairs.size());
  const int offset = seen + static_cast<int>(split.val_unseen.size());
  for (int j = 0; j < static_cast<int>(split.test_unseen.size()); ++j) {
    EXPECT_EQ(test.candidates[seen + j], split.test_unseen[j]);
    EXPECT_TRUE(test.unseen_columns[seen + j]);
    EXPECT_LT((test.scores.col(seen + j) - phi * all.row(offset + j).transpose())
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
  }
  const EvalInput val = MakeEvalInput(f.model, f.inputs, f.data.val);
  EXPECT_EQ(val.candidates.size(), split.seen_pairs.size() + split.val_unseen.size());
  for (size_t i = 0; i < f.data.val.size(); ++i) {
    EXPECT_EQ(val.candidates[val.labels[i]], f.data.val.samples[i].label);
  }
}

TEST(ResultCsvTest, Format) {
  const EvalFixture f = MakeEvalFixture();
  const EvalResult r = Evaluate(f.model, f.inputs, f.data.val);
  std::ostringstream out;
  WriteResultCsv(out, r);
  const std::string csv = out.str();
  EXPECT_EQ(csv.rfind("metric,value\nauc,", 0), 0u) << csv;
  for (const char* key : {"best_hm,", "best_seen,", "best_unseen,", "state_acc,", "obj_acc,"}) {
    EXPECT_NE(csv.find(key), std::string::npos);
  }
  std::ostringstream curve;
  WriteCurveCsv(curve, r.curve);
  EXPECT_EQ(curve.str().rfind("bias,seen_acc,unseen_acc\n-inf,", 0), 0u) << curve.str();
}

TEST(RetrieveTopKTest, MatchesSortOracleAndScaling) {
  const EvalFixture f = MakeEvalFixture();
  const Composition pair = f.data.split->test_unseen[0];
  const RetrievalResult r = RetrieveTopK(f.model, f.inputs, f.data.test, pair, 5);
  ASSERT_EQ(r.ids.size(), 5u);
  EXPECT_FALSE(r.truncated);

  const auto all_pairs = f.data.split->AllPairs();
  const int row = static_cast<int>(
      std::find(all_pairs.begin(), all_pairs.end(), pair) - all_pairs.begin());
  const Eigen::VectorXd classifier = Classifiers(f.model, f.inputs).row(row);
  std::vector<std::pair<double, int>> oracle;
  for (size_t i = 0; i < f.data.test.size(); ++i) {
    double dot = 0.0;
    for (int d = 0; d < 32; ++d) dot += f.data.test.samples[i].feature[d] * classifier[d];
    oracle.emplace_back(-dot, static_cast<int>(i));
  }
  std::sort(oracle.begin(), oracle.end());
  for (size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(r.ids[k], f.data.test.samples[oracle[k].second].id);
    EXPECT_NEAR(r.scores[k], -oracle[k].first, 1e-12);
  }

  Dataset scaled = f.data.test;
  for (auto& s : scaled.samples) {
    for (double& v : s.feature) v *= 2.0;
  }
  EXPECT_EQ(RetrieveTopK(f.model, f.inputs, scaled, pair, 5).ids, r.ids);

  const RetrievalResult all = RetrieveTopK(f.model, f.inputs, f.data.test, pair, 100000);
  EXPECT_TRUE(all.truncated);
  EXPECT_EQ(all.ids.size(), f.data.test.size());
}

TEST(RetrieveTopKTest, StrictMaximumComesFirst) {
  const EvalFixture f = MakeEvalFixture();
  const Composition pair = f.data.split->seen_pairs[0];
  const Eigen::VectorXd classifier = Classifiers(f.model, f.inputs).row(0);
  Dataset data = f.data.test;
  Sample& target = data.samples[3];
  for (int d = 0; d < 32; ++d) target.feature[d] = 100.0 * classifier[d];
  const RetrievalResult top = RetrieveTopK(f.model, f.inputs, data, pair, 2);
  ASSERT_EQ(top.ids.size(), 2u);
  EXPECT_EQ(top.ids[0], target.id);
  EXPECT_GT(top.scores[0], top.scores[1]);
  EXPECT_EQ(RetrieveTopK(f.model, f.inputs, data, pair, 1).ids, std::vector<std::string>{target.id});
  EXPECT_THROW(RetrieveTopK(f.model, f.inputs, data, pair, 0), Error);
}

}  // namespace
}  // namespace czsl
