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

#ifndef CZSL_EVAL_CZSL_H_
#define CZSL_EVAL_CZSL_H_

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "czsl/compat_model.h"
#include "czsl/dataset.h"

namespace czsl {

// Scores over a candidate set C, the true column per row, and which columns
// are unseen compositions. `candidates` (optional) names each column and is
// needed only for state/object accuracy.
struct EvalInput {
  Eigen::MatrixXd scores;
  std::vector<int> labels;
  std::vector<bool> unseen_columns;
  std::vector<Composition> candidates;
};

struct OperatingPoint {
  double bias = 0.0;
  double seen_acc = 0.0;
  double unseen_acc = 0.0;
};

// Points in ascending bias order; the first and last use biases -inf / +inf.
struct EvalCurve {
  std::vector<OperatingPoint> points;
  bool has_seen_rows = false;
  bool has_unseen_rows = false;
};

struct EvalResult {
  double auc = 0.0;
  double best_hm = 0.0;
  double best_hm_bias = 0.0;
  double best_seen = 0.0;
  double best_unseen = 0.0;
  double state_acc = 0.0;
  double obj_acc = 0.0;
  EvalCurve curve;
};

// Where primitive (state/object) accuracy is measured.
enum class PrimitiveAt { kUnseenSentinel, kBestHm };

PrimitiveAt ParsePrimitiveAt(std::string_view text);

// Adding bias b to every unseen column moves a row's prediction to the unseen
// group exactly when b exceeds the row margin
//   max(seen scores) - max(unseen scores).
// Ties between the groups resolve to the seen side, ties inside a group to
// the lowest column, which matches Predict() when seen columns come first.
// The candidate biases are therefore the distinct row margins plus -inf and
// +inf; together they reach every achievable (seen, unseen) accuracy pair.
std::vector<double> CandidateBiases(const EvalInput& input);

// Predicted column for every row under `bias`.
std::vector<int> PredictWithBias(const EvalInput& input, double bias);

struct BiasAccuracy {
  double seen_acc = 0.0;
  double unseen_acc = 0.0;
  // False when the corresponding row group is empty (accuracy reported as 0).
  bool seen_defined = false;
  bool unseen_defined = false;
};

BiasAccuracy AccuracyAtBias(const EvalInput& input, double bias);

// Throws if the resulting curve is not monotone (signals a scoring bug).
EvalCurve Sweep(const EvalInput& input);

// Trapezoidal area of unseen accuracy over seen accuracy. Points are sorted
// by seen accuracy, duplicates keep the highest unseen accuracy, and a single
// remaining point contributes the rectangle seen * unseen.
double ComputeAuc(const EvalCurve& curve);

double HarmonicMean(double a, double b);

EvalResult Summarize(const EvalCurve& curve, const EvalInput& input,
                     PrimitiveAt primitive_at = PrimitiveAt::kUnseenSentinel);

// Candidate set for a phase: every seen pair, then the phase's unseen pairs.
EvalInput MakeEvalInput(const CompatModel& model, const GraphInputs& inputs,
                        const Dataset& dataset);

EvalResult Evaluate(const CompatModel& model, const GraphInputs& inputs,
                    const Dataset& dataset,
                    PrimitiveAt primitive_at = PrimitiveAt::kUnseenSentinel);

// "metric,value" rows.
void WriteResultCsv(std::ostream& out, const EvalResult& result);
// "bias,seen_acc,unseen_acc" rows.
void WriteCurveCsv(std::ostream& out, const EvalCurve& curve);

struct RetrievalResult {
  std::vector<std::string> ids;
  std::vector<double> scores;
  bool truncated = false;
};

// Top-k samples by compatibility with `pair`, ties in dataset order.
RetrievalResult RetrieveTopK(const CompatModel& model, const GraphInputs& inputs,
                             const Dataset& dataset, const Composition& pair,
                             int k);

}  // namespace czsl

#endif  // CZSL_EVAL_CZSL_H_
