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
#include <map>
#include <numeric>

#include "czsl/common.h"

namespace czsl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct RowSummary {
  int best_seen = -1;
  int best_unseen = -1;
  double margin = 0.0;
};

void CheckInput(const EvalInput& input) {
  if (input.scores.rows() == 0) throw Error("evaluation input has no rows");
  if (static_cast<Eigen::Index>(input.unseen_columns.size()) !=
      input.scores.cols()) {
    throw Error("unseen mask does not match score columns");
  }
  if (static_cast<Eigen::Index>(input.labels.size()) != input.scores.rows()) {
    throw Error("label count does not match score rows");
  }
  bool any_seen = false;
  bool any_unseen = false;
  for (bool u : input.unseen_columns) (u ? any_unseen : any_seen) = true;
  if (!any_seen || !any_unseen) {
    throw Error(
        "candidate set needs both seen and unseen compositions for the bias "
        "sweep");
  }
  for (int label : input.labels) {
    if (label < 0 || label >= input.scores.cols()) {
      throw Error("true label outside the candidate set");
    }
  }
}

std::vector<RowSummary> Summaries(const EvalInput& input) {
  CheckInput(input);
  std::vector<RowSummary> rows(static_cast<size_t>(input.scores.rows()));
  for (Eigen::Index i = 0; i < input.scores.rows(); ++i) {
    RowSummary& r = rows[static_cast<size_t>(i)];
    for (Eigen::Index j = 0; j < input.scores.cols(); ++j) {
      int& best = input.unseen_columns[j] ? r.best_unseen : r.best_seen;
      if (best < 0 || input.scores(i, j) > input.scores(i, best)) {
        best = static_cast<int>(j);
      }
    }
    r.margin = input.scores(i, r.best_seen) - input.scores(i, r.best_unseen);
  }
  return rows;
}

int PredictRow(const RowSummary& row, double bias) {
  return bias > row.margin ? row.best_unseen : row.best_seen;
}

BiasAccuracy AccuracyFromSummaries(const EvalInput& input,
                                   const std::vector<RowSummary>& rows,
                                   double bias) {
  int seen_total = 0, seen_correct = 0, unseen_total = 0, unseen_correct = 0;
  for (size_t i = 0; i < rows.size(); ++i) {
    const int label = input.labels[i];
    const bool correct = PredictRow(rows[i], bias) == label;
    if (input.unseen_columns[static_cast<size_t>(label)]) {
      ++unseen_total;
      unseen_correct += correct;
    } else {
      ++seen_total;
      seen_correct += correct;
    }
  }
  BiasAccuracy acc;
  acc.seen_defined = seen_total > 0;
  acc.unseen_defined = unseen_total > 0;
  acc.seen_acc = seen_total ? static_cast<double>(seen_correct) / seen_total : 0.0;
  acc.unseen_acc =
      unseen_total ? static_cast<double>(unseen_correct) / unseen_total : 0.0;
  return acc;
}

}  // namespace

PrimitiveAt ParsePrimitiveAt(std::string_view text) {
  if (text == "sentinel" || text == "unseen") return PrimitiveAt::kUnseenSentinel;
  if (text == "best-hm") return PrimitiveAt::kBestHm;
  throw Error("unknown primitive accuracy point '" + std::string(text) + "'");
}

std::vector<double> CandidateBiases(const EvalInput& input) {
  const std::vector<RowSummary> rows = Summaries(input);
  std::vector<double> biases;
  biases.reserve(rows.size() + 2);
  for (const auto& r : rows) biases.push_back(r.margin);
  std::sort(biases.begin(), biases.end());
  biases.erase(std::unique(biases.begin(), biases.end()), biases.end());
  biases.insert(biases.begin(), -kInf);
  biases.push_back(kInf);
  return biases;
}

std::vector<int> PredictWithBias(const EvalInput& input, double bias) {
  const std::vector<RowSummary> rows = Summaries(input);
  std::vector<int> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(PredictRow(r, bias));
  return out;
}

BiasAccuracy AccuracyAtBias(const EvalInput& input, double bias) {
  return AccuracyFromSummaries(input, Summaries(input), bias);
}

EvalCurve Sweep(const EvalInput& input) {
  const std::vector<RowSummary> rows = Summaries(input);
  std::vector<double> biases;
  for (const auto& r : rows) biases.push_back(r.margin);
  std::sort(biases.begin(), biases.end());
  biases.erase(std::unique(biases.begin(), biases.end()), biases.end());
  biases.insert(biases.begin(), -kInf);
  biases.push_back(kInf);

  EvalCurve curve;
  for (double b : biases) {
    const BiasAccuracy acc = AccuracyFromSummaries(input, rows, b);
    curve.has_seen_rows = acc.seen_defined;
    curve.has_unseen_rows = acc.unseen_defined;
    if (!curve.points.empty()) {
      const OperatingPoint& prev = curve.points.back();
      if (acc.seen_acc > prev.seen_acc || acc.unseen_acc < prev.unseen_acc) {
        throw Error("bias sweep is not monotone at bias " + FormatDouble(b));
      }
    }
    curve.points.push_back({b, acc.seen_acc, acc.unseen_acc});
  }
  return curve;
}

double ComputeAuc(const EvalCurve& curve) {
  if (curve.points.empty()) return 0.0;
  std::map<double, double> by_seen;
  for (const auto& p : curve.points) {
    auto [it, inserted] = by_seen.emplace(p.seen_acc, p.unseen_acc);
    if (!inserted) it->second = std::max(it->second, p.unseen_acc);
  }
  if (by_seen.size() == 1) {
    return by_seen.begin()->first * by_seen.begin()->second;
  }
  double area = 0.0;
  auto prev = by_seen.begin();
  for (auto it = std::next(prev); it != by_seen.end(); prev = it, ++it) {
    area += (it->first - prev->first) * (it->second + prev->second) / 2.0;
  }
  return area;
}

double HarmonicMean(double a, double b) {
  return a + b > 0.0 ? 2.0 * a * b / (a + b) : 0.0;
}

EvalResult Summarize(const EvalCurve& curve, const EvalInput& input,
                     PrimitiveAt primitive_at) {
  if (curve.points.empty()) throw Error("cannot summarize an empty curve");
  EvalResult result;
  result.curve = curve;
  result.auc = ComputeAuc(curve);
  result.best_seen = curve.points.front().seen_acc;
  result.best_unseen = curve.points.back().unseen_acc;
  result.best_hm = -1.0;
  for (const auto& p : curve.points) {
    const double hm = HarmonicMean(p.seen_acc, p.unseen_acc);
    if (hm > result.best_hm) {
      result.best_hm = hm;
      result.best_hm_bias = p.bias;
    }
  }

  if (input.candidates.size() == input.unseen_columns.size()) {
    const double bias =
        primitive_at == PrimitiveAt::kBestHm ? result.best_hm_bias : kInf;
    const std::vector<int> predicted = PredictWithBias(input, bias);
    int total = 0, state_hits = 0, object_hits = 0;
    for (size_t i = 0; i < predicted.size(); ++i) {
      const int label = input.labels[i];
      if (!input.unseen_columns[static_cast<size_t>(label)]) continue;
      const Composition& truth = input.candidates[static_cast<size_t>(label)];
      const Composition& guess =
          input.candidates[static_cast<size_t>(predicted[i])];
      ++total;
      state_hits += guess.state == truth.state;
      object_hits += guess.object == truth.object;
    }
    if (total > 0) {
      result.state_acc = static_cast<double>(state_hits) / total;
      result.obj_acc = static_cast<double>(object_hits) / total;
    }
  }
  return result;
}

EvalInput MakeEvalInput(const CompatModel& model, const GraphInputs& inputs,
                        const Dataset& dataset) {
  if (!dataset.split) throw Error("dataset has no split attached");
  const SplitSpec& split = *dataset.split;
  const Eigen::MatrixXd all = Classifiers(model, inputs);

  // Rows of `all` follow SplitSpec::AllPairs(): seen, val-unseen, test-unseen.
  const int num_seen = static_cast<int>(split.seen_pairs.size());
  const int unseen_offset =
      dataset.phase == Phase::kTest
          ? num_seen + static_cast<int>(split.val_unseen.size())
          : num_seen;
  const std::vector<Composition>& unseen = split.PhaseUnseen(dataset.phase);

  EvalInput input;
  input.candidates = split.seen_pairs;
  input.candidates.insert(input.candidates.end(), unseen.begin(), unseen.end());
  input.unseen_columns.assign(input.candidates.size(), false);
  std::fill(input.unseen_columns.begin() + num_seen, input.unseen_columns.end(),
            true);
  Eigen::MatrixXd classifiers(static_cast<Eigen::Index>(input.candidates.size()),
                              all.cols());
  classifiers.topRows(num_seen) = all.topRows(num_seen);
  classifiers.bottomRows(static_cast<Eigen::Index>(unseen.size())) =
      all.middleRows(unseen_offset, static_cast<Eigen::Index>(unseen.size()));

  std::map<Composition, int> column;
  for (size_t i = 0; i < input.candidates.size(); ++i) {
    column.emplace(input.candidates[i], static_cast<int>(i));
  }
  for (const auto& sample : dataset.samples) {
    const auto it = column.find(sample.label);
    if (it == column.end()) {
      throw Error("sample '" + sample.id + "' label (" +
                  split.PairName(sample.label) +
                  ") is not in the candidate set");
    }
    input.labels.push_back(it->second);
  }
  const ExtractOutput phi =
      Extract(model.extractor, dataset.AllFeatures(), false, 0);
  input.scores = ScoreAll(phi.features, classifiers);
  return input;
}

EvalResult Evaluate(const CompatModel& model, const GraphInputs& inputs,
                    const Dataset& dataset, PrimitiveAt primitive_at) {
  const EvalInput input = MakeEvalInput(model, inputs, dataset);
  return Summarize(Sweep(input), input, primitive_at);
}

void WriteResultCsv(std::ostream& out, const EvalResult& result) {
  out << "metric,value\n";
  out << "auc," << FormatDouble(result.auc) << '\n';
  out << "best_hm," << FormatDouble(result.best_hm) << '\n';
  out << "best_seen," << FormatDouble(result.best_seen) << '\n';
  out << "best_unseen," << FormatDouble(result.best_unseen) << '\n';
  out << "state_acc," << FormatDouble(result.state_acc) << '\n';
  out << "obj_acc," << FormatDouble(result.obj_acc) << '\n';
}

void WriteCurveCsv(std::ostream& out, const EvalCurve& curve) {
  out << "bias,seen_acc,unseen_acc\n";
  for (const auto& p : curve.points) {
    out << FormatDouble(p.bias) << ',' << FormatDouble(p.seen_acc) << ','
        << FormatDouble(p.unseen_acc) << '\n';
  }
}

RetrievalResult RetrieveTopK(const CompatModel& model, const GraphInputs& inputs,
                             const Dataset& dataset, const Composition& pair,
                             int k) {
  if (k < 1) throw Error("k must be >= 1");
  if (!dataset.split) throw Error("dataset has no split attached");
  const std::vector<Composition> all_pairs = dataset.split->AllPairs();
  const auto it = std::find(all_pairs.begin(), all_pairs.end(), pair);
  if (it == all_pairs.end()) {
    throw Error("composition (" + dataset.split->PairName(pair) +
                ") is not a graph node");
  }
  const Eigen::MatrixXd classifiers = Classifiers(model, inputs);
  const Eigen::VectorXd classifier =
      classifiers.row(static_cast<Eigen::Index>(it - all_pairs.begin()))
          .transpose();
  const ExtractOutput phi =
      Extract(model.extractor, dataset.AllFeatures(), false, 0);
  const Eigen::VectorXd scores = phi.features * classifier;

  std::vector<int> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  RetrievalResult result;
  size_t count = static_cast<size_t>(k);
  if (count > order.size()) {
    count = order.size();
    result.truncated = true;
  }
  for (size_t i = 0; i < count; ++i) {
    result.ids.push_back(dataset.samples[static_cast<size_t>(order[i])].id);
    result.scores.push_back(scores[order[i]]);
  }
  return result;
}

}  // namespace czsl
