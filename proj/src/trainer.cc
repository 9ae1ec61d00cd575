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

#include "czsl/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "czsl/common.h"

namespace czsl {

void AdamStep(std::span<Eigen::MatrixXd* const> params,
              std::span<const Eigen::MatrixXd> grads, AdamState& state,
              double lr, const AdamConfig& config) {
  if (params.size() != grads.size()) {
    throw Error("Adam: parameter and gradient counts differ");
  }
  if (state.first_moment.empty()) {
    for (const auto* p : params) {
      state.first_moment.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
      state.second_moment.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw Error("Adam: state does not match parameter list");
  }
  for (size_t i = 0; i < params.size(); ++i) {
    if (grads[i].rows() != params[i]->rows() ||
        grads[i].cols() != params[i]->cols() ||
        state.first_moment[i].rows() != params[i]->rows() ||
        state.first_moment[i].cols() != params[i]->cols()) {
      throw Error("Adam: shape mismatch for parameter " + std::to_string(i));
    }
    if (!grads[i].allFinite()) {
      throw Error("Adam: non-finite gradient for parameter " +
                  std::to_string(i));
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (size_t i = 0; i < params.size(); ++i) {
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    m = config.beta1 * m + (1.0 - config.beta1) * grads[i];
    v = config.beta2 * v + (1.0 - config.beta2) * grads[i].cwiseAbs2();
    const Eigen::ArrayXXd m_hat = m.array() / correction1;
    const Eigen::ArrayXXd v_hat = v.array() / correction2;
    params[i]->array() -= lr * m_hat / (v_hat.sqrt() + config.epsilon);
  }
}

void TrainLog::WriteCsv(std::ostream& out, bool include_timing) const {
  out << "epoch,loss,seconds,val_auc\n";
  for (const auto& e : epochs) {
    out << e.epoch << ',' << FormatDouble(e.loss) << ','
        << (include_timing ? FormatDouble(e.seconds, 6) : "0") << ','
        << (e.val_auc ? FormatDouble(*e.val_auc) : "") << '\n';
  }
}

std::vector<int> SeenLabelIndices(const Dataset& dataset) {
  if (!dataset.split) throw Error("dataset has no split attached");
  std::map<Composition, int> column;
  for (size_t i = 0; i < dataset.split->seen_pairs.size(); ++i) {
    column.emplace(dataset.split->seen_pairs[i], static_cast<int>(i));
  }
  std::vector<int> labels;
  labels.reserve(dataset.size());
  for (const auto& sample : dataset.samples) {
    const auto it = column.find(sample.label);
    if (it == column.end()) {
      throw Error("sample '" + sample.id + "' has unseen label (" +
                  dataset.split->PairName(sample.label) + ")");
    }
    labels.push_back(it->second);
  }
  return labels;
}

TrainResult Fit(CompatModel model, const GraphInputs& inputs,
                const Dataset& train, const TrainConfig& config,
                const Validator& validate) {
  if (train.size() == 0) throw Error("cannot train on an empty dataset");
  if (config.batch_size < 1) throw Error("batch size must be >= 1");
  if (config.lr_extractor < 0.0 || config.lr_gcn < 0.0) {
    throw Error("learning rates must be non-negative");
  }
  if (config.dropout) {
    if (!(*config.dropout >= 0.0 && *config.dropout < 1.0)) {
      throw Error("dropout must be in [0, 1)");
    }
    model.extractor.dropout = *config.dropout;
  }
  const std::vector<int> labels = SeenLabelIndices(train);

  TrainResult result;
  std::mt19937_64 rng(config.seed);
  std::vector<int> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  AdamState extractor_state;
  AdamState gcn_state;
  uint64_t step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    if (config.shuffle) std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    int batch_index = 0;
    for (size_t begin = 0; begin < order.size();
         begin += static_cast<size_t>(config.batch_size), ++batch_index) {
      const size_t end =
          std::min(order.size(), begin + static_cast<size_t>(config.batch_size));
      const std::span<const int> rows(order.data() + begin, end - begin);
      std::vector<int> batch_labels;
      batch_labels.reserve(rows.size());
      for (int r : rows) batch_labels.push_back(labels[static_cast<size_t>(r)]);
      const Eigen::MatrixXd x = train.Features(rows);

      LossAndGrad lg;
      try {
        lg = ComputeLossAndGrad(model, inputs, x, batch_labels, true,
                                MixSeed(config.seed, step));
      } catch (const Error& e) {
        throw Error("epoch " + std::to_string(epoch + 1) + ", batch " +
                    std::to_string(batch_index) + ": " + e.what());
      }
      if (!std::isfinite(lg.loss)) {
        throw Error("non-finite loss at epoch " + std::to_string(epoch + 1) +
                    ", batch " + std::to_string(batch_index));
      }
      loss_sum += lg.loss * static_cast<double>(rows.size());

      std::vector<Eigen::MatrixXd*> extractor_params, gcn_params;
      std::vector<Eigen::MatrixXd> extractor_grads, gcn_grads;
      const auto params = Parameters(model);
      for (size_t i = 0; i < params.size(); ++i) {
        if (params[i].group == ParamGroup::kExtractor) {
          extractor_params.push_back(params[i].value);
          extractor_grads.push_back(std::move(lg.grads[i]));
        } else {
          gcn_params.push_back(params[i].value);
          gcn_grads.push_back(std::move(lg.grads[i]));
        }
      }
      if (!extractor_params.empty()) {
        AdamStep(extractor_params, extractor_grads, extractor_state,
                 config.lr_extractor, config.adam);
      }
      if (!gcn_params.empty()) {
        AdamStep(gcn_params, gcn_grads, gcn_state, config.lr_gcn, config.adam);
      }
      ++step;
    }

    EpochRecord record;
    record.epoch = epoch + 1;
    record.loss = loss_sum / static_cast<double>(order.size());
    if (validate) {
      record.val_auc = validate(model);
      if (*record.val_auc > result.best_val_auc) {
        result.best_val_auc = *record.val_auc;
        result.best_model = model;
      }
    }
    record.seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    result.log.epochs.push_back(record);
  }
  result.model = std::move(model);
  return result;
}

GradCheckResult GradCheck(const CompatModel& model, const GraphInputs& inputs,
                          const Eigen::MatrixXd& batch,
                          std::span<const int> seen_labels,
                          const GradCheckOptions& options) {
  CompatModel work = model;
  work.extractor.dropout = 0.0;
  LossAndGrad analytic =
      ComputeLossAndGrad(work, inputs, batch, seen_labels, false, 0);
  if (options.negate_param >= 0 &&
      options.negate_param < static_cast<int>(analytic.grads.size())) {
    analytic.grads[static_cast<size_t>(options.negate_param)] *= -1.0;
  }
  const std::vector<bool> base_pattern = ReluPattern(work, inputs, batch);

  auto params = Parameters(work);
  GradCheckResult result;
  if (params.empty()) return result;
  std::mt19937_64 rng(options.seed);
  const int max_attempts = options.num_samples * 20;
  int attempts = 0;
  size_t tensor = 0;
  while (result.checked < options.num_samples && attempts < max_attempts) {
    ++attempts;
    const ParamRef& p = params[tensor % params.size()];
    std::uniform_int_distribution<Eigen::Index> pick(0, p.value->size() - 1);
    const Eigen::Index index = pick(rng);
    double& entry = p.value->data()[index];
    const double original = entry;

    entry = original + options.step;
    const bool plus_ok = ReluPattern(work, inputs, batch) == base_pattern;
    const double loss_plus =
        ComputeLossAndGrad(work, inputs, batch, seen_labels, false, 0).loss;
    entry = original - options.step;
    const bool minus_ok = ReluPattern(work, inputs, batch) == base_pattern;
    const double loss_minus =
        ComputeLossAndGrad(work, inputs, batch, seen_labels, false, 0).loss;
    entry = original;
    if (!plus_ok || !minus_ok) {
      ++result.skipped_kinks;
      continue;
    }

    const double numeric = (loss_plus - loss_minus) / (2.0 * options.step);
    const double exact =
        analytic.grads[tensor % params.size()].data()[index];
    const double denom =
        std::max({std::abs(numeric), std::abs(exact), options.floor});
    const double rel = std::abs(numeric - exact) / denom;
    if (rel > result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst_param = p.name;
    }
    ++result.checked;
    ++tensor;
  }
  return result;
}

}  // namespace czsl
