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

#ifndef CZSL_TRAINER_H_
#define CZSL_TRAINER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "czsl/compat_model.h"
#include "czsl/dataset.h"

namespace czsl {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<Eigen::MatrixXd> first_moment;
  std::vector<Eigen::MatrixXd> second_moment;
  int64_t step = 0;
};

// One bias-corrected Adam update. Moments are lazily sized on first use.
void AdamStep(std::span<Eigen::MatrixXd* const> params,
              std::span<const Eigen::MatrixXd> grads, AdamState& state,
              double lr, const AdamConfig& config = {});

struct TrainConfig {
  double lr_extractor = 5e-6;
  double lr_gcn = 5e-5;
  AdamConfig adam;
  int epochs = 10;
  int batch_size = 128;
  uint64_t seed = 0;
  bool shuffle = true;
  // Overrides the extractor's dropout probability when set.
  std::optional<double> dropout;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double seconds = 0.0;
  std::optional<double> val_auc;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;

  // CSV "epoch,loss,seconds,val_auc". Wall time is nondeterministic, so it
  // is only written when `include_timing` is set (otherwise 0).
  void WriteCsv(std::ostream& out, bool include_timing) const;
};

struct TrainResult {
  CompatModel model;
  TrainLog log;
  // Snapshot with the best validation AUC, when a validator was supplied.
  std::optional<CompatModel> best_model;
  double best_val_auc = -1.0;
};

using Validator = std::function<double(const CompatModel&)>;

// Maps each sample label to its column in split.seen_pairs.
std::vector<int> SeenLabelIndices(const Dataset& dataset);

TrainResult Fit(CompatModel model, const GraphInputs& inputs,
                const Dataset& train, const TrainConfig& config,
                const Validator& validate = nullptr);

struct GradCheckOptions {
  double step = 1e-5;
  int num_samples = 50;
  uint64_t seed = 0;
  // Denominator floor for the relative error.
  double floor = 1e-6;
  // Negates the analytic gradient of this tensor (mutation testing).
  int negate_param = -1;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  int checked = 0;
  int skipped_kinks = 0;
  std::string worst_param;
};

// Central differences on parameters sampled round-robin across every
// tensor, in eval mode. Samples whose perturbation flips a ReLU are
// resampled.
GradCheckResult GradCheck(const CompatModel& model, const GraphInputs& inputs,
                          const Eigen::MatrixXd& batch,
                          std::span<const int> seen_labels,
                          const GradCheckOptions& options = {});

}  // namespace czsl

#endif  // CZSL_TRAINER_H_
