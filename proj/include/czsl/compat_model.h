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

#ifndef CZSL_COMPAT_MODEL_H_
#define CZSL_COMPAT_MODEL_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "czsl/comp_graph.h"
#include "czsl/dataset.h"
#include "czsl/gcn.h"
#include "czsl/node_features.h"

namespace czsl {

// Image-feature network F. Identity passes features through; Mlp3 is three
// blocks of affine -> LayerNorm -> ReLU -> Dropout.
struct FeatureExtractor {
  enum class Kind { kIdentity, kMlp3 };

  struct Block {
    Eigen::MatrixXd weight;  // in x out
    Eigen::MatrixXd bias;    // 1 x out
    Eigen::MatrixXd gain;    // 1 x out, LayerNorm scale
    Eigen::MatrixXd shift;   // 1 x out, LayerNorm offset
  };

  Kind kind = Kind::kIdentity;
  int input_width = 0;
  int output_width = 0;
  double dropout = 0.0;
  std::vector<Block> blocks;  // empty for Identity, three for Mlp3
};

FeatureExtractor MakeIdentityExtractor(int width);
// widths = {d_in, h1, h2, d}.
FeatureExtractor MakeMlp3Extractor(const std::array<int, 4>& widths,
                                   double dropout, uint64_t seed);

inline constexpr double kLayerNormEps = 1e-5;

struct ExtractCache {
  struct BlockCache {
    Eigen::MatrixXd input;
    Eigen::MatrixXd normalized;  // x-hat
    Eigen::VectorXd inv_std;     // per row
    Eigen::MatrixXd pre_relu;    // gain * x-hat + shift
    Eigen::MatrixXd mask;        // dropout keep mask, already scaled by 1/(1-p)
  };
  std::vector<BlockCache> blocks;
};

struct ExtractOutput {
  Eigen::MatrixXd features;  // B x d
  ExtractCache cache;
};

// Dropout is active only when `train_mode` is set; its masks are a pure
// function of `dropout_seed`.
ExtractOutput Extract(const FeatureExtractor& extractor,
                      const Eigen::MatrixXd& input, bool train_mode,
                      uint64_t dropout_seed);

// Gradients per block in {weight, bias, gain, shift} order.
std::vector<Eigen::MatrixXd> ExtractBackward(const FeatureExtractor& extractor,
                                             const ExtractCache& cache,
                                             const Eigen::MatrixXd& grad_output,
                                             Eigen::MatrixXd* grad_input);

// Inputs that define the classifier side: the propagation matrix (absent
// for the direct-embedding variant) and node features. Composition rows
// occupy [first_composition_row, first_composition_row + num_compositions),
// seen compositions first.
struct GraphInputs {
  GraphVariant variant = GraphVariant::kFullCge;
  std::optional<CompGraph> graph;
  std::optional<PropagationMatrix> propagation;
  Eigen::MatrixXd node_features;
  int first_composition_row = 0;
  int num_compositions = 0;
  int num_seen = 0;
};

GraphInputs MakeGraphInputs(const SplitSpec& split, GraphVariant variant,
                            const EmbeddingTable& table,
                            const AuxEdges* aux = nullptr);

// f(x, s, o) = F(x) . G(s, o). Without a GCN the classifiers are the fixed
// averaged word vectors (direct embedding).
struct CompatModel {
  FeatureExtractor extractor;
  std::optional<GcnStack> gcn;
  int dim = 0;
};

enum class ParamGroup { kExtractor, kGcn };

struct ParamRef {
  std::string name;
  ParamGroup group;
  Eigen::MatrixXd* value;
};

// Every trainable tensor, extractor first, then GCN.
std::vector<ParamRef> Parameters(CompatModel& model);
size_t NumParameters(const CompatModel& model);

// |Y| x d classifier rows, one per composition.
Eigen::MatrixXd Classifiers(const CompatModel& model, const GraphInputs& inputs);

// Entry (i, j) = features.row(i) . classifiers.row(j).
Eigen::MatrixXd ScoreAll(const Eigen::MatrixXd& features,
                         const Eigen::MatrixXd& classifiers);

struct LossResult {
  double loss = 0.0;
  Eigen::MatrixXd grad;  // dLoss/dScores
};

// Mean softmax cross-entropy with max-subtraction.
LossResult CrossEntropy(const Eigen::MatrixXd& scores,
                        std::span<const int> labels);

// Row-wise argmax; ties resolve to the lowest column.
std::vector<int> Predict(const Eigen::MatrixXd& scores);

struct LossAndGrad {
  double loss = 0.0;
  std::vector<Eigen::MatrixXd> grads;  // aligned with Parameters()
};

// End-to-end loss over seen compositions and its gradient for every
// parameter. `seen_labels` index into the seen block of the classifiers.
LossAndGrad ComputeLossAndGrad(const CompatModel& model,
                               const GraphInputs& inputs,
                               const Eigen::MatrixXd& batch,
                               std::span<const int> seen_labels,
                               bool train_mode, uint64_t dropout_seed);

// ReLU on/off pattern across extractor and GCN for a batch (eval mode).
std::vector<bool> ReluPattern(const CompatModel& model,
                              const GraphInputs& inputs,
                              const Eigen::MatrixXd& batch);

}  // namespace czsl

#endif  // CZSL_COMPAT_MODEL_H_
