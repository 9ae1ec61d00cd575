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

#include "czsl/compat_model.h"

#include <cmath>
#include <random>

#include "czsl/common.h"

namespace czsl {
namespace {

Eigen::MatrixXd GlorotUniform(int rows, int cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = dist(rng);
  }
  return m;
}

}  // namespace

FeatureExtractor MakeIdentityExtractor(int width) {
  if (width <= 0) throw Error("identity extractor width must be positive");
  FeatureExtractor extractor;
  extractor.kind = FeatureExtractor::Kind::kIdentity;
  extractor.input_width = width;
  extractor.output_width = width;
  return extractor;
}

FeatureExtractor MakeMlp3Extractor(const std::array<int, 4>& widths,
                                   double dropout, uint64_t seed) {
  for (int w : widths) {
    if (w <= 0) throw Error("MLP widths must be positive");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw Error("dropout must be in [0, 1)");
  }
  FeatureExtractor extractor;
  extractor.kind = FeatureExtractor::Kind::kMlp3;
  extractor.input_width = widths[0];
  extractor.output_width = widths[3];
  extractor.dropout = dropout;
  std::mt19937_64 rng(seed);
  for (int l = 0; l < 3; ++l) {
    FeatureExtractor::Block block;
    block.weight = GlorotUniform(widths[l], widths[l + 1], rng);
    block.bias = Eigen::MatrixXd::Zero(1, widths[l + 1]);
    block.gain = Eigen::MatrixXd::Ones(1, widths[l + 1]);
    block.shift = Eigen::MatrixXd::Zero(1, widths[l + 1]);
    extractor.blocks.push_back(std::move(block));
  }
  return extractor;
}

ExtractOutput Extract(const FeatureExtractor& extractor,
                      const Eigen::MatrixXd& input, bool train_mode,
                      uint64_t dropout_seed) {
  if (input.cols() != extractor.input_width) {
    throw Error("extractor expects width " +
                std::to_string(extractor.input_width) + ", got " +
                std::to_string(input.cols()));
  }
  ExtractOutput out;
  if (extractor.kind == FeatureExtractor::Kind::kIdentity) {
    out.features = input;
    return out;
  }
  const double keep = 1.0 - extractor.dropout;
  const bool use_dropout = train_mode && extractor.dropout > 0.0;
  Eigen::MatrixXd x = input;
  for (size_t l = 0; l < extractor.blocks.size(); ++l) {
    const auto& block = extractor.blocks[l];
    ExtractCache::BlockCache bc;
    bc.input = x;
    Eigen::MatrixXd a = x * block.weight;
    a.rowwise() += block.bias.row(0);
    const Eigen::Index width = a.cols();
    const Eigen::VectorXd mean = a.rowwise().mean();
    Eigen::MatrixXd centered = a.colwise() - mean;
    const Eigen::VectorXd var =
        centered.array().square().rowwise().sum() / static_cast<double>(width);
    bc.inv_std = (var.array() + kLayerNormEps).rsqrt().matrix();
    bc.normalized = bc.inv_std.asDiagonal() * centered;
    bc.pre_relu = bc.normalized.array().rowwise() * block.gain.row(0).array();
    bc.pre_relu.rowwise() += block.shift.row(0);
    Eigen::MatrixXd r = bc.pre_relu.cwiseMax(0.0);
    if (use_dropout) {
      std::mt19937_64 rng(MixSeed(dropout_seed, l));
      std::bernoulli_distribution bernoulli(keep);
      bc.mask.resize(r.rows(), r.cols());
      for (Eigen::Index i = 0; i < r.rows(); ++i) {
        for (Eigen::Index j = 0; j < r.cols(); ++j) {
          bc.mask(i, j) = bernoulli(rng) ? 1.0 / keep : 0.0;
        }
      }
      r.array() *= bc.mask.array();
    }
    x = std::move(r);
    out.cache.blocks.push_back(std::move(bc));
  }
  if (!x.allFinite()) throw Error("non-finite output from feature extractor");
  out.features = std::move(x);
  return out;
}

std::vector<Eigen::MatrixXd> ExtractBackward(const FeatureExtractor& extractor,
                                             const ExtractCache& cache,
                                             const Eigen::MatrixXd& grad_output,
                                             Eigen::MatrixXd* grad_input) {
  std::vector<Eigen::MatrixXd> grads;
  if (extractor.kind == FeatureExtractor::Kind::kIdentity) {
    if (grad_input) *grad_input = grad_output;
    return grads;
  }
  if (cache.blocks.size() != extractor.blocks.size()) {
    throw Error("stale extractor cache");
  }
  grads.resize(4 * extractor.blocks.size());
  Eigen::MatrixXd grad = grad_output;
  for (int l = static_cast<int>(extractor.blocks.size()) - 1; l >= 0; --l) {
    const auto& block = extractor.blocks[l];
    const auto& bc = cache.blocks[l];
    if (bc.mask.size() > 0) grad.array() *= bc.mask.array();
    grad.array() *= (bc.pre_relu.array() > 0.0).cast<double>();
    // grad is now dLoss/d(pre_relu).
    grads[4 * l + 2] = (grad.array() * bc.normalized.array()).colwise().sum();
    grads[4 * l + 3] = grad.colwise().sum();
    const Eigen::MatrixXd grad_norm =
        grad.array().rowwise() * block.gain.row(0).array();
    const double width = static_cast<double>(grad_norm.cols());
    const Eigen::VectorXd mean_grad = grad_norm.rowwise().sum() / width;
    const Eigen::VectorXd mean_grad_x =
        (grad_norm.array() * bc.normalized.array()).rowwise().sum().matrix() /
        width;
    Eigen::MatrixXd grad_affine =
        (grad_norm.colwise() - mean_grad) -
        (bc.normalized.array().colwise() * mean_grad_x.array()).matrix();
    grad_affine = bc.inv_std.asDiagonal() * grad_affine;
    grads[4 * l + 0] = bc.input.transpose() * grad_affine;
    grads[4 * l + 1] = grad_affine.colwise().sum();
    grad = grad_affine * block.weight.transpose();
  }
  if (grad_input) *grad_input = std::move(grad);
  return grads;
}

GraphInputs MakeGraphInputs(const SplitSpec& split, GraphVariant variant,
                            const EmbeddingTable& table, const AuxEdges* aux) {
  GraphInputs inputs;
  inputs.variant = variant;
  inputs.first_composition_row =
      static_cast<int>(split.states.size() + split.objects.size());
  inputs.num_compositions = static_cast<int>(split.AllPairs().size());
  inputs.num_seen = static_cast<int>(split.seen_pairs.size());
  if (variant == GraphVariant::kDirectEmbedding) {
    inputs.node_features = BuildNodeFeaturesNoGraph(split, table);
    return inputs;
  }
  inputs.graph = BuildGraph(split, variant, aux);
  inputs.propagation = Normalize(*inputs.graph, &split);
  inputs.node_features = BuildNodeFeatures(split, *inputs.graph, table);
  return inputs;
}

std::vector<ParamRef> Parameters(CompatModel& model) {
  std::vector<ParamRef> params;
  for (size_t l = 0; l < model.extractor.blocks.size(); ++l) {
    auto& block = model.extractor.blocks[l];
    const std::string prefix = "extractor.block" + std::to_string(l) + ".";
    params.push_back({prefix + "weight", ParamGroup::kExtractor, &block.weight});
    params.push_back({prefix + "bias", ParamGroup::kExtractor, &block.bias});
    params.push_back({prefix + "gain", ParamGroup::kExtractor, &block.gain});
    params.push_back({prefix + "shift", ParamGroup::kExtractor, &block.shift});
  }
  if (model.gcn) {
    if (model.gcn->mode == GcnMode::kGcnii) {
      params.push_back({"gcn.input_projection", ParamGroup::kGcn,
                        &model.gcn->input_projection});
    }
    for (size_t l = 0; l < model.gcn->weights.size(); ++l) {
      params.push_back({"gcn.layer" + std::to_string(l) + ".weight",
                        ParamGroup::kGcn, &model.gcn->weights[l]});
    }
  }
  return params;
}

size_t NumParameters(const CompatModel& model) {
  size_t n = 0;
  for (const auto& p : Parameters(const_cast<CompatModel&>(model))) {
    n += static_cast<size_t>(p.value->size());
  }
  return n;
}

namespace {

struct ClassifierPass {
  Eigen::MatrixXd classifiers;
  std::optional<GcnOutput> gcn;
};

ClassifierPass RunClassifiers(const CompatModel& model,
                              const GraphInputs& inputs) {
  ClassifierPass pass;
  if (model.gcn) {
    if (!inputs.propagation) {
      throw Error("GCN classifier source requires a graph");
    }
    pass.gcn = Forward(*model.gcn, *inputs.propagation, inputs.node_features);
    pass.classifiers = pass.gcn->output.middleRows(inputs.first_composition_row,
                                                   inputs.num_compositions);
  } else {
    pass.classifiers = inputs.node_features.middleRows(
        inputs.first_composition_row, inputs.num_compositions);
  }
  if (pass.classifiers.cols() != model.dim) {
    throw Error("classifier width " + std::to_string(pass.classifiers.cols()) +
                " does not match model dimension " + std::to_string(model.dim));
  }
  return pass;
}

}  // namespace

Eigen::MatrixXd Classifiers(const CompatModel& model, const GraphInputs& inputs) {
  return RunClassifiers(model, inputs).classifiers;
}

Eigen::MatrixXd ScoreAll(const Eigen::MatrixXd& features,
                         const Eigen::MatrixXd& classifiers) {
  if (features.cols() != classifiers.cols()) {
    throw Error("feature width " + std::to_string(features.cols()) +
                " does not match classifier width " +
                std::to_string(classifiers.cols()));
  }
  return features * classifiers.transpose();
}

LossResult CrossEntropy(const Eigen::MatrixXd& scores,
                        std::span<const int> labels) {
  if (static_cast<Eigen::Index>(labels.size()) != scores.rows()) {
    throw Error("label count does not match score rows");
  }
  const Eigen::Index batch = scores.rows();
  const Eigen::Index classes = scores.cols();
  LossResult result;
  result.grad.resize(batch, classes);
  if (batch == 0) return result;
  double total = 0.0;
  for (Eigen::Index i = 0; i < batch; ++i) {
    const int label = labels[static_cast<size_t>(i)];
    if (label < 0 || label >= classes) {
      throw Error("label " + std::to_string(label) + " out of range [0, " +
                  std::to_string(classes) + ")");
    }
    const double max = scores.row(i).maxCoeff();
    const Eigen::RowVectorXd exps = (scores.row(i).array() - max).exp();
    const double sum = exps.sum();
    total += std::log(sum) - (scores(i, label) - max);
    result.grad.row(i) = exps / sum;
    result.grad(i, label) -= 1.0;
  }
  result.grad /= static_cast<double>(batch);
  result.loss = total / static_cast<double>(batch);
  return result;
}

std::vector<int> Predict(const Eigen::MatrixXd& scores) {
  std::vector<int> out(static_cast<size_t>(scores.rows()), 0);
  if (scores.cols() == 0) throw Error("predict over an empty candidate set");
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < scores.cols(); ++j) {
      if (scores(i, j) > scores(i, best)) best = j;
    }
    out[static_cast<size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

LossAndGrad ComputeLossAndGrad(const CompatModel& model,
                               const GraphInputs& inputs,
                               const Eigen::MatrixXd& batch,
                               std::span<const int> seen_labels,
                               bool train_mode, uint64_t dropout_seed) {
  const ExtractOutput phi =
      Extract(model.extractor, batch, train_mode, dropout_seed);
  const ClassifierPass pass = RunClassifiers(model, inputs);
  const Eigen::MatrixXd seen = pass.classifiers.topRows(inputs.num_seen);
  const Eigen::MatrixXd scores = ScoreAll(phi.features, seen);
  const LossResult ce = CrossEntropy(scores, seen_labels);
  if (!std::isfinite(ce.loss)) throw Error("non-finite training loss");

  LossAndGrad result;
  result.loss = ce.loss;
  const Eigen::MatrixXd grad_phi = ce.grad * seen;
  result.grads =
      ExtractBackward(model.extractor, phi.cache, grad_phi, nullptr);
  if (model.gcn) {
    Eigen::MatrixXd grad_h = Eigen::MatrixXd::Zero(pass.gcn->output.rows(),
                                                   pass.gcn->output.cols());
    grad_h.middleRows(inputs.first_composition_row, inputs.num_seen) =
        ce.grad.transpose() * phi.features;
    GcnGradients g =
        Backward(*model.gcn, *inputs.propagation, pass.gcn->cache, grad_h);
    if (model.gcn->mode == GcnMode::kGcnii) {
      result.grads.push_back(std::move(g.input_projection));
    }
    for (auto& w : g.weights) result.grads.push_back(std::move(w));
  }
  return result;
}

std::vector<bool> ReluPattern(const CompatModel& model,
                              const GraphInputs& inputs,
                              const Eigen::MatrixXd& batch) {
  std::vector<bool> pattern;
  const ExtractOutput phi = Extract(model.extractor, batch, false, 0);
  for (const auto& bc : phi.cache.blocks) {
    for (Eigen::Index i = 0; i < bc.pre_relu.size(); ++i) {
      pattern.push_back(bc.pre_relu.data()[i] > 0.0);
    }
  }
  if (model.gcn) {
    const GcnOutput out =
        Forward(*model.gcn, *inputs.propagation, inputs.node_features);
    for (size_t l = 0; l + 1 < out.cache.pre_activations.size(); ++l) {
      const auto& z = out.cache.pre_activations[l];
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        pattern.push_back(z.data()[i] > 0.0);
      }
    }
  }
  return pattern;
}

}  // namespace czsl
