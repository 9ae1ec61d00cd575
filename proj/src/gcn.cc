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

#include <cmath>
#include <random>
#include <string>

#include "czsl/common.h"

namespace czsl {
namespace {

Eigen::MatrixXd GlorotUniform(int rows, int cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Eigen::MatrixXd m(rows, cols);
  // Fill row-major so the draw order matches the checkpoint layout.
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = dist(rng);
  }
  return m;
}

Eigen::MatrixXd Relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

Eigen::MatrixXd ReluMask(const Eigen::MatrixXd& z) {
  return (z.array() > 0.0).cast<double>().matrix();
}

void CheckFinite(const Eigen::MatrixXd& m, int layer) {
  if (!m.allFinite()) {
    throw Error("non-finite activation in GCN layer " + std::to_string(layer));
  }
}

}  // namespace

GcnMode ParseGcnMode(std::string_view text) {
  const std::string key = NormalizeName(text);
  if (key == "gcn") return GcnMode::kGcn;
  if (key == "gcnii") return GcnMode::kGcnii;
  throw Error("unknown GCN mode '" + std::string(text) + "'");
}

std::string_view GcnModeName(GcnMode mode) {
  return mode == GcnMode::kGcn ? "gcn" : "gcnii";
}

int GcnStack::input_width() const {
  if (mode == GcnMode::kGcnii) return static_cast<int>(input_projection.rows());
  return weights.empty() ? 0 : static_cast<int>(weights.front().rows());
}

int GcnStack::output_width() const {
  return weights.empty() ? 0 : static_cast<int>(weights.back().cols());
}

size_t GcnStack::num_parameters() const {
  size_t n = static_cast<size_t>(input_projection.size());
  for (const auto& w : weights) n += static_cast<size_t>(w.size());
  return n;
}

GcnStack InitGcn(std::span<const int> widths, int output_dim, GcnMode mode,
                 uint64_t seed, double alpha, double lambda) {
  for (int w : widths) {
    if (w <= 0) throw Error("GCN widths must be positive");
  }
  if (widths.back() != output_dim) {
    throw Error("GCN final width " + std::to_string(widths.back()) +
                " does not match feature dimension " +
                std::to_string(output_dim));
  }
  GcnStack stack;
  stack.mode = mode;
  stack.alpha = alpha;
  stack.lambda = lambda;
  std::mt19937_64 rng(seed);
  if (mode == GcnMode::kGcn) {
    if (widths.size() < 2) throw Error("GCN needs at least two widths");
    for (size_t l = 0; l + 1 < widths.size(); ++l) {
      stack.weights.push_back(GlorotUniform(widths[l], widths[l + 1], rng));
    }
    return stack;
  }

  if (widths.size() < 3) {
    throw Error("GCNII needs widths [P, U0, ..., d] with at least three entries");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0) || !(lambda > 0.0)) {
    throw Error("GCNII requires alpha in [0,1] and lambda > 0");
  }
  const int hidden = widths[1];
  for (size_t l = 1; l + 1 < widths.size(); ++l) {
    if (widths[l] != hidden) {
      throw Error("GCNII hidden widths must all equal " +
                  std::to_string(hidden));
    }
  }
  stack.input_projection = GlorotUniform(widths[0], hidden, rng);
  const int num_layers = static_cast<int>(widths.size()) - 2;
  for (int l = 1; l < num_layers; ++l) {
    stack.weights.push_back(GlorotUniform(hidden, hidden, rng));
    stack.betas.push_back(std::log(lambda / l + 1.0));
  }
  stack.weights.push_back(GlorotUniform(hidden, widths.back(), rng));
  return stack;
}

GcnOutput ForwardGcn(const GcnStack& stack, const PropagationMatrix& prop,
                     const Eigen::MatrixXd& features) {
  if (stack.mode != GcnMode::kGcn) throw Error("ForwardGcn on a GCNII stack");
  if (stack.weights.empty()) throw Error("empty GCN stack");
  if (features.rows() != prop.size()) {
    throw Error("node feature rows (" + std::to_string(features.rows()) +
                ") do not match graph size (" + std::to_string(prop.size()) +
                ")");
  }
  if (features.cols() != stack.input_width()) {
    throw Error("node feature width " + std::to_string(features.cols()) +
                " does not match GCN input width " +
                std::to_string(stack.input_width()));
  }
  GcnOutput out;
  out.cache.mode = GcnMode::kGcn;
  out.cache.features = features;
  Eigen::MatrixXd h = features;
  const int n = stack.num_layers();
  for (int l = 0; l < n; ++l) {
    Eigen::MatrixXd propagated = prop.matrix * h;
    Eigen::MatrixXd z = propagated * stack.weights[l];
    CheckFinite(z, l);
    h = (l + 1 < n) ? Relu(z) : z;
    out.cache.propagated.push_back(std::move(propagated));
    out.cache.pre_activations.push_back(std::move(z));
  }
  out.output = std::move(h);
  return out;
}

GcnOutput ForwardGcnii(const GcnStack& stack, const PropagationMatrix& prop,
                       const Eigen::MatrixXd& features) {
  if (stack.mode != GcnMode::kGcnii) throw Error("ForwardGcnii on a GCN stack");
  if (stack.weights.empty()) throw Error("empty GCN stack");
  if (features.rows() != prop.size()) {
    throw Error("node feature rows do not match graph size");
  }
  if (features.cols() != stack.input_projection.rows()) {
    throw Error("node feature width does not match GCNII input projection");
  }
  if (stack.betas.size() + 1 != stack.weights.size()) {
    throw Error("GCNII stack has inconsistent beta schedule");
  }
  GcnOutput out;
  out.cache.mode = GcnMode::kGcnii;
  out.cache.features = features;
  out.cache.initial = features * stack.input_projection;
  const Eigen::MatrixXd& h0 = out.cache.initial;
  const double alpha = stack.alpha;
  Eigen::MatrixXd h = h0;
  const int n = stack.num_layers();
  for (int l = 0; l < n; ++l) {
    Eigen::MatrixXd mixed = (1.0 - alpha) * (prop.matrix * h) + alpha * h0;
    Eigen::MatrixXd z;
    if (l + 1 < n) {
      const double beta = stack.betas[l];
      z = (1.0 - beta) * mixed + beta * (mixed * stack.weights[l]);
      CheckFinite(z, l);
      h = Relu(z);
    } else {
      z = mixed * stack.weights[l];
      CheckFinite(z, l);
      h = z;
    }
    out.cache.propagated.push_back(std::move(mixed));
    out.cache.pre_activations.push_back(std::move(z));
  }
  out.output = std::move(h);
  return out;
}

GcnOutput Forward(const GcnStack& stack, const PropagationMatrix& prop,
                  const Eigen::MatrixXd& features) {
  return stack.mode == GcnMode::kGcn ? ForwardGcn(stack, prop, features)
                                     : ForwardGcnii(stack, prop, features);
}

GcnGradients Backward(const GcnStack& stack, const PropagationMatrix& prop,
                      const GcnCache& cache,
                      const Eigen::MatrixXd& grad_output) {
  const int n = stack.num_layers();
  if (cache.mode != stack.mode ||
      static_cast<int>(cache.pre_activations.size()) != n ||
      static_cast<int>(cache.propagated.size()) != n) {
    throw Error("stale GCN cache: layer count or mode mismatch");
  }
  for (int l = 0; l < n; ++l) {
    if (cache.propagated[l].cols() != stack.weights[l].rows() ||
        cache.pre_activations[l].cols() != stack.weights[l].cols()) {
      throw Error("stale GCN cache: shape mismatch at layer " +
                  std::to_string(l));
    }
  }
  if (grad_output.rows() != cache.pre_activations.back().rows() ||
      grad_output.cols() != cache.pre_activations.back().cols()) {
    throw Error("upstream gradient shape does not match GCN output");
  }

  GcnGradients grads;
  grads.weights.resize(static_cast<size_t>(n));
  Eigen::MatrixXd grad_h = grad_output;

  if (stack.mode == GcnMode::kGcn) {
    for (int l = n - 1; l >= 0; --l) {
      Eigen::MatrixXd grad_z = grad_h;
      if (l + 1 < n) grad_z.array() *= ReluMask(cache.pre_activations[l]).array();
      grads.weights[l] = cache.propagated[l].transpose() * grad_z;
      grad_h = prop.transpose * (grad_z * stack.weights[l].transpose());
    }
    grads.features = std::move(grad_h);
    return grads;
  }

  const double alpha = stack.alpha;
  Eigen::MatrixXd grad_h0 =
      Eigen::MatrixXd::Zero(cache.initial.rows(), cache.initial.cols());
  for (int l = n - 1; l >= 0; --l) {
    Eigen::MatrixXd grad_z = grad_h;
    Eigen::MatrixXd grad_mixed;
    if (l + 1 < n) {
      const double beta = stack.betas[l];
      grad_z.array() *= ReluMask(cache.pre_activations[l]).array();
      grads.weights[l] = beta * (cache.propagated[l].transpose() * grad_z);
      grad_mixed = (1.0 - beta) * grad_z +
                   beta * (grad_z * stack.weights[l].transpose());
    } else {
      grads.weights[l] = cache.propagated[l].transpose() * grad_z;
      grad_mixed = grad_z * stack.weights[l].transpose();
    }
    grad_h0 += alpha * grad_mixed;
    grad_h = (1.0 - alpha) * (prop.transpose * grad_mixed);
  }
  grad_h0 += grad_h;
  grads.input_projection = cache.features.transpose() * grad_h0;
  grads.features = grad_h0 * stack.input_projection.transpose();
  return grads;
}

}  // namespace czsl
