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

#ifndef CZSL_GCN_H_
#define CZSL_GCN_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "czsl/comp_graph.h"

namespace czsl {

enum class GcnMode { kGcn, kGcnii };

GcnMode ParseGcnMode(std::string_view text);
std::string_view GcnModeName(GcnMode mode);

// Graph convolution stack mapping node features to classifier rows.
//
// GCN mode: H0 = E, H_{l+1} = ReLU(P H_l W_l), no ReLU on the last layer.
//
// GCNII mode: H0 = E * input_projection. Layers 1..N-1 compute
//   H_l = ReLU(((1 - alpha) P H_{l-1} + alpha H0) ((1 - beta_l) I + beta_l W_l))
// with square U0 x U0 weights. The last layer maps to the output width with
// the same initial-residual input but a plain weight and no ReLU.
struct GcnStack {
  GcnMode mode = GcnMode::kGcn;
  std::vector<Eigen::MatrixXd> weights;
  Eigen::MatrixXd input_projection;  // GCNII only
  double alpha = 0.1;
  double lambda = 0.5;
  // beta for each identity-mapped GCNII layer, ln(lambda / l + 1).
  std::vector<double> betas;

  int num_layers() const { return static_cast<int>(weights.size()); }
  int input_width() const;
  int output_width() const;
  size_t num_parameters() const;
};

// GCN: widths = [P, h1, ..., d], one layer per consecutive pair.
// GCNII: widths = [P, U0, ..., U0, d]; input projection P x U0, then
// widths.size() - 2 layers, all hidden widths equal to U0.
// Weights are Glorot-uniform, deterministic in `seed`.
GcnStack InitGcn(std::span<const int> widths, int output_dim, GcnMode mode,
                 uint64_t seed, double alpha = 0.1, double lambda = 0.5);

struct GcnCache {
  GcnMode mode = GcnMode::kGcn;
  Eigen::MatrixXd features;                  // E
  Eigen::MatrixXd initial;                   // H0 (GCNII)
  std::vector<Eigen::MatrixXd> propagated;   // P H or the residual mix S
  std::vector<Eigen::MatrixXd> pre_activations;
};

struct GcnOutput {
  Eigen::MatrixXd output;  // K x d
  GcnCache cache;
};

struct GcnGradients {
  std::vector<Eigen::MatrixXd> weights;
  Eigen::MatrixXd input_projection;
  Eigen::MatrixXd features;  // dLoss/dE
};

GcnOutput ForwardGcn(const GcnStack& stack, const PropagationMatrix& prop,
                     const Eigen::MatrixXd& features);
GcnOutput ForwardGcnii(const GcnStack& stack, const PropagationMatrix& prop,
                       const Eigen::MatrixXd& features);
// Dispatches on stack.mode.
GcnOutput Forward(const GcnStack& stack, const PropagationMatrix& prop,
                  const Eigen::MatrixXd& features);

GcnGradients Backward(const GcnStack& stack, const PropagationMatrix& prop,
                      const GcnCache& cache,
                      const Eigen::MatrixXd& grad_output);

}  // namespace czsl

#endif  // CZSL_GCN_H_
