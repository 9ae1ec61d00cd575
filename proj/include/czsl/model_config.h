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

#ifndef CZSL_MODEL_CONFIG_H_
#define CZSL_MODEL_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "czsl/comp_graph.h"
#include "czsl/compat_model.h"
#include "czsl/gcn.h"

namespace czsl {

// key=value model description. Keys:
//   extractor.variant   identity | mlp3
//   extractor.widths    h1,h2,d  (input width comes from the data)
//   extractor.dropout   p in [0,1)
//   gcn.mode            gcn | gcnii
//   gcn.widths          hidden widths between P and d (GCNII: U0 repeated N times)
//   gcn.alpha, gcn.lambda
//   graph.variant       a..e or the long variant names
//   embeddings.sources  comma list of word-vector files
struct ModelConfig {
  FeatureExtractor::Kind extractor_kind = FeatureExtractor::Kind::kMlp3;
  std::vector<int> extractor_widths = {1024, 768, 512};
  double extractor_dropout = 0.0;
  GcnMode gcn_mode = GcnMode::kGcn;
  std::vector<int> gcn_widths = {4096};
  double gcn_alpha = 0.1;
  double gcn_lambda = 0.5;
  GraphVariant graph_variant = GraphVariant::kFullCge;
  std::vector<std::string> embedding_sources = {"embeddings.txt"};

  static ModelConfig Parse(const std::string& text);
  static ModelConfig Load(const std::filesystem::path& file);
  // Canonical text; Parse(ToText()) reproduces the config.
  std::string ToText() const;
};

// Builds an initialized model. `input_width` is the sample feature width and
// `embedding_width` the node feature width P. The direct-embedding variant
// gets no GCN and an extractor whose output width is forced to P.
CompatModel BuildModel(const ModelConfig& config, int input_width,
                       int embedding_width, uint64_t seed);

// Binary checkpoint, little-endian:
//   "CZSLCKPT" | u32 version | u32 len + config text | u32 input_width |
//   u32 embedding_width | u32 tensor count | per tensor:
//   u32 name len + name | u64 rows | u64 cols | rows*cols f64 row-major
struct Checkpoint {
  ModelConfig config;
  int input_width = 0;
  int embedding_width = 0;
  CompatModel model;
};

inline constexpr uint32_t kCheckpointVersion = 1;

void SaveCheckpoint(const std::filesystem::path& file, const ModelConfig& config,
                    int input_width, int embedding_width,
                    const CompatModel& model);
Checkpoint LoadCheckpoint(const std::filesystem::path& file);

}  // namespace czsl

#endif  // CZSL_MODEL_CONFIG_H_
