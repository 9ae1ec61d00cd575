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

#ifndef CZSL_SYNTHGEN_H_
#define CZSL_SYNTHGEN_H_

#include <cstdint>
#include <filesystem>
#include <memory>

#include "czsl/dataset.h"
#include "czsl/node_features.h"

namespace czsl {

struct SynthConfig {
  int n_states = 8;
  int n_objects = 8;
  double seen_fraction = 0.625;
  int val_unseen = 6;
  int test_unseen = 6;
  int samples_per_pair = 10;
  int latent_dim = 8;
  int feature_dim = 32;
  double noise_sigma = 0.05;
  double embed_noise_sigma = 0.0;
  uint64_t seed = 0;

  int num_seen_pairs() const;
  void Validate() const;
};

struct SynthData {
  std::shared_ptr<const SplitSpec> split;
  Dataset train;
  Dataset val;
  Dataset test;
  EmbeddingTable::Source embeddings;  // tokens "s<i>", "o<j>"
};

// Prototype-based compositional generator. A sample of pair (s, o) is
//   tanh(M [a_s; b_o; a_s * b_o]) + N(0, noise_sigma^2)
// with unit-Gaussian prototypes a_s, b_o and a fixed random map M. Word
// vectors are the prototypes plus N(0, embed_noise_sigma^2). Every state and
// object occurs in at least one seen pair.
SynthData GenerateSynthetic(const SynthConfig& config);

// Writes the split directory files, {train,val,test}_features.txt and
// embeddings.txt. Refuses to overwrite existing files unless `force`.
void WriteSynthetic(const SynthData& data, const std::filesystem::path& dir,
                    bool force);

}  // namespace czsl

#endif  // CZSL_SYNTHGEN_H_
