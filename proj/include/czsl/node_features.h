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

#ifndef CZSL_NODE_FEATURES_H_
#define CZSL_NODE_FEATURES_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "czsl/comp_graph.h"
#include "czsl/dataset.h"

namespace czsl {

// What to do when a token is missing from every source.
enum class OovPolicy {
  kError,
  // Deterministic unit-norm vector derived from the token and a seed.
  kSeededRandom,
};

OovPolicy ParseOovPolicy(std::string_view text);

// Word vectors from one or more sources. With several sources a lookup
// concatenates the per-source vectors in source order.
class EmbeddingTable {
 public:
  struct Source {
    std::string name;
    int dim = 0;
    std::unordered_map<std::string, Eigen::VectorXd> vectors;
  };

  EmbeddingTable() = default;

  // Reads "<token> <f1> ... <fP>" lines, with an optional "count dim" header.
  static EmbeddingTable Load(const std::filesystem::path& file);
  static EmbeddingTable FromSource(Source source);
  static EmbeddingTable Concat(const std::vector<EmbeddingTable>& tables);

  int dim() const;
  size_t num_sources() const { return sources_.size(); }
  const Source& source(size_t i) const { return *sources_.at(i); }

  // Throws naming the first source that lacks `token` (unless the OOV
  // policy supplies a fallback).
  Eigen::VectorXd Lookup(std::string_view token) const;

  void set_oov_policy(OovPolicy policy, uint64_t seed) {
    oov_policy_ = policy;
    oov_seed_ = seed;
  }

 private:
  std::vector<std::shared_ptr<const Source>> sources_;
  OovPolicy oov_policy_ = OovPolicy::kError;
  uint64_t oov_seed_ = 0;
};

void WriteEmbeddings(const EmbeddingTable::Source& source,
                     const std::filesystem::path& file);

// Single-word names map to their vector; multi-word names to the mean of the
// token vectors.
Eigen::VectorXd EmbedName(const EmbeddingTable& table, std::string_view name);

// K x P node feature matrix in graph node order. Composition rows are the mean
// of their state and object rows.
Eigen::MatrixXd BuildNodeFeatures(const SplitSpec& split,
                                  const CompGraph& graph,
                                  const EmbeddingTable& table);

// Same layout for the direct-embedding variant, which has no graph: states,
// objects, then every composition in SplitSpec::AllPairs() order.
Eigen::MatrixXd BuildNodeFeaturesNoGraph(const SplitSpec& split,
                                         const EmbeddingTable& table);

}  // namespace czsl

#endif  // CZSL_NODE_FEATURES_H_
