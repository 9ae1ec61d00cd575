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

#include "czsl/node_features.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "czsl/common.h"

namespace czsl {
namespace {

bool LooksLikeHeader(const std::vector<std::string>& fields) {
  if (fields.size() != 2) return false;
  for (const auto& f : fields) {
    if (f.empty()) return false;
    for (char c : f) {
      if (c < '0' || c > '9') return false;
    }
  }
  return true;
}

Eigen::VectorXd SeededUnitVector(std::string_view token, uint64_t seed,
                                 int dim) {
  std::mt19937_64 rng(MixSeed(HashString(token), seed));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  const double norm = v.norm();
  return norm > 0 ? Eigen::VectorXd(v / norm) : v;
}

}  // namespace

OovPolicy ParseOovPolicy(std::string_view text) {
  if (text == "error") return OovPolicy::kError;
  if (text == "seeded-random") return OovPolicy::kSeededRandom;
  throw Error("unknown OOV policy '" + std::string(text) + "'");
}

EmbeddingTable EmbeddingTable::Load(const std::filesystem::path& file) {
  const std::vector<std::string> lines = ReadLines(file);
  const std::string name = file.filename().string();
  Source source;
  source.name = name;
  size_t first = 0;
  int64_t declared_count = -1;
  if (!lines.empty()) {
    const std::vector<std::string> fields = SplitWhitespace(lines[0]);
    if (LooksLikeHeader(fields)) {
      declared_count = ParseInt(fields[0], name + ":1");
      source.dim = static_cast<int>(ParseInt(fields[1], name + ":1"));
      first = 1;
    }
  }
  for (size_t i = first; i < lines.size(); ++i) {
    const std::string where = name + ":" + std::to_string(i + 1);
    const std::vector<std::string> fields = SplitWhitespace(lines[i]);
    if (fields.empty()) continue;
    if (fields.size() < 2) throw Error(where + ": token without a vector");
    const int dim = static_cast<int>(fields.size()) - 1;
    if (source.dim == 0) source.dim = dim;
    if (dim != source.dim) {
      throw Error(where + ": inconsistent vector length " +
                  std::to_string(dim) + " (expected " +
                  std::to_string(source.dim) + ")");
    }
    Eigen::VectorXd v(dim);
    for (int j = 0; j < dim; ++j) {
      v[j] = ParseDouble(fields[j + 1], where);
      if (!std::isfinite(v[j])) throw Error(where + ": non-finite value");
    }
    const std::string token = NormalizeName(fields[0]);
    if (!source.vectors.emplace(token, std::move(v)).second) {
      throw Error(where + ": duplicate token '" + token + "'");
    }
  }
  if (source.vectors.empty()) throw Error(name + ": empty embedding file");
  if (declared_count >= 0 &&
      declared_count != static_cast<int64_t>(source.vectors.size())) {
    throw Error(name + ": header declares " + std::to_string(declared_count) +
                " vectors but file has " +
                std::to_string(source.vectors.size()));
  }
  return FromSource(std::move(source));
}

EmbeddingTable EmbeddingTable::FromSource(Source source) {
  for (const auto& [token, v] : source.vectors) {
    if (v.size() != source.dim) {
      throw Error("embedding source '" + source.name + "': token '" + token +
                  "' has wrong length");
    }
  }
  EmbeddingTable table;
  table.sources_.push_back(std::make_shared<const Source>(std::move(source)));
  return table;
}

EmbeddingTable EmbeddingTable::Concat(const std::vector<EmbeddingTable>& tables) {
  if (tables.empty()) throw Error("concat of zero embedding tables");
  EmbeddingTable out;
  out.oov_policy_ = tables.front().oov_policy_;
  out.oov_seed_ = tables.front().oov_seed_;
  for (const auto& table : tables) {
    out.sources_.insert(out.sources_.end(), table.sources_.begin(),
                        table.sources_.end());
  }
  return out;
}

int EmbeddingTable::dim() const {
  int total = 0;
  for (const auto& s : sources_) total += s->dim;
  return total;
}

Eigen::VectorXd EmbeddingTable::Lookup(std::string_view token) const {
  const std::string key = NormalizeName(token);
  Eigen::VectorXd out(dim());
  int offset = 0;
  for (const auto& s : sources_) {
    const auto it = s->vectors.find(key);
    if (it != s->vectors.end()) {
      out.segment(offset, s->dim) = it->second;
    } else if (oov_policy_ == OovPolicy::kSeededRandom) {
      out.segment(offset, s->dim) =
          SeededUnitVector(key, MixSeed(oov_seed_, HashString(s->name)), s->dim);
    } else {
      throw Error("token '" + key + "' missing from embedding source '" +
                  s->name + "'");
    }
    offset += s->dim;
  }
  return out;
}

void WriteEmbeddings(const EmbeddingTable::Source& source,
                     const std::filesystem::path& file) {
  std::vector<std::string> tokens;
  tokens.reserve(source.vectors.size());
  for (const auto& [token, v] : source.vectors) tokens.push_back(token);
  std::sort(tokens.begin(), tokens.end());
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  out << tokens.size() << ' ' << source.dim << '\n';
  for (const auto& token : tokens) {
    out << token;
    const Eigen::VectorXd& v = source.vectors.at(token);
    for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << FormatDouble(v[i]);
    out << '\n';
  }
  if (!out) throw Error("write failed: " + file.string());
}

Eigen::VectorXd EmbedName(const EmbeddingTable& table, std::string_view name) {
  const std::vector<std::string> tokens = SplitWhitespace(NormalizeName(name));
  if (tokens.empty()) throw Error("cannot embed an empty name");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(table.dim());
  for (const auto& token : tokens) sum += table.Lookup(token);
  return sum / static_cast<double>(tokens.size());
}

namespace {

void FillPrimitiveAndCompositionRows(const SplitSpec& split,
                                     const std::vector<Composition>& pairs,
                                     const EmbeddingTable& table,
                                     Eigen::MatrixXd* features) {
  const int num_states = static_cast<int>(split.states.size());
  const int num_objects = static_cast<int>(split.objects.size());
  for (int s = 0; s < num_states; ++s) {
    features->row(s) = EmbedName(table, split.states[s]).transpose();
  }
  for (int o = 0; o < num_objects; ++o) {
    features->row(num_states + o) = EmbedName(table, split.objects[o]).transpose();
  }
  for (size_t y = 0; y < pairs.size(); ++y) {
    const int row = num_states + num_objects + static_cast<int>(y);
    features->row(row) = 0.5 * (features->row(pairs[y].state.value) +
                                features->row(num_states + pairs[y].object.value));
  }
}

}  // namespace

Eigen::MatrixXd BuildNodeFeatures(const SplitSpec& split,
                                  const CompGraph& graph,
                                  const EmbeddingTable& table) {
  if (graph.num_states != static_cast<int>(split.states.size()) ||
      graph.num_objects != static_cast<int>(split.objects.size())) {
    throw Error("graph does not match split vocabularies");
  }
  Eigen::MatrixXd features(graph.num_nodes(), table.dim());
  FillPrimitiveAndCompositionRows(split, graph.compositions, table, &features);
  for (int a = 0; a < graph.num_aux(); ++a) {
    features.row(graph.AuxNode(a)) =
        EmbedName(table, graph.aux_nodes[a]).transpose();
  }
  return features;
}

Eigen::MatrixXd BuildNodeFeaturesNoGraph(const SplitSpec& split,
                                         const EmbeddingTable& table) {
  const std::vector<Composition> pairs = split.AllPairs();
  Eigen::MatrixXd features(
      static_cast<Eigen::Index>(split.states.size() + split.objects.size() +
                                pairs.size()),
      table.dim());
  FillPrimitiveAndCompositionRows(split, pairs, table, &features);
  return features;
}

}  // namespace czsl
