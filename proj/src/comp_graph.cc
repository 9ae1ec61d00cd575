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

#include "czsl/comp_graph.h"

#include <algorithm>
#include <map>
#include <optional>

#include "czsl/common.h"

namespace czsl {
namespace {

struct VariantInfo {
  GraphVariant variant;
  char letter;
  const char* name;
};

constexpr VariantInfo kVariants[] = {
    {GraphVariant::kDirectEmbedding, 'a', "direct-embedding"},
    {GraphVariant::kPairEdgesNoSelfLoopOnY, 'b', "pair-edges-no-self-loop-y"},
    {GraphVariant::kPairEdges, 'c', "pair-edges"},
    {GraphVariant::kFullCge, 'd', "full"},
    {GraphVariant::kFullCgePlusAux, 'e', "full-aux"},
};

}  // namespace

GraphVariant ParseGraphVariant(std::string_view text) {
  const std::string key = NormalizeName(text);
  for (const auto& info : kVariants) {
    if (key.size() == 1 && key[0] == info.letter) return info.variant;
    if (key == info.name) return info.variant;
  }
  throw Error("unknown graph variant '" + std::string(text) + "'");
}

std::string_view GraphVariantName(GraphVariant variant) {
  for (const auto& info : kVariants) {
    if (info.variant == variant) return info.name;
  }
  return "unknown";
}

char GraphVariantLetter(GraphVariant variant) {
  for (const auto& info : kVariants) {
    if (info.variant == variant) return info.letter;
  }
  return '?';
}

AuxEdges LoadAuxEdges(const std::filesystem::path& file) {
  const std::vector<std::string> lines = ReadLines(file);
  AuxEdges aux;
  const std::string name = file.filename().string();
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string where = name + ":" + std::to_string(i + 1);
    if (Trim(lines[i]).empty()) continue;
    const std::vector<std::string> fields = SplitString(lines[i], '\t');
    if (fields.size() != 2) {
      throw Error(where + ": expected two tab-separated fields");
    }
    if (fields[0] == "#node") {
      const std::string node = NormalizeName(fields[1]);
      if (node.empty()) throw Error(where + ": empty node name");
      if (std::find(aux.new_nodes.begin(), aux.new_nodes.end(), node) !=
          aux.new_nodes.end()) {
        throw Error(where + ": node '" + node + "' declared twice");
      }
      aux.new_nodes.push_back(node);
      continue;
    }
    const std::string a = NormalizeName(fields[0]);
    const std::string b = NormalizeName(fields[1]);
    if (a.empty() || b.empty()) throw Error(where + ": empty endpoint");
    aux.edges.emplace_back(a, b);
  }
  return aux;
}

CompGraph BuildGraph(const SplitSpec& split, GraphVariant variant,
                     const AuxEdges* aux) {
  if (variant == GraphVariant::kDirectEmbedding) {
    throw Error("BuildGraph: the direct-embedding variant has no graph");
  }
  if (variant == GraphVariant::kFullCgePlusAux && aux == nullptr) {
    throw Error("BuildGraph: variant e requires an auxiliary edge file");
  }
  CompGraph graph;
  graph.variant = variant;
  graph.num_states = static_cast<int>(split.states.size());
  graph.num_objects = static_cast<int>(split.objects.size());
  graph.compositions = split.AllPairs();
  if (variant == GraphVariant::kFullCgePlusAux) {
    graph.aux_nodes = aux->new_nodes;
  }
  const int k = graph.num_nodes();

  std::vector<std::pair<int, int>> entries;
  auto connect = [&entries](int i, int j) {
    entries.emplace_back(i, j);
    if (i != j) entries.emplace_back(j, i);
  };

  for (int i = 0; i < graph.num_states + graph.num_objects; ++i) connect(i, i);
  const bool composition_self_loops =
      variant != GraphVariant::kPairEdgesNoSelfLoopOnY;
  const bool state_object_edges = variant == GraphVariant::kFullCge ||
                                  variant == GraphVariant::kFullCgePlusAux;
  for (int y = 0; y < graph.num_compositions(); ++y) {
    const Composition& pair = graph.compositions[y];
    const int s = graph.StateNode(pair.state);
    const int o = graph.ObjectNode(pair.object);
    const int node = graph.CompositionNode(y);
    connect(s, node);
    connect(o, node);
    if (composition_self_loops) connect(node, node);
    if (state_object_edges) connect(s, o);
  }

  if (variant == GraphVariant::kFullCgePlusAux) {
    for (int a = 0; a < graph.num_aux(); ++a) {
      connect(graph.AuxNode(a), graph.AuxNode(a));
    }
    auto resolve = [&](const std::string& name) -> int {
      const auto aux_it =
          std::find(graph.aux_nodes.begin(), graph.aux_nodes.end(), name);
      if (aux_it != graph.aux_nodes.end()) {
        return graph.AuxNode(static_cast<int>(aux_it - graph.aux_nodes.begin()));
      }
      const auto state = split.FindState(name);
      const auto object = split.FindObject(name);
      if (state && object) {
        throw Error("aux edge endpoint '" + name +
                    "' is ambiguous (both a state and an object)");
      }
      if (state) return graph.StateNode(*state);
      if (object) return graph.ObjectNode(*object);
      throw Error("aux edge references unknown node '" + name +
                  "' (declare it with #node)");
    };
    for (const auto& [a, b] : aux->edges) connect(resolve(a), resolve(b));
  }

  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(entries.size());
  for (const auto& [i, j] : entries) triplets.emplace_back(i, j, 1.0);
  graph.adjacency.resize(k, k);
  graph.adjacency.setFromTriplets(triplets.begin(), triplets.end());
  graph.adjacency.makeCompressed();

  graph.degree = Eigen::VectorXd::Zero(k);
  for (int row = 0; row < k; ++row) {
    for (SparseMatrix::InnerIterator it(graph.adjacency, row); it; ++it) {
      graph.degree[row] += it.value();
    }
  }
  return graph;
}

std::string NodeName(const CompGraph& graph, const SplitSpec& split, int node) {
  if (node < 0 || node >= graph.num_nodes()) {
    return "node#" + std::to_string(node);
  }
  if (node < graph.num_states) return "state:" + split.states.at(node);
  if (node < graph.first_composition_node()) {
    return "object:" + split.objects.at(node - graph.num_states);
  }
  const int y = node - graph.first_composition_node();
  if (y < graph.num_compositions()) {
    const Composition& pair = graph.compositions[y];
    return "pair:" + split.StateName(pair.state) + " " +
           split.ObjectName(pair.object);
  }
  return "aux:" + graph.aux_nodes.at(y - graph.num_compositions());
}

PropagationMatrix NormalizeAdjacency(const SparseMatrix& adjacency) {
  if (adjacency.rows() != adjacency.cols()) {
    throw Error("adjacency matrix must be square");
  }
  PropagationMatrix prop;
  prop.matrix = adjacency;
  for (Eigen::Index row = 0; row < prop.matrix.outerSize(); ++row) {
    double degree = 0.0;
    for (SparseMatrix::InnerIterator it(prop.matrix, row); it; ++it) {
      degree += it.value();
    }
    if (degree <= 0.0) {
      throw Error("zero-degree row at node " + std::to_string(row));
    }
    for (SparseMatrix::InnerIterator it(prop.matrix, row); it; ++it) {
      it.valueRef() /= degree;
    }
  }
  prop.matrix.makeCompressed();
  prop.transpose = prop.matrix.transpose();
  prop.transpose.makeCompressed();
  return prop;
}

PropagationMatrix Normalize(const CompGraph& graph, const SplitSpec* split) {
  for (int i = 0; i < graph.num_nodes(); ++i) {
    if (graph.degree[i] <= 0.0) {
      throw Error("zero-degree node " +
                  (split ? NodeName(graph, *split, i) : std::to_string(i)));
    }
  }
  return NormalizeAdjacency(graph.adjacency);
}

}  // namespace czsl
