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

#ifndef CZSL_COMP_GRAPH_H_
#define CZSL_COMP_GRAPH_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "czsl/dataset.h"

namespace czsl {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Edge sets used by the graph-connection ablation, from no graph at all to the
// full state/object/composition graph plus external hierarchy edges. Each
// variant with a graph is an edge superset of the previous one.
enum class GraphVariant {
  kDirectEmbedding,         // (a) no graph; classifiers are averaged word vectors
  kPairEdgesNoSelfLoopOnY,  // (b) (s,y), (o,y); self-loops on primitives only
  kPairEdges,               // (c) (b) plus self-loops on compositions
  kFullCge,                 // (d) (c) plus (s,o)
  kFullCgePlusAux,          // (e) (d) plus auxiliary nodes/edges
};

// Accepts the ablation letters "a".."e" or the long names below.
GraphVariant ParseGraphVariant(std::string_view text);
std::string_view GraphVariantName(GraphVariant variant);
char GraphVariantLetter(GraphVariant variant);

// Extra nodes and undirected edges loaded from an auxiliary edge file.
struct AuxEdges {
  std::vector<std::string> new_nodes;
  std::vector<std::pair<std::string, std::string>> edges;
};

AuxEdges LoadAuxEdges(const std::filesystem::path& file);

// Nodes are ordered states, objects, compositions (seen, val-unseen,
// test-unseen), then auxiliary nodes.
struct CompGraph {
  GraphVariant variant = GraphVariant::kFullCge;
  int num_states = 0;
  int num_objects = 0;
  std::vector<Composition> compositions;
  std::vector<std::string> aux_nodes;
  SparseMatrix adjacency;  // symmetric 0/1
  Eigen::VectorXd degree;  // row sums of adjacency

  int num_nodes() const {
    return num_states + num_objects + num_compositions() + num_aux();
  }
  int num_compositions() const { return static_cast<int>(compositions.size()); }
  int num_aux() const { return static_cast<int>(aux_nodes.size()); }
  int StateNode(StateId s) const { return s.value; }
  int ObjectNode(ObjectId o) const { return num_states + o.value; }
  int first_composition_node() const { return num_states + num_objects; }
  int CompositionNode(int y) const { return first_composition_node() + y; }
  int AuxNode(int k) const {
    return first_composition_node() + num_compositions() + k;
  }
};

// Throws for kDirectEmbedding (no graph) and for kFullCgePlusAux without aux.
CompGraph BuildGraph(const SplitSpec& split, GraphVariant variant,
                     const AuxEdges* aux = nullptr);

// Human-readable node label, e.g. "state:old", "pair:old dog", "aux:animal".
std::string NodeName(const CompGraph& graph, const SplitSpec& split, int node);

// Row-normalized adjacency D^{-1} L, with its transpose kept for backprop.
struct PropagationMatrix {
  SparseMatrix matrix;
  SparseMatrix transpose;

  int size() const { return static_cast<int>(matrix.rows()); }
};

// `split`, when given, is used to name an offending zero-degree node.
PropagationMatrix Normalize(const CompGraph& graph,
                            const SplitSpec* split = nullptr);

// Builds a propagation matrix directly from a 0/1 adjacency (used in tests
// and for arbitrary graphs). Throws on zero-degree rows.
PropagationMatrix NormalizeAdjacency(const SparseMatrix& adjacency);

}  // namespace czsl

#endif  // CZSL_COMP_GRAPH_H_
