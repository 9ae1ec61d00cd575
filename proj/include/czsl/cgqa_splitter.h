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

#ifndef CZSL_CGQA_SPLITTER_H_
#define CZSL_CGQA_SPLITTER_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "czsl/dataset.h"

namespace czsl {

// Curation of a compositional split from scene-graph annotations: filter
// boxes, build vocabularies, then partition scene graphs into
// train/val/test with disjoint novel compositions.

struct BoxRecord {
  std::string image_id;
  int width = 0;
  int height = 0;
  std::string object;
  std::vector<std::string> states;
  int relation_count = 0;
};

enum class SourcePartition { kTrain, kTest };

struct SceneGraphRecord {
  std::string graph_id;
  SourcePartition source = SourcePartition::kTrain;
  std::vector<BoxRecord> boxes;
};

struct CurationConfig {
  int min_box = 112;
  double train_graph_fraction_moved = 0.20;
  double val_prob = 0.45;
  double test_prob = 0.55;
  // Probability that a remaining (non-novel) val/test pair becomes unseen.
  double unseen_division = 0.5;
  std::map<std::string, std::string> synonym_map;
  uint64_t seed = 0;

  void Validate() const;
};

// Lines "graph_id\tsource_partition\timage_id\tw\th\tobject\tstates\trelation_count",
// one box per line; boxes of one graph are grouped in first-seen order.
std::vector<SceneGraphRecord> LoadSceneGraphs(const std::filesystem::path& file);
void WriteSceneGraphs(const std::vector<SceneGraphRecord>& records,
                      const std::filesystem::path& file);

// Lines "variant\tcanonical".
std::map<std::string, std::string> LoadSynonymMap(
    const std::filesystem::path& file);

// Keeps boxes with one relation, exactly one state, and both sides >= min_box.
std::vector<SceneGraphRecord> FilterBoxes(
    const std::vector<SceneGraphRecord>& records, const CurationConfig& config);

struct VocabChange {
  enum class Kind { kSynonym, kPlural, kOverlap };
  Kind kind;
  std::string vocabulary;  // "state" or "object"
  std::string from;
  std::string to;  // empty for removals
};

struct VocabResult {
  std::vector<std::string> states;   // sorted
  std::vector<std::string> objects;  // sorted
  std::vector<VocabChange> report;
  // Records with canonical names; boxes using removed tokens are dropped.
  std::vector<SceneGraphRecord> records;
};

// Applies the synonym map, folds plurals (strip a trailing "s" when the
// singular is in the same vocabulary) and removes tokens that are both a
// state and an object.
VocabResult BuildVocab(const std::vector<SceneGraphRecord>& filtered,
                       const std::map<std::string, std::string>& synonym_map);

std::string FormatVocabReport(const std::vector<VocabChange>& report);

struct LabeledBox {
  std::string graph_id;
  std::string image_id;
  Composition pair;
};

struct PartitionResult {
  SplitSpec split;
  std::vector<LabeledBox> train_boxes;
  std::vector<LabeledBox> val_boxes;
  std::vector<LabeledBox> test_boxes;
};

// Source-test graphs go to val/test by a seeded Bernoulli(val_prob); a seeded
// fraction of source-train graphs is moved and split the same way. Novel
// pairs of each side become unseen, remaining pairs are divided at random,
// and unseen pairs are removed from the seen set. Throws if either unseen set
// ends up empty.
PartitionResult Partition(const VocabResult& vocab, const CurationConfig& config);

// Distinct val/test-side pairs absent from the remaining training graphs,
// before the random division.
size_t CountCandidateNovelPairs(const VocabResult& vocab,
                                const CurationConfig& config);

// Writes the split directory. Refuses to overwrite existing split files
// unless `force`. The split must validate.
void EmitSplits(const SplitSpec& split, const std::filesystem::path& dir,
                bool force);

// Lines "graph_id\timage_id\tstate\tobject".
void WriteBoxList(const std::vector<LabeledBox>& boxes, const SplitSpec& split,
                  const std::filesystem::path& file);

}  // namespace czsl

#endif  // CZSL_CGQA_SPLITTER_H_
