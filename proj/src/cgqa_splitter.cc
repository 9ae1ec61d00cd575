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

#include "czsl/cgqa_splitter.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "czsl/common.h"

namespace czsl {
namespace {

enum class Side { kTrain, kVal, kTest };

// Per-graph uniform draw that does not depend on which other graphs exist.
double GraphUniform(uint64_t seed, const std::string& graph_id, uint64_t salt) {
  std::mt19937_64 rng(MixSeed(MixSeed(seed, salt), HashString(graph_id)));
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Assigns every graph to a side. Source-train graphs are ranked by a seeded
// key and the first round(fraction * n) are moved, so a larger fraction moves
// a superset of graphs.
std::map<std::string, Side> AssignSides(
    const std::vector<SceneGraphRecord>& records, const CurationConfig& config) {
  std::vector<std::pair<uint64_t, std::string>> train_keys;
  std::map<std::string, Side> sides;
  for (const auto& g : records) {
    if (g.source == SourcePartition::kTest) {
      sides[g.graph_id] = GraphUniform(config.seed, g.graph_id, 1) < config.val_prob
                              ? Side::kVal
                              : Side::kTest;
    } else {
      train_keys.emplace_back(MixSeed(MixSeed(config.seed, 2), HashString(g.graph_id)),
                              g.graph_id);
      sides[g.graph_id] = Side::kTrain;
    }
  }
  std::sort(train_keys.begin(), train_keys.end());
  const size_t moved = static_cast<size_t>(std::lround(
      config.train_graph_fraction_moved * static_cast<double>(train_keys.size())));
  for (size_t i = 0; i < moved && i < train_keys.size(); ++i) {
    const std::string& id = train_keys[i].second;
    sides[id] = GraphUniform(config.seed, id, 1) < config.val_prob ? Side::kVal
                                                                   : Side::kTest;
  }
  return sides;
}

struct SideBoxes {
  std::vector<LabeledBox> train, val, test;
};

SideBoxes CollectBoxes(const VocabResult& vocab,
                       const std::map<std::string, Side>& sides) {
  std::unordered_map<std::string, int> state_index, object_index;
  for (size_t i = 0; i < vocab.states.size(); ++i) {
    state_index[vocab.states[i]] = static_cast<int>(i);
  }
  for (size_t i = 0; i < vocab.objects.size(); ++i) {
    object_index[vocab.objects[i]] = static_cast<int>(i);
  }
  SideBoxes out;
  std::vector<const SceneGraphRecord*> ordered;
  for (const auto& g : vocab.records) ordered.push_back(&g);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto* a, const auto* b) { return a->graph_id < b->graph_id; });
  for (const auto* g : ordered) {
    const Side side = sides.at(g->graph_id);
    for (const auto& box : g->boxes) {
      LabeledBox labeled;
      labeled.graph_id = g->graph_id;
      labeled.image_id = box.image_id;
      labeled.pair = {StateId{state_index.at(box.states.front())},
                      ObjectId{object_index.at(box.object)}};
      (side == Side::kTrain  ? out.train
       : side == Side::kVal ? out.val
                            : out.test)
          .push_back(std::move(labeled));
    }
  }
  return out;
}

std::set<Composition> PairsOf(const std::vector<LabeledBox>& boxes) {
  std::set<Composition> pairs;
  for (const auto& b : boxes) pairs.insert(b.pair);
  return pairs;
}

std::string VocabKindName(VocabChange::Kind kind) {
  switch (kind) {
    case VocabChange::Kind::kSynonym:
      return "synonym";
    case VocabChange::Kind::kPlural:
      return "plural";
    case VocabChange::Kind::kOverlap:
      return "overlap";
  }
  return "unknown";
}

}  // namespace

void CurationConfig::Validate() const {
  if (min_box < 0) throw Error("min_box must be non-negative");
  if (!(train_graph_fraction_moved > 0.0 && train_graph_fraction_moved < 1.0)) {
    throw Error("train_graph_fraction_moved must be in (0, 1)");
  }
  if (val_prob < 0.0 || test_prob < 0.0 ||
      std::abs(val_prob + test_prob - 1.0) > 1e-12) {
    throw Error("val_prob + test_prob must equal 1");
  }
  if (!(unseen_division >= 0.0 && unseen_division <= 1.0)) {
    throw Error("unseen_division must be in [0, 1]");
  }
}

std::vector<SceneGraphRecord> LoadSceneGraphs(const std::filesystem::path& file) {
  const std::vector<std::string> lines = ReadLines(file);
  const std::string name = file.filename().string();
  std::vector<SceneGraphRecord> records;
  std::unordered_map<std::string, size_t> index;
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string where = name + ":" + std::to_string(i + 1);
    if (Trim(lines[i]).empty()) continue;
    const std::vector<std::string> f = SplitString(lines[i], '\t');
    if (f.size() != 8) throw Error(where + ": expected 8 tab-separated fields");
    SourcePartition source;
    if (f[1] == "train") {
      source = SourcePartition::kTrain;
    } else if (f[1] == "test") {
      source = SourcePartition::kTest;
    } else {
      throw Error(where + ": source partition must be train or test");
    }
    BoxRecord box;
    box.image_id = f[2];
    box.width = static_cast<int>(ParseInt(f[3], where));
    box.height = static_cast<int>(ParseInt(f[4], where));
    if (box.width <= 0 || box.height <= 0) {
      throw Error(where + ": box width and height must be positive");
    }
    box.object = f[5];
    for (const auto& s : SplitString(f[6], ',')) {
      if (!Trim(s).empty()) box.states.emplace_back(Trim(s));
    }
    box.relation_count = static_cast<int>(ParseInt(f[7], where));
    auto [it, inserted] = index.emplace(f[0], records.size());
    if (inserted) {
      records.push_back({f[0], source, {}});
    } else if (records[it->second].source != source) {
      throw Error(where + ": graph '" + f[0] +
                  "' appears in both source partitions");
    }
    records[it->second].boxes.push_back(std::move(box));
  }
  return records;
}

void WriteSceneGraphs(const std::vector<SceneGraphRecord>& records,
                      const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  for (const auto& g : records) {
    for (const auto& b : g.boxes) {
      out << g.graph_id << '\t'
          << (g.source == SourcePartition::kTrain ? "train" : "test") << '\t'
          << b.image_id << '\t' << b.width << '\t' << b.height << '\t'
          << b.object << '\t';
      for (size_t i = 0; i < b.states.size(); ++i) {
        if (i) out << ',';
        out << b.states[i];
      }
      out << '\t' << b.relation_count << '\n';
    }
  }
}

std::map<std::string, std::string> LoadSynonymMap(
    const std::filesystem::path& file) {
  std::map<std::string, std::string> map;
  const std::vector<std::string> lines = ReadLines(file);
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string where =
        file.filename().string() + ":" + std::to_string(i + 1);
    if (Trim(lines[i]).empty()) continue;
    const std::vector<std::string> f = SplitString(lines[i], '\t');
    if (f.size() != 2) throw Error(where + ": expected 'variant\\tcanonical'");
    map[NormalizeName(f[0])] = NormalizeName(f[1]);
  }
  return map;
}

std::vector<SceneGraphRecord> FilterBoxes(
    const std::vector<SceneGraphRecord>& records, const CurationConfig& config) {
  std::vector<SceneGraphRecord> out;
  out.reserve(records.size());
  for (const auto& g : records) {
    SceneGraphRecord kept{g.graph_id, g.source, {}};
    for (const auto& box : g.boxes) {
      if (box.relation_count == 1 && box.states.size() == 1 &&
          box.width >= config.min_box && box.height >= config.min_box) {
        kept.boxes.push_back(box);
      }
    }
    out.push_back(std::move(kept));
  }
  return out;
}

VocabResult BuildVocab(const std::vector<SceneGraphRecord>& filtered,
                       const std::map<std::string, std::string>& synonym_map) {
  VocabResult result;
  std::set<std::pair<std::string, std::string>> reported_synonyms;
  auto canonical = [&](const std::string& raw, const char* vocabulary) {
    std::string token = NormalizeName(raw);
    const auto it = synonym_map.find(token);
    if (it != synonym_map.end() && it->second != token) {
      if (reported_synonyms.emplace(vocabulary, token).second) {
        result.report.push_back(
            {VocabChange::Kind::kSynonym, vocabulary, token, it->second});
      }
      token = it->second;
    }
    return token;
  };

  result.records = filtered;
  std::set<std::string> states, objects;
  for (auto& g : result.records) {
    for (auto& box : g.boxes) {
      box.object = canonical(box.object, "object");
      for (auto& s : box.states) s = canonical(s, "state");
      objects.insert(box.object);
      if (!box.states.empty()) states.insert(box.states.front());
    }
  }

  auto fold_plurals = [&](std::set<std::string>& vocab, const char* vocabulary) {
    std::map<std::string, std::string> folds;
    for (const auto& token : vocab) {
      if (token.size() > 1 && token.back() == 's' &&
          vocab.count(token.substr(0, token.size() - 1))) {
        folds[token] = token.substr(0, token.size() - 1);
      }
    }
    for (const auto& [from, to] : folds) {
      vocab.erase(from);
      result.report.push_back({VocabChange::Kind::kPlural, vocabulary, from, to});
    }
    return folds;
  };
  const auto state_folds = fold_plurals(states, "state");
  const auto object_folds = fold_plurals(objects, "object");

  std::set<std::string> overlap;
  std::set_intersection(states.begin(), states.end(), objects.begin(),
                        objects.end(), std::inserter(overlap, overlap.begin()));
  for (const auto& token : overlap) {
    states.erase(token);
    objects.erase(token);
    result.report.push_back({VocabChange::Kind::kOverlap, "state", token, ""});
    result.report.push_back({VocabChange::Kind::kOverlap, "object", token, ""});
  }

  for (auto& g : result.records) {
    std::vector<BoxRecord> kept;
    for (auto& box : g.boxes) {
      if (box.states.empty()) continue;
      if (const auto it = object_folds.find(box.object); it != object_folds.end()) {
        box.object = it->second;
      }
      std::string& state = box.states.front();
      if (const auto it = state_folds.find(state); it != state_folds.end()) {
        state = it->second;
      }
      if (states.count(state) && objects.count(box.object)) {
        kept.push_back(std::move(box));
      }
    }
    g.boxes = std::move(kept);
  }
  result.states.assign(states.begin(), states.end());
  result.objects.assign(objects.begin(), objects.end());
  return result;
}

std::string FormatVocabReport(const std::vector<VocabChange>& report) {
  std::ostringstream out;
  for (const auto& change : report) {
    out << VocabKindName(change.kind) << '\t' << change.vocabulary << '\t'
        << change.from << '\t' << change.to << '\n';
  }
  return out.str();
}

size_t CountCandidateNovelPairs(const VocabResult& vocab,
                                const CurationConfig& config) {
  config.Validate();
  const SideBoxes boxes = CollectBoxes(vocab, AssignSides(vocab.records, config));
  const std::set<Composition> train = PairsOf(boxes.train);
  std::set<Composition> novel;
  for (const auto* side : {&boxes.val, &boxes.test}) {
    for (const auto& b : *side) {
      if (!train.count(b.pair)) novel.insert(b.pair);
    }
  }
  return novel.size();
}

PartitionResult Partition(const VocabResult& vocab, const CurationConfig& config) {
  config.Validate();
  const SideBoxes boxes = CollectBoxes(vocab, AssignSides(vocab.records, config));
  const std::set<Composition> train_pairs = PairsOf(boxes.train);
  const std::set<Composition> val_pairs = PairsOf(boxes.val);
  const std::set<Composition> test_pairs = PairsOf(boxes.test);

  std::mt19937_64 rng(MixSeed(config.seed, 3));
  std::bernoulli_distribution to_unseen(config.unseen_division);

  std::set<Composition> val_unseen;
  std::vector<Composition> val_remaining;
  for (const auto& p : val_pairs) {
    if (!train_pairs.count(p)) {
      val_unseen.insert(p);
    } else {
      val_remaining.push_back(p);
    }
  }
  for (const auto& p : val_remaining) {
    if (to_unseen(rng)) val_unseen.insert(p);
  }

  std::set<Composition> test_unseen;
  std::vector<Composition> test_remaining;
  for (const auto& p : test_pairs) {
    if (val_unseen.count(p)) continue;
    if (!train_pairs.count(p)) {
      test_unseen.insert(p);
    } else {
      test_remaining.push_back(p);
    }
  }
  for (const auto& p : test_remaining) {
    if (to_unseen(rng)) test_unseen.insert(p);
  }

  if (val_unseen.empty() || test_unseen.empty()) {
    throw Error("partition produced an empty unseen set (val " +
                std::to_string(val_unseen.size()) + ", test " +
                std::to_string(test_unseen.size()) +
                "); adjust the configuration or provide more scene graphs");
  }

  PartitionResult result;
  SplitSpec& split = result.split;
  split.states = vocab.states;
  split.objects = vocab.objects;
  for (const auto& p : train_pairs) {
    if (!val_unseen.count(p) && !test_unseen.count(p)) {
      split.seen_pairs.push_back(p);
    }
  }
  const std::set<Composition> seen(split.seen_pairs.begin(),
                                   split.seen_pairs.end());
  for (const auto& p : val_pairs) {
    if (seen.count(p)) split.val_seen.push_back(p);
  }
  for (const auto& p : test_pairs) {
    if (seen.count(p)) split.test_seen.push_back(p);
  }
  split.val_unseen.assign(val_unseen.begin(), val_unseen.end());
  split.test_unseen.assign(test_unseen.begin(), test_unseen.end());

  for (const auto& b : boxes.train) {
    if (seen.count(b.pair)) result.train_boxes.push_back(b);
  }
  // Val boxes whose pair went to test_unseen are dropped, as are test boxes
  // whose pair is val-unseen.
  for (const auto& b : boxes.val) {
    if (seen.count(b.pair) || val_unseen.count(b.pair)) {
      result.val_boxes.push_back(b);
    }
  }
  for (const auto& b : boxes.test) {
    if (seen.count(b.pair) || test_unseen.count(b.pair)) {
      result.test_boxes.push_back(b);
    }
  }

  const std::vector<std::string> violations = ValidateSplits(split);
  if (!violations.empty()) {
    throw Error("partition produced an invalid split: " + violations.front());
  }
  return result;
}

void EmitSplits(const SplitSpec& split, const std::filesystem::path& dir,
                bool force) {
  const std::vector<std::string> violations = ValidateSplits(split);
  if (!violations.empty()) {
    throw Error("refusing to emit an invalid split: " + violations.front());
  }
  if (!force) {
    for (const char* name : kSplitFiles) {
      if (std::filesystem::exists(dir / name)) {
        throw Error((dir / name).string() +
                    " already exists (pass --force to overwrite)");
      }
    }
  }
  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : SerializeSplits(split)) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (dir / name).string());
    out << content;
    if (!out) throw Error("write failed: " + (dir / name).string());
  }
}

void WriteBoxList(const std::vector<LabeledBox>& boxes, const SplitSpec& split,
                  const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + file.string());
  for (const auto& b : boxes) {
    out << b.graph_id << '\t' << b.image_id << '\t'
        << split.StateName(b.pair.state) << '\t'
        << split.ObjectName(b.pair.object) << '\n';
  }
}

}  // namespace czsl
