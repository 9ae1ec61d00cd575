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
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "czsl/common.h"
#include "support/test_support.h"

namespace czsl {
namespace {

using testing::ScopedTempDir;

BoxRecord Box(const std::string& state, const std::string& object, int side = 200,
              int relations = 1) {
  BoxRecord box;
  box.image_id = "img";
  box.width = side;
  box.height = side;
  box.object = object;
  box.states = {state};
  box.relation_count = relations;
  return box;
}

SceneGraphRecord Graph(const std::string& id, SourcePartition source,
                       std::vector<BoxRecord> boxes) {
  SceneGraphRecord g;
  g.graph_id = id;
  g.source = source;
  g.boxes = std::move(boxes);
  return g;
}

TEST(FilterBoxesTest, SizeStateAndRelationRules) {
  CurationConfig config;
  BoxRecord two_states = Box("red", "car");
  two_states.states.push_back("old");
  BoxRecord narrow = Box("red", "car");
  narrow.width = 111;
  const std::vector<SceneGraphRecord> records = {Graph(
      "g", SourcePartition::kTrain,
      {Box("red", "car", 112), Box("red", "car", 111), narrow, two_states,
       Box("red", "car", 300, 2), Box("red", "car", 300, 0)})};
  const auto kept = FilterBoxes(records, config);
  ASSERT_EQ(kept.size(), 1u);
  ASSERT_EQ(kept[0].boxes.size(), 1u);
  EXPECT_EQ(kept[0].boxes[0].width, 112);
  config.min_box = 0;
  EXPECT_EQ(FilterBoxes(records, config)[0].boxes.size(), 3u);
}

TEST(BuildVocabTest, PluralsSynonymsAndOverlap) {
  const std::vector<SceneGraphRecord> records = {
      Graph("g0", SourcePartition::kTrain,
            {Box("Small", "dogs"), Box("small", "dog"), Box("aged", "puppy"),
             Box("light", "cup"), Box("red", "light"), Box("old", "Car")})};
  const VocabResult vocab = BuildVocab(records, testing::CorpusSynonyms());
  // "red" keeps its vocabulary entry although its only box is dropped.
  EXPECT_EQ(vocab.states, (std::vector<std::string>{"old", "red", "small"}));
  EXPECT_EQ(vocab.objects, (std::vector<std::string>{"car", "cup", "dog"}));
  const std::string report = FormatVocabReport(vocab.report);
  EXPECT_NE(report.find("plural\tobject\tdogs\tdog\n"), std::string::npos) << report;
  EXPECT_NE(report.find("synonym\tstate\taged\told\n"), std::string::npos);
  EXPECT_NE(report.find("synonym\tobject\tpuppy\tdog\n"), std::string::npos);
  EXPECT_NE(report.find("overlap\tstate\tlight\t\n"), std::string::npos);
  EXPECT_NE(report.find("overlap\tobject\tlight\t\n"), std::string::npos);
  // Boxes using "light" on either side are dropped; the rest keep canonical names.
  ASSERT_EQ(vocab.records[0].boxes.size(), 4u);
  EXPECT_EQ(vocab.records[0].boxes[0].object, "dog");
  EXPECT_EQ(vocab.records[0].boxes[2].states[0], "old");
  EXPECT_EQ(vocab.records[0].boxes[2].object, "dog");
}

CurationConfig SeededConfig(uint64_t seed) {
  CurationConfig config;
  config.seed = seed;
  config.synonym_map = testing::CorpusSynonyms();
  return config;
}

TEST(PartitionTest, RandomCorporaGiveValidSplits) {
  std::mt19937_64 rng(11);
  int succeeded = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const auto records = testing::RandomSceneGraphs(rng);
    const CurationConfig config = SeededConfig(static_cast<uint64_t>(trial));
    const VocabResult vocab = BuildVocab(FilterBoxes(records, config), config.synonym_map);
    PartitionResult result;
    try {
      result = Partition(vocab, config);
    } catch (const Error&) {
      continue;
    }
    ++succeeded;
    const SplitSpec& split = result.split;
    EXPECT_TRUE(ValidateSplits(split).empty()) << trial;
    const std::set<Composition> val_unseen(split.val_unseen.begin(), split.val_unseen.end());
    const std::set<Composition> test_unseen(split.test_unseen.begin(),
                                            split.test_unseen.end());
    const std::set<Composition> seen(split.seen_pairs.begin(), split.seen_pairs.end());
    for (const auto& box : result.train_boxes) EXPECT_TRUE(seen.count(box.pair));
    for (const auto& box : result.test_boxes) {
      EXPECT_FALSE(val_unseen.count(box.pair)) << trial;
    }
    std::set<std::string> train_graphs, val_graphs, test_graphs;
    for (const auto& b : result.train_boxes) train_graphs.insert(b.graph_id);
    for (const auto& b : result.val_boxes) val_graphs.insert(b.graph_id);
    for (const auto& b : result.test_boxes) test_graphs.insert(b.graph_id);
    for (const auto& g : val_graphs) {
      EXPECT_FALSE(train_graphs.count(g));
      EXPECT_FALSE(test_graphs.count(g));
    }
    for (const auto& g : test_graphs) EXPECT_FALSE(train_graphs.count(g));
    // Determinism.
    const PartitionResult again = Partition(vocab, config);
    EXPECT_EQ(again.split, split);
  }
  EXPECT_GE(succeeded, 25);
}

TEST(PartitionTest, NovelPairsGrowWithMovedFraction) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const auto records = testing::RandomSceneGraphs(rng);
    CurationConfig config = SeededConfig(static_cast<uint64_t>(trial));
    const VocabResult vocab = BuildVocab(FilterBoxes(records, config), config.synonym_map);
    size_t previous = 0;
    for (double fraction : {0.05, 0.2, 0.4, 0.6, 0.8, 0.95}) {
      config.train_graph_fraction_moved = fraction;
      const size_t count = CountCandidateNovelPairs(vocab, config);
      EXPECT_GE(count, previous) << "fraction " << fraction;
      previous = count;
    }
  }
}

TEST(PartitionTest, ThrowsWhenNoUnseenPairs) {
  // Every graph holds the same pair, so nothing can become novel and the
  // division has a single pair to draw from.
  std::vector<SceneGraphRecord> records;
  for (int g = 0; g < 20; ++g) {
    records.push_back(Graph("g" + std::to_string(g),
                            g < 10 ? SourcePartition::kTrain : SourcePartition::kTest,
                            {Box("red", "car")}));
  }
  CurationConfig config;
  config.unseen_division = 0.0;
  const VocabResult vocab = BuildVocab(FilterBoxes(records, config), {});
  EXPECT_THROW(Partition(vocab, config), Error);
}

TEST(CurationConfigTest, Validate) {
  CurationConfig config;
  EXPECT_NO_THROW(config.Validate());
  config.val_prob = 0.5;
  EXPECT_THROW(config.Validate(), Error);
  config = CurationConfig{};
  config.train_graph_fraction_moved = 1.0;
  EXPECT_THROW(config.Validate(), Error);
  config = CurationConfig{};
  config.min_box = -1;
  EXPECT_THROW(config.Validate(), Error);
}

TEST(SceneGraphIoTest, RoundTripAndErrors) {
  ScopedTempDir dir;
  std::mt19937_64 rng(13);
  const auto records = testing::RandomSceneGraphs(rng);
  WriteSceneGraphs(records, dir / "sg.tsv");
  const auto loaded = LoadSceneGraphs(dir / "sg.tsv");
  ASSERT_EQ(loaded.size(), records.size());
  for (size_t i = 0; i < loaded.size(); ++i) {
    EXPECT_EQ(loaded[i].graph_id, records[i].graph_id);
    EXPECT_EQ(loaded[i].source, records[i].source);
    ASSERT_EQ(loaded[i].boxes.size(), records[i].boxes.size());
    for (size_t b = 0; b < loaded[i].boxes.size(); ++b) {
      const auto& states = records[i].boxes[b].states;
      ASSERT_EQ(loaded[i].boxes[b].states.size(), states.size());
      for (size_t k = 0; k < states.size(); ++k) {
        // Fields are trimmed on load.
        EXPECT_EQ(loaded[i].boxes[b].states[k], Trim(states[k]));
      }
      EXPECT_EQ(loaded[i].boxes[b].relation_count, records[i].boxes[b].relation_count);
    }
  }
  testing::WriteText(dir / "bad.tsv", "g0\tval\timg\t10\t10\tcar\tred\t1\n");
  EXPECT_THROW(LoadSceneGraphs(dir / "bad.tsv"), Error);
  testing::WriteText(dir / "short.tsv", "g0\ttrain\timg\t10\n");
  EXPECT_THROW(LoadSceneGraphs(dir / "short.tsv"), Error);
  testing::WriteText(dir / "both.tsv",
                     "g0\ttrain\timg\t10\t10\tcar\tred\t1\n"
                     "g0\ttest\timg\t10\t10\tcar\tred\t1\n");
  EXPECT_THROW(LoadSceneGraphs(dir / "both.tsv"), Error);

  testing::WriteText(dir / "syn.tsv", "Aged\tOld\n");
  EXPECT_EQ(LoadSynonymMap(dir / "syn.tsv"),
            (std::map<std::string, std::string>{{"aged", "old"}}));
}

TEST(EmitSplitsTest, RefusesOverwriteAndWritesEmptyLists) {
  ScopedTempDir dir;
  SplitSpec split;
  split.states = {"old", "red"};
  split.objects = {"car", "dog"};
  split.seen_pairs = {{StateId{0}, ObjectId{0}}, {StateId{1}, ObjectId{1}}};
  split.val_unseen = {{StateId{0}, ObjectId{1}}};
  split.test_unseen = {{StateId{1}, ObjectId{0}}};
  EmitSplits(split, dir.path(), false);
  EXPECT_TRUE(std::filesystem::exists(dir / "val_pairs_seen.txt"));
  EXPECT_EQ(testing::ReadBytes(dir / "val_pairs_seen.txt"), "");
  EXPECT_EQ(LoadSplits(dir.path()), split);
  try {
    EmitSplits(split, dir.path(), false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("--force"), std::string::npos) << e.what();
  }
  EXPECT_NO_THROW(EmitSplits(split, dir.path(), true));

  split.val_unseen = {split.seen_pairs[0]};
  ScopedTempDir other;
  EXPECT_THROW(EmitSplits(split, other.path(), false), Error);
}

}  // namespace
}  // namespace czsl
