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

#ifndef CZSL_DATASET_H_
#define CZSL_DATASET_H_

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace czsl {

struct StateId {
  int32_t value = 0;
  friend auto operator<=>(const StateId&, const StateId&) = default;
};

struct ObjectId {
  int32_t value = 0;
  friend auto operator<=>(const ObjectId&, const ObjectId&) = default;
};

// A (state, object) label such as (old, dog).
struct Composition {
  StateId state;
  ObjectId object;
  friend auto operator<=>(const Composition&, const Composition&) = default;
};

enum class Phase { kTrain, kVal, kTest };

std::string_view PhaseName(Phase phase);
Phase ParsePhase(std::string_view name);

// Vocabularies plus the per-phase composition lists. Lists keep file order;
// that order defines node and column ordering everywhere downstream.
struct SplitSpec {
  std::vector<std::string> states;
  std::vector<std::string> objects;
  std::vector<Composition> seen_pairs;
  std::vector<Composition> val_seen;
  std::vector<Composition> val_unseen;
  std::vector<Composition> test_seen;
  std::vector<Composition> test_unseen;

  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;

  std::optional<StateId> FindState(std::string_view name) const;
  std::optional<ObjectId> FindObject(std::string_view name) const;
  const std::string& StateName(StateId id) const;
  const std::string& ObjectName(ObjectId id) const;
  std::string PairName(const Composition& pair) const;

  // seen_pairs, then val_unseen, then test_unseen: every composition node.
  std::vector<Composition> AllPairs() const;

  // Pairs whose samples may appear in `phase`.
  std::vector<Composition> PhasePairs(Phase phase) const;
  const std::vector<Composition>& PhaseUnseen(Phase phase) const;
};

// Reads states.txt, objects.txt and the five pair lists from `dir`.
// Throws Error naming the offending file and line on any violation.
SplitSpec LoadSplits(const std::filesystem::path& dir);

// Empty iff every SplitSpec invariant holds.
std::vector<std::string> ValidateSplits(const SplitSpec& split);

// Canonical text serialization (the exact bytes EmitSplits writes, keyed by
// file name). Used for determinism checks.
std::map<std::string, std::string> SerializeSplits(const SplitSpec& split);

inline constexpr const char* kSplitFiles[] = {
    "states.txt",         "objects.txt",         "train_pairs.txt",
    "val_pairs_seen.txt", "val_pairs_unseen.txt", "test_pairs_seen.txt",
    "test_pairs_unseen.txt"};

struct Sample {
  std::string id;
  Composition label;
  std::vector<double> feature;
};

struct Dataset {
  Phase phase = Phase::kTrain;
  int dim = 0;
  std::vector<Sample> samples;
  std::shared_ptr<const SplitSpec> split;

  size_t size() const { return samples.size(); }
  // Stacks the requested samples' features into a rows.size() x dim matrix.
  Eigen::MatrixXd Features(std::span<const int> rows) const;
  Eigen::MatrixXd AllFeatures() const;
};

// Throws if any label is not allowed in `phase`.
void CheckPhaseLabels(const Dataset& dataset);

Dataset LoadFeatures(const std::filesystem::path& file,
                     std::shared_ptr<const SplitSpec> split, Phase phase);
void WriteFeatures(const Dataset& dataset, const std::filesystem::path& file);

}  // namespace czsl

#endif  // CZSL_DATASET_H_
