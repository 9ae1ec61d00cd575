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

#include "czsl/dataset.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "czsl/common.h"

namespace czsl {
namespace {

struct NumberedPair {
  Composition pair;
  int line;
};

std::vector<std::string> LoadVocab(const std::filesystem::path& file) {
  const std::vector<std::string> lines = ReadLines(file);
  std::vector<std::string> names;
  std::unordered_map<std::string, int> first_line;
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string where = file.filename().string() + ":" +
                              std::to_string(i + 1);
    std::string name = NormalizeName(lines[i]);
    if (name.empty()) {
      // A trailing blank line is tolerated; interior ones would shift indices.
      if (i + 1 == lines.size()) break;
      throw Error(where + ": empty name");
    }
    if (name.find('\t') != std::string::npos) {
      throw Error(where + ": name contains a tab");
    }
    auto [it, inserted] = first_line.emplace(name, static_cast<int>(i + 1));
    if (!inserted) {
      throw Error(where + ": duplicate entry '" + name + "' (first on line " +
                  std::to_string(it->second) + ")");
    }
    names.push_back(std::move(name));
  }
  return names;
}

std::vector<NumberedPair> LoadPairList(const std::filesystem::path& file,
                                       const SplitSpec& split) {
  const std::vector<std::string> lines = ReadLines(file);
  std::vector<NumberedPair> pairs;
  std::map<Composition, int> seen_at;
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string where = file.filename().string() + ":" +
                              std::to_string(i + 1);
    if (Trim(lines[i]).empty()) continue;
    const std::vector<std::string> fields = SplitString(lines[i], '\t');
    if (fields.size() != 2) {
      throw Error(where + ": expected '<state>\\t<object>'");
    }
    const auto state = split.FindState(NormalizeName(fields[0]));
    if (!state) {
      throw Error(where + ": unknown state '" + fields[0] + "'");
    }
    const auto object = split.FindObject(NormalizeName(fields[1]));
    if (!object) {
      throw Error(where + ": unknown object '" + fields[1] + "'");
    }
    const Composition pair{*state, *object};
    auto [it, inserted] = seen_at.emplace(pair, static_cast<int>(i + 1));
    if (!inserted) {
      throw Error(where + ": duplicate pair (" + split.PairName(pair) +
                  ") (first on line " + std::to_string(it->second) + ")");
    }
    pairs.push_back({pair, static_cast<int>(i + 1)});
  }
  return pairs;
}

std::vector<Composition> StripLines(const std::vector<NumberedPair>& pairs) {
  std::vector<Composition> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.pair);
  return out;
}

// Reports every member of `list` that violates membership in `other`.
// `must_be_in` selects subset (true) or disjointness (false) semantics.
void CheckRelation(const SplitSpec& split, const std::vector<Composition>& list,
                   const std::string& list_name,
                   const std::vector<Composition>& other,
                   const std::string& other_name, bool must_be_in,
                   std::vector<std::string>* report) {
  const std::set<Composition> other_set(other.begin(), other.end());
  for (const Composition& pair : list) {
    const bool in_other = other_set.count(pair) > 0;
    if (must_be_in && !in_other) {
      report->push_back(list_name + ": pair (" + split.PairName(pair) +
                        ") is not in " + other_name);
    } else if (!must_be_in && in_other) {
      report->push_back(list_name + ": pair (" + split.PairName(pair) +
                        ") also appears in " + other_name);
    }
  }
}

void WritePairs(std::ostream& out, const SplitSpec& split,
                const std::vector<Composition>& pairs) {
  for (const Composition& pair : pairs) {
    out << split.StateName(pair.state) << '\t' << split.ObjectName(pair.object)
        << '\n';
  }
}

}  // namespace

std::string_view PhaseName(Phase phase) {
  switch (phase) {
    case Phase::kTrain:
      return "train";
    case Phase::kVal:
      return "val";
    case Phase::kTest:
      return "test";
  }
  return "unknown";
}

Phase ParsePhase(std::string_view name) {
  if (name == "train") return Phase::kTrain;
  if (name == "val") return Phase::kVal;
  if (name == "test") return Phase::kTest;
  throw Error("unknown phase '" + std::string(name) + "'");
}

std::optional<StateId> SplitSpec::FindState(std::string_view name) const {
  for (size_t i = 0; i < states.size(); ++i) {
    if (states[i] == name) return StateId{static_cast<int32_t>(i)};
  }
  return std::nullopt;
}

std::optional<ObjectId> SplitSpec::FindObject(std::string_view name) const {
  for (size_t i = 0; i < objects.size(); ++i) {
    if (objects[i] == name) return ObjectId{static_cast<int32_t>(i)};
  }
  return std::nullopt;
}

const std::string& SplitSpec::StateName(StateId id) const {
  return states.at(static_cast<size_t>(id.value));
}

const std::string& SplitSpec::ObjectName(ObjectId id) const {
  return objects.at(static_cast<size_t>(id.value));
}

std::string SplitSpec::PairName(const Composition& pair) const {
  std::string state = pair.state.value >= 0 &&
                              pair.state.value < static_cast<int>(states.size())
                          ? states[pair.state.value]
                          : "#" + std::to_string(pair.state.value);
  std::string object =
      pair.object.value >= 0 &&
              pair.object.value < static_cast<int>(objects.size())
          ? objects[pair.object.value]
          : "#" + std::to_string(pair.object.value);
  return state + ", " + object;
}

std::vector<Composition> SplitSpec::AllPairs() const {
  std::vector<Composition> all = seen_pairs;
  all.insert(all.end(), val_unseen.begin(), val_unseen.end());
  all.insert(all.end(), test_unseen.begin(), test_unseen.end());
  return all;
}

std::vector<Composition> SplitSpec::PhasePairs(Phase phase) const {
  switch (phase) {
    case Phase::kTrain:
      return seen_pairs;
    case Phase::kVal: {
      std::vector<Composition> out = val_seen;
      out.insert(out.end(), val_unseen.begin(), val_unseen.end());
      return out;
    }
    case Phase::kTest: {
      std::vector<Composition> out = test_seen;
      out.insert(out.end(), test_unseen.begin(), test_unseen.end());
      return out;
    }
  }
  return {};
}

const std::vector<Composition>& SplitSpec::PhaseUnseen(Phase phase) const {
  static const std::vector<Composition> kEmpty;
  switch (phase) {
    case Phase::kTrain:
      return kEmpty;
    case Phase::kVal:
      return val_unseen;
    case Phase::kTest:
      return test_unseen;
  }
  return kEmpty;
}

SplitSpec LoadSplits(const std::filesystem::path& dir) {
  for (const char* name : kSplitFiles) {
    if (!std::filesystem::exists(dir / name)) {
      throw Error("missing split file: " + (dir / name).string());
    }
  }
  SplitSpec split;
  split.states = LoadVocab(dir / "states.txt");
  split.objects = LoadVocab(dir / "objects.txt");
  const auto seen = LoadPairList(dir / "train_pairs.txt", split);
  const auto val_seen = LoadPairList(dir / "val_pairs_seen.txt", split);
  const auto val_unseen = LoadPairList(dir / "val_pairs_unseen.txt", split);
  const auto test_seen = LoadPairList(dir / "test_pairs_seen.txt", split);
  const auto test_unseen = LoadPairList(dir / "test_pairs_unseen.txt", split);

  split.seen_pairs = StripLines(seen);
  split.val_unseen = StripLines(val_unseen);
  const std::set<Composition> seen_set(split.seen_pairs.begin(),
                                       split.seen_pairs.end());
  const std::set<Composition> val_unseen_set(split.val_unseen.begin(),
                                             split.val_unseen.end());
  auto fail = [&](const std::string& file, const NumberedPair& p,
                  const std::string& what) {
    throw Error(file + ":" + std::to_string(p.line) + ": pair (" +
                split.PairName(p.pair) + ") " + what);
  };
  for (const auto& p : val_unseen) {
    if (seen_set.count(p.pair)) {
      fail("val_pairs_unseen.txt", p, "also appears in train_pairs.txt");
    }
  }
  for (const auto& p : test_unseen) {
    if (seen_set.count(p.pair)) {
      fail("test_pairs_unseen.txt", p, "also appears in train_pairs.txt");
    }
    if (val_unseen_set.count(p.pair)) {
      fail("test_pairs_unseen.txt", p, "also appears in val_pairs_unseen.txt");
    }
  }
  for (const auto& p : val_seen) {
    if (!seen_set.count(p.pair)) {
      fail("val_pairs_seen.txt", p, "is not in train_pairs.txt");
    }
  }
  for (const auto& p : test_seen) {
    if (!seen_set.count(p.pair)) {
      fail("test_pairs_seen.txt", p, "is not in train_pairs.txt");
    }
  }

  split.val_seen = StripLines(val_seen);
  split.test_seen = StripLines(test_seen);
  split.test_unseen = StripLines(test_unseen);
  return split;
}

std::vector<std::string> ValidateSplits(const SplitSpec& split) {
  std::vector<std::string> report;
  const int num_states = static_cast<int>(split.states.size());
  const int num_objects = static_cast<int>(split.objects.size());

  std::set<std::string> names;
  for (const auto& name : split.states) {
    if (name.empty() || name != NormalizeName(name)) {
      report.push_back("states: name '" + name + "' is not normalized");
    }
    if (!names.insert(name).second) {
      report.push_back("states: duplicate name '" + name + "'");
    }
  }
  names.clear();
  for (const auto& name : split.objects) {
    if (name.empty() || name != NormalizeName(name)) {
      report.push_back("objects: name '" + name + "' is not normalized");
    }
    if (!names.insert(name).second) {
      report.push_back("objects: duplicate name '" + name + "'");
    }
  }

  const std::pair<const char*, const std::vector<Composition>*> lists[] = {
      {"seen_pairs", &split.seen_pairs}, {"val_seen", &split.val_seen},
      {"val_unseen", &split.val_unseen}, {"test_seen", &split.test_seen},
      {"test_unseen", &split.test_unseen}};
  for (const auto& [name, list] : lists) {
    std::set<Composition> unique;
    for (const Composition& pair : *list) {
      if (pair.state.value < 0 || pair.state.value >= num_states ||
          pair.object.value < 0 || pair.object.value >= num_objects) {
        report.push_back(std::string(name) + ": pair (" +
                         split.PairName(pair) + ") index out of range");
      }
      if (!unique.insert(pair).second) {
        report.push_back(std::string(name) + ": duplicate pair (" +
                         split.PairName(pair) + ")");
      }
    }
  }

  CheckRelation(split, split.val_unseen, "val_unseen", split.seen_pairs,
                "seen_pairs", false, &report);
  CheckRelation(split, split.test_unseen, "test_unseen", split.seen_pairs,
                "seen_pairs", false, &report);
  CheckRelation(split, split.test_unseen, "test_unseen", split.val_unseen,
                "val_unseen", false, &report);
  CheckRelation(split, split.val_seen, "val_seen", split.seen_pairs,
                "seen_pairs", true, &report);
  CheckRelation(split, split.test_seen, "test_seen", split.seen_pairs,
                "seen_pairs", true, &report);
  return report;
}

std::map<std::string, std::string> SerializeSplits(const SplitSpec& split) {
  std::map<std::string, std::string> files;
  {
    std::ostringstream out;
    for (const auto& name : split.states) out << name << '\n';
    files["states.txt"] = out.str();
  }
  {
    std::ostringstream out;
    for (const auto& name : split.objects) out << name << '\n';
    files["objects.txt"] = out.str();
  }
  const std::pair<const char*, const std::vector<Composition>*> lists[] = {
      {"train_pairs.txt", &split.seen_pairs},
      {"val_pairs_seen.txt", &split.val_seen},
      {"val_pairs_unseen.txt", &split.val_unseen},
      {"test_pairs_seen.txt", &split.test_seen},
      {"test_pairs_unseen.txt", &split.test_unseen}};
  for (const auto& [name, list] : lists) {
    std::ostringstream out;
    WritePairs(out, split, *list);
    files[name] = out.str();
  }
  return files;
}

Eigen::MatrixXd Dataset::Features(std::span<const int> rows) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), dim);
  for (size_t r = 0; r < rows.size(); ++r) {
    const auto& feature = samples.at(static_cast<size_t>(rows[r])).feature;
    for (int c = 0; c < dim; ++c) out(static_cast<Eigen::Index>(r), c) = feature[c];
  }
  return out;
}

Eigen::MatrixXd Dataset::AllFeatures() const {
  std::vector<int> rows(samples.size());
  for (size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
  return Features(rows);
}

void CheckPhaseLabels(const Dataset& dataset) {
  if (!dataset.split) throw Error("dataset has no split attached");
  const std::vector<Composition> allowed_list =
      dataset.split->PhasePairs(dataset.phase);
  const std::set<Composition> allowed(allowed_list.begin(), allowed_list.end());
  for (const Sample& sample : dataset.samples) {
    if (!allowed.count(sample.label)) {
      throw Error("sample '" + sample.id + "' has label (" +
                  dataset.split->PairName(sample.label) +
                  ") which is not allowed in phase " +
                  std::string(PhaseName(dataset.phase)));
    }
  }
}

Dataset LoadFeatures(const std::filesystem::path& file,
                     std::shared_ptr<const SplitSpec> split, Phase phase) {
  if (!split) throw Error("LoadFeatures: null split");
  const std::vector<std::string> lines = ReadLines(file);
  const std::string name = file.filename().string();
  if (lines.empty()) throw Error(name + ": empty feature file");
  const std::vector<std::string> header = SplitWhitespace(lines[0]);
  if (header.size() != 2) throw Error(name + ":1: expected header 'N d'");
  const int64_t count = ParseInt(header[0], name + ":1");
  const int64_t dim = ParseInt(header[1], name + ":1");
  if (count < 0 || dim <= 0) throw Error(name + ":1: invalid header");

  Dataset dataset;
  dataset.phase = phase;
  dataset.dim = static_cast<int>(dim);
  dataset.split = split;
  dataset.samples.reserve(static_cast<size_t>(count));

  const std::vector<Composition> allowed_list = split->PhasePairs(phase);
  const std::set<Composition> allowed(allowed_list.begin(), allowed_list.end());
  for (size_t i = 1; i < lines.size(); ++i) {
    const std::string where = name + ":" + std::to_string(i + 1);
    if (Trim(lines[i]).empty()) continue;
    const std::vector<std::string> fields = SplitString(lines[i], '\t');
    if (fields.size() != 4) {
      throw Error(where + ": expected 4 tab-separated fields");
    }
    const auto state = split->FindState(NormalizeName(fields[1]));
    const auto object = split->FindObject(NormalizeName(fields[2]));
    if (!state || !object) {
      throw Error(where + ": unknown label '" + fields[1] + "\t" + fields[2] +
                  "'");
    }
    Sample sample;
    sample.id = fields[0];
    sample.label = Composition{*state, *object};
    if (!allowed.count(sample.label)) {
      throw Error(where + ": label (" + split->PairName(sample.label) +
                  ") not allowed in phase " + std::string(PhaseName(phase)));
    }
    const std::vector<std::string> values = SplitWhitespace(fields[3]);
    if (static_cast<int64_t>(values.size()) != dim) {
      throw Error(where + ": dimension mismatch (header d=" +
                  std::to_string(dim) + ", record has " +
                  std::to_string(values.size()) + ")");
    }
    sample.feature.reserve(values.size());
    for (const auto& v : values) {
      const double x = ParseDouble(v, where);
      if (!std::isfinite(x)) throw Error(where + ": non-finite value");
      sample.feature.push_back(x);
    }
    dataset.samples.push_back(std::move(sample));
  }
  if (static_cast<int64_t>(dataset.samples.size()) != count) {
    throw Error(name + ": header declares " + std::to_string(count) +
                " records but file has " +
                std::to_string(dataset.samples.size()));
  }
  return dataset;
}

void WriteFeatures(const Dataset& dataset, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  out << dataset.samples.size() << ' ' << dataset.dim << '\n';
  for (const Sample& sample : dataset.samples) {
    out << sample.id << '\t' << dataset.split->StateName(sample.label.state)
        << '\t' << dataset.split->ObjectName(sample.label.object) << '\t';
    for (size_t i = 0; i < sample.feature.size(); ++i) {
      if (i) out << ' ';
      out << FormatDouble(sample.feature[i]);
    }
    out << '\n';
  }
  if (!out) throw Error("write failed: " + file.string());
}

}  // namespace czsl
