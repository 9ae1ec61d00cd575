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

#include "czsl/synthgen.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "czsl/cgqa_splitter.h"
#include "czsl/common.h"

namespace czsl {
namespace {

Eigen::MatrixXd GaussianMatrix(int rows, int cols, double sigma,
                               std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, sigma);
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = normal(rng);
  }
  return m;
}

std::string SampleId(Phase phase, size_t index) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%s_%06zu",
                std::string(PhaseName(phase)).c_str(), index);
  return buffer;
}

bool CoversVocabulary(const std::vector<Composition>& pairs, int n_states,
                      int n_objects) {
  std::vector<bool> states(static_cast<size_t>(n_states), false);
  std::vector<bool> objects(static_cast<size_t>(n_objects), false);
  for (const auto& p : pairs) {
    states[static_cast<size_t>(p.state.value)] = true;
    objects[static_cast<size_t>(p.object.value)] = true;
  }
  return std::all_of(states.begin(), states.end(), [](bool b) { return b; }) &&
         std::all_of(objects.begin(), objects.end(), [](bool b) { return b; });
}

}  // namespace

int SynthConfig::num_seen_pairs() const {
  return static_cast<int>(std::lround(seen_fraction * n_states * n_objects));
}

void SynthConfig::Validate() const {
  if (n_states < 1 || n_objects < 1 || samples_per_pair < 1 ||
      latent_dim < 1 || feature_dim < 1 || val_unseen < 1 || test_unseen < 1) {
    throw Error("synthetic config: all counts must be >= 1");
  }
  if (!(seen_fraction > 0.0 && seen_fraction < 1.0)) {
    throw Error("synthetic config: seen_fraction must be in (0, 1)");
  }
  if (noise_sigma < 0.0 || embed_noise_sigma < 0.0) {
    throw Error("synthetic config: noise must be non-negative");
  }
  const int total = n_states * n_objects;
  const int seen = num_seen_pairs();
  if (seen < std::max(n_states, n_objects)) {
    throw Error("synthetic config: too few seen pairs to cover every primitive");
  }
  if (seen + val_unseen + test_unseen > total) {
    throw Error("synthetic config: infeasible unseen counts (" +
                std::to_string(seen) + " seen + " + std::to_string(val_unseen) +
                " + " + std::to_string(test_unseen) + " unseen > " +
                std::to_string(total) + " pairs)");
  }
}

SynthData GenerateSynthetic(const SynthConfig& config) {
  config.Validate();
  const int latent = config.latent_dim;

  std::mt19937_64 proto_rng(MixSeed(config.seed, 1));
  const Eigen::MatrixXd state_protos =
      GaussianMatrix(config.n_states, latent, 1.0, proto_rng);
  const Eigen::MatrixXd object_protos =
      GaussianMatrix(config.n_objects, latent, 1.0, proto_rng);
  std::mt19937_64 map_rng(MixSeed(config.seed, 2));
  const Eigen::MatrixXd mixing = GaussianMatrix(
      config.feature_dim, 3 * latent, 1.0 / std::sqrt(3.0 * latent), map_rng);

  auto split = std::make_shared<SplitSpec>();
  for (int s = 0; s < config.n_states; ++s) {
    split->states.push_back("s" + std::to_string(s));
  }
  for (int o = 0; o < config.n_objects; ++o) {
    split->objects.push_back("o" + std::to_string(o));
  }

  std::vector<Composition> universe;
  for (int s = 0; s < config.n_states; ++s) {
    for (int o = 0; o < config.n_objects; ++o) {
      universe.push_back({StateId{s}, ObjectId{o}});
    }
  }
  std::mt19937_64 split_rng(MixSeed(config.seed, 3));
  const int num_seen = config.num_seen_pairs();
  constexpr int kMaxShuffles = 10000;
  bool covered = false;
  for (int attempt = 0; attempt < kMaxShuffles && !covered; ++attempt) {
    std::shuffle(universe.begin(), universe.end(), split_rng);
    covered = CoversVocabulary(
        std::vector<Composition>(universe.begin(), universe.begin() + num_seen),
        config.n_states, config.n_objects);
  }
  if (!covered) {
    throw Error("synthetic config: could not draw seen pairs covering every "
                "state and object");
  }
  auto take = [&](int begin, int count) {
    std::vector<Composition> out(universe.begin() + begin,
                                 universe.begin() + begin + count);
    std::sort(out.begin(), out.end());
    return out;
  };
  split->seen_pairs = take(0, num_seen);
  split->val_unseen = take(num_seen, config.val_unseen);
  split->test_unseen = take(num_seen + config.val_unseen, config.test_unseen);
  split->val_seen = split->seen_pairs;
  split->test_seen = split->seen_pairs;

  std::mt19937_64 noise_rng(MixSeed(config.seed, 4));
  std::normal_distribution<double> noise(0.0, 1.0);
  auto make_dataset = [&](Phase phase) {
    Dataset dataset;
    dataset.phase = phase;
    dataset.dim = config.feature_dim;
    dataset.split = split;
    for (const Composition& pair : split->PhasePairs(phase)) {
      Eigen::VectorXd latent_code(3 * latent);
      const Eigen::VectorXd a = state_protos.row(pair.state.value).transpose();
      const Eigen::VectorXd b = object_protos.row(pair.object.value).transpose();
      latent_code << a, b, a.cwiseProduct(b);
      const Eigen::VectorXd clean = (mixing * latent_code).array().tanh();
      for (int n = 0; n < config.samples_per_pair; ++n) {
        Sample sample;
        sample.id = SampleId(phase, dataset.samples.size());
        sample.label = pair;
        sample.feature.resize(static_cast<size_t>(config.feature_dim));
        for (int d = 0; d < config.feature_dim; ++d) {
          sample.feature[d] = clean[d] + config.noise_sigma * noise(noise_rng);
        }
        dataset.samples.push_back(std::move(sample));
      }
    }
    return dataset;
  };

  SynthData data;
  data.split = split;
  data.train = make_dataset(Phase::kTrain);
  data.val = make_dataset(Phase::kVal);
  data.test = make_dataset(Phase::kTest);

  std::mt19937_64 embed_rng(MixSeed(config.seed, 5));
  std::normal_distribution<double> embed_noise(0.0, 1.0);
  data.embeddings.name = "embeddings.txt";
  data.embeddings.dim = latent;
  auto add_vector = [&](const std::string& token, const Eigen::VectorXd& proto) {
    Eigen::VectorXd v = proto;
    for (int d = 0; d < latent; ++d) {
      v[d] += config.embed_noise_sigma * embed_noise(embed_rng);
    }
    data.embeddings.vectors.emplace(token, std::move(v));
  };
  for (int s = 0; s < config.n_states; ++s) {
    add_vector(split->states[s], state_protos.row(s).transpose());
  }
  for (int o = 0; o < config.n_objects; ++o) {
    add_vector(split->objects[o], object_protos.row(o).transpose());
  }
  return data;
}

void WriteSynthetic(const SynthData& data, const std::filesystem::path& dir,
                    bool force) {
  const char* extra[] = {"train_features.txt", "val_features.txt",
                         "test_features.txt", "embeddings.txt"};
  if (!force) {
    for (const char* name : extra) {
      if (std::filesystem::exists(dir / name)) {
        throw Error((dir / name).string() +
                    " already exists (pass --force to overwrite)");
      }
    }
  }
  EmitSplits(*data.split, dir, force);
  WriteFeatures(data.train, dir / "train_features.txt");
  WriteFeatures(data.val, dir / "val_features.txt");
  WriteFeatures(data.test, dir / "test_features.txt");
  WriteEmbeddings(data.embeddings, dir / "embeddings.txt");
}

}  // namespace czsl
