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

#include <filesystem>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "czsl/cgqa_splitter.h"
#include "czsl/common.h"
#include "czsl/comp_graph.h"
#include "czsl/compat_model.h"
#include "czsl/dataset.h"
#include "czsl/eval_czsl.h"
#include "czsl/model_config.h"
#include "czsl/node_features.h"
#include "czsl/synthgen.h"
#include "czsl/trainer.h"

namespace py = pybind11;
namespace fs = std::filesystem;

namespace czsl {
namespace {

py::dict ResultDict(const EvalResult& r) {
  py::dict d;
  d["auc"] = r.auc;
  d["best_hm"] = r.best_hm;
  d["best_hm_bias"] = r.best_hm_bias;
  d["best_seen"] = r.best_seen;
  d["best_unseen"] = r.best_unseen;
  d["state_acc"] = r.state_acc;
  d["obj_acc"] = r.obj_acc;
  py::list curve;
  for (const auto& p : r.curve.points) {
    curve.append(py::make_tuple(p.bias, p.seen_acc, p.unseen_acc));
  }
  d["curve"] = curve;
  return d;
}

py::dict SplitDict(const SplitSpec& split) {
  auto names = [&](const std::vector<Composition>& pairs) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& p : pairs) {
      out.emplace_back(split.StateName(p.state), split.ObjectName(p.object));
    }
    return out;
  };
  py::dict d;
  d["states"] = split.states;
  d["objects"] = split.objects;
  d["seen_pairs"] = names(split.seen_pairs);
  d["val_seen"] = names(split.val_seen);
  d["val_unseen"] = names(split.val_unseen);
  d["test_seen"] = names(split.test_seen);
  d["test_unseen"] = names(split.test_unseen);
  return d;
}

EvalInput MakeInput(const Eigen::MatrixXd& scores, const std::vector<int>& labels,
                    const std::vector<bool>& unseen_columns) {
  EvalInput input;
  input.scores = scores;
  input.labels = labels;
  input.unseen_columns = unseen_columns;
  return input;
}

// Everything needed to train or evaluate on a split directory.
struct Workspace {
  std::shared_ptr<const SplitSpec> split;
  ModelConfig config;
  EmbeddingTable table;
  GraphInputs inputs;

  Dataset Phase(czsl::Phase phase, const fs::path& data_dir) const {
    return LoadFeatures(data_dir / (std::string(PhaseName(phase)) + "_features.txt"),
                        split, phase);
  }
};

Workspace OpenWorkspace(const fs::path& data_dir, const ModelConfig& config) {
  Workspace w;
  w.split = std::make_shared<const SplitSpec>(LoadSplits(data_dir));
  w.config = config;
  std::vector<EmbeddingTable> tables;
  for (const auto& source : config.embedding_sources) {
    fs::path path(source);
    if (path.is_relative()) path = data_dir / path;
    tables.push_back(EmbeddingTable::Load(path));
  }
  w.table = EmbeddingTable::Concat(tables);
  w.inputs = MakeGraphInputs(*w.split, config.graph_variant, w.table);
  return w;
}

py::list Train(const fs::path& data_dir, const fs::path& config_file,
               const fs::path& checkpoint, int epochs, int batch_size,
               double lr_f, double lr_g, uint64_t seed) {
  const Workspace w = OpenWorkspace(data_dir, ModelConfig::Load(config_file));
  const Dataset train = w.Phase(Phase::kTrain, data_dir);
  TrainConfig tc;
  tc.epochs = epochs;
  tc.batch_size = batch_size;
  tc.lr_extractor = lr_f;
  tc.lr_gcn = lr_g;
  tc.seed = seed;
  CompatModel model = BuildModel(w.config, train.dim, w.table.dim(), seed);
  TrainResult result;
  {
    py::gil_scoped_release release;
    result = Fit(std::move(model), w.inputs, train, tc);
  }
  SaveCheckpoint(checkpoint, w.config, train.dim, w.table.dim(), result.model);
  py::list losses;
  for (const auto& e : result.log.epochs) losses.append(e.loss);
  return losses;
}

py::dict EvaluateCheckpoint(const fs::path& data_dir, const fs::path& checkpoint,
                            const std::string& phase) {
  const Checkpoint ckpt = LoadCheckpoint(checkpoint);
  const Workspace w = OpenWorkspace(data_dir, ckpt.config);
  const Dataset data = w.Phase(ParsePhase(phase), data_dir);
  if (data.dim != ckpt.input_width || w.table.dim() != ckpt.embedding_width) {
    throw Error("checkpoint widths do not match the data directory");
  }
  return ResultDict(Evaluate(ckpt.model, w.inputs, data));
}

}  // namespace
}  // namespace czsl

PYBIND11_MODULE(_czsl, m) {
  using namespace czsl;
  m.doc() = "Compositional graph embedding for compositional zero-shot learning";
  py::register_exception<Error>(m, "CzslError", PyExc_RuntimeError);

  m.def(
      "generate_synthetic",
      [](const fs::path& out, uint64_t seed, int n_states, int n_objects,
         double seen_fraction, int val_unseen, int test_unseen, int samples_per_pair,
         int latent_dim, int feature_dim, double noise, bool force) {
        SynthConfig c;
        c.seed = seed;
        c.n_states = n_states;
        c.n_objects = n_objects;
        c.seen_fraction = seen_fraction;
        c.val_unseen = val_unseen;
        c.test_unseen = test_unseen;
        c.samples_per_pair = samples_per_pair;
        c.latent_dim = latent_dim;
        c.feature_dim = feature_dim;
        c.noise_sigma = noise;
        WriteSynthetic(GenerateSynthetic(c), out, force);
      },
      py::arg("out"), py::arg("seed") = 0, py::arg("n_states") = 8,
      py::arg("n_objects") = 8, py::arg("seen_fraction") = 0.625,
      py::arg("val_unseen") = 6, py::arg("test_unseen") = 6,
      py::arg("samples_per_pair") = 10, py::arg("latent_dim") = 8,
      py::arg("feature_dim") = 32, py::arg("noise") = 0.05, py::arg("force") = false,
      "Write a synthetic split directory with features and word vectors.");

  m.def("load_splits", [](const fs::path& dir) { return SplitDict(LoadSplits(dir)); },
        py::arg("dir"));
  m.def("validate_splits", [](const fs::path& dir) {
    return ValidateSplits(LoadSplits(dir));
  }, py::arg("dir"), "Violations of the split invariants (empty when valid).");

  m.def(
      "propagation_matrix",
      [](const fs::path& dir, const std::string& variant) {
        const SplitSpec split = LoadSplits(dir);
        const CompGraph graph = BuildGraph(split, ParseGraphVariant(variant));
        return Eigen::MatrixXd(Normalize(graph, &split).matrix);
      },
      py::arg("dir"), py::arg("variant") = "d",
      "Dense row-normalized adjacency of the compositional graph.");
  m.def(
      "graph_stats",
      [](const fs::path& dir, const std::string& variant) {
        const CompGraph graph = BuildGraph(LoadSplits(dir), ParseGraphVariant(variant));
        py::dict d;
        d["num_nodes"] = graph.num_nodes();
        d["nnz"] = graph.adjacency.nonZeros();
        d["num_compositions"] = graph.num_compositions();
        return d;
      },
      py::arg("dir"), py::arg("variant") = "d");

  m.def(
      "cross_entropy",
      [](const Eigen::MatrixXd& scores, const std::vector<int>& labels) {
        const LossResult r = CrossEntropy(scores, labels);
        return py::make_tuple(r.loss, r.grad);
      },
      py::arg("scores"), py::arg("labels"), "Mean cross-entropy and its gradient.");

  m.def(
      "sweep",
      [](const Eigen::MatrixXd& scores, const std::vector<int>& labels,
         const std::vector<bool>& unseen_columns) {
        const EvalInput input = MakeInput(scores, labels, unseen_columns);
        return ResultDict(Summarize(Sweep(input), input));
      },
      py::arg("scores"), py::arg("labels"), py::arg("unseen_columns"),
      "Calibration-bias sweep: AUC, best harmonic mean and the curve.");
  m.def("harmonic_mean", &HarmonicMean, py::arg("a"), py::arg("b"));

  m.def("train", &Train, py::arg("data_dir"), py::arg("config"),
        py::arg("checkpoint"), py::arg("epochs") = 10, py::arg("batch_size") = 128,
        py::arg("lr_f") = 5e-6, py::arg("lr_g") = 5e-5, py::arg("seed") = 0,
        "Train on a split directory, save a checkpoint, return per-epoch losses.");
  m.def("evaluate", &EvaluateCheckpoint, py::arg("data_dir"), py::arg("checkpoint"),
        py::arg("phase") = "test");

  m.def(
      "make_splits",
      [](const fs::path& scene_graphs, const fs::path& out, uint64_t seed, bool force) {
        CurationConfig config;
        config.seed = seed;
        config.Validate();
        const VocabResult vocab =
            BuildVocab(FilterBoxes(LoadSceneGraphs(scene_graphs), config), {});
        const PartitionResult result = Partition(vocab, config);
        EmitSplits(result.split, out, force);
        return SplitDict(result.split);
      },
      py::arg("scene_graphs"), py::arg("out"), py::arg("seed") = 0,
      py::arg("force") = false, "Curate a split directory from scene-graph records.");
}
