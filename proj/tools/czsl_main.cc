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

// czsl: command-line driver for data generation, graph inspection, training,
// evaluation and ablations.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "czsl/cgqa_splitter.h"
#include "czsl/common.h"
#include "czsl/comp_graph.h"
#include "czsl/compat_model.h"
#include "czsl/dataset.h"
#include "czsl/eval_czsl.h"
#include "czsl/gcn.h"
#include "czsl/model_config.h"
#include "czsl/node_features.h"
#include "czsl/synthgen.h"
#include "czsl/trainer.h"

namespace czsl {
namespace {

namespace fs = std::filesystem;

struct DataFlags {
  std::string data_dir;
  std::string aux_file;
  std::string oov = "error";
  std::string embeddings;  // overrides embeddings.sources when set
};

struct TrainFlags {
  std::string config_file;
  std::string variant;
  int epochs = 10;
  int batch_size = 128;
  double lr_f = 5e-6;
  double lr_g = 5e-5;
  double dropout = -1.0;
  uint64_t seed = 0;
  bool no_shuffle = false;
};

void AddDataFlags(CLI::App* app, DataFlags* flags) {
  app->add_option("--data", flags->data_dir,
                  "Dataset directory (split files, feature files, embeddings)");
  app->add_option("--aux", flags->aux_file,
                  "Auxiliary edge file (needed for graph variant e)");
  app->add_option("--oov", flags->oov,
                  "Missing word-vector policy: error | seeded-random");
  app->add_option("--embeddings", flags->embeddings,
                  "Comma list of word-vector files; overrides the config");
}

void AddTrainFlags(CLI::App* app, TrainFlags* flags) {
  app->add_option("--config", flags->config_file, "Model config file (key=value)");
  app->add_option("--variant", flags->variant,
                  "Graph variant a..e; overrides graph.variant");
  app->add_option("--epochs", flags->epochs, "Training epochs")
      ->check(CLI::PositiveNumber);
  app->add_option("--batch-size", flags->batch_size, "Minibatch size")
      ->check(CLI::PositiveNumber);
  app->add_option("--lr-f", flags->lr_f, "Adam learning rate, feature extractor");
  app->add_option("--lr-g", flags->lr_g, "Adam learning rate, GCN");
  app->add_option("--dropout", flags->dropout,
                  "Extractor dropout; negative keeps the config value");
  app->add_option("--seed", flags->seed, "Seed for init, shuffling and dropout");
  app->add_flag("--no-shuffle", flags->no_shuffle, "Keep dataset order");
}

TrainConfig MakeTrainConfig(const TrainFlags& flags) {
  TrainConfig config;
  config.epochs = flags.epochs;
  config.batch_size = flags.batch_size;
  config.lr_extractor = flags.lr_f;
  config.lr_gcn = flags.lr_g;
  config.seed = flags.seed;
  config.shuffle = !flags.no_shuffle;
  if (flags.dropout >= 0.0) config.dropout = flags.dropout;
  return config;
}

ModelConfig ResolveModelConfig(const TrainFlags& flags, const DataFlags& data) {
  ModelConfig config = flags.config_file.empty()
                           ? ModelConfig{}
                           : ModelConfig::Load(flags.config_file);
  if (!flags.variant.empty()) {
    config.graph_variant = ParseGraphVariant(flags.variant);
  }
  if (!data.embeddings.empty()) {
    config.embedding_sources = SplitString(data.embeddings, ',');
  }
  return config;
}

// Relative embedding paths are resolved against the data directory.
EmbeddingTable LoadEmbeddings(const ModelConfig& config, const DataFlags& data,
                              uint64_t seed) {
  std::vector<EmbeddingTable> tables;
  for (const auto& source : config.embedding_sources) {
    fs::path path(std::string(Trim(source)));
    if (path.is_relative()) path = fs::path(data.data_dir) / path;
    tables.push_back(EmbeddingTable::Load(path));
  }
  EmbeddingTable table = EmbeddingTable::Concat(tables);
  table.set_oov_policy(ParseOovPolicy(data.oov), seed);
  return table;
}

struct LoadedData {
  std::shared_ptr<const SplitSpec> split;
  std::optional<AuxEdges> aux;
};

LoadedData LoadDataDir(const DataFlags& data) {
  if (data.data_dir.empty()) throw Error("missing --data");
  LoadedData out;
  out.split = std::make_shared<const SplitSpec>(LoadSplits(data.data_dir));
  if (!data.aux_file.empty()) out.aux = LoadAuxEdges(data.aux_file);
  return out;
}

Dataset LoadPhase(const LoadedData& loaded, const DataFlags& data, Phase phase) {
  return LoadFeatures(fs::path(data.data_dir) /
                          (std::string(PhaseName(phase)) + "_features.txt"),
                      loaded.split, phase);
}

GraphInputs BuildInputs(const LoadedData& loaded, const ModelConfig& config,
                        const EmbeddingTable& table) {
  return MakeGraphInputs(*loaded.split, config.graph_variant, table,
                         loaded.aux ? &*loaded.aux : nullptr);
}

void PrintResolved(const CLI::App* sub, const std::string& extra) {
  std::cerr << "# command: " << sub->get_name() << '\n'
            << sub->config_to_str(true, false);
  if (!extra.empty()) std::cerr << extra;
  std::cerr.flush();
}

std::string DescribeModel(const ModelConfig& config, uint64_t seed) {
  std::ostringstream out;
  out << "# model config\n" << config.ToText() << "# seed: " << seed << '\n';
  return out.str();
}

std::ofstream OpenOutput(const std::string& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + file);
  return out;
}

// ---------------------------------------------------------------------------

struct GenSyntheticFlags {
  SynthConfig config;
  std::string out_dir;
  bool force = false;
};

void SetupGenSynthetic(CLI::App* sub, GenSyntheticFlags* f) {
  sub->add_option("--out", f->out_dir, "Output dataset directory")->required();
  sub->add_option("--states", f->config.n_states, "Number of states");
  sub->add_option("--objects", f->config.n_objects, "Number of objects");
  sub->add_option("--seen-fraction", f->config.seen_fraction,
                  "Fraction of all pairs that are seen");
  sub->add_option("--val-unseen", f->config.val_unseen, "Validation unseen pairs");
  sub->add_option("--test-unseen", f->config.test_unseen, "Test unseen pairs");
  sub->add_option("--samples-per-pair", f->config.samples_per_pair,
                  "Samples per pair and phase");
  sub->add_option("--latent-dim", f->config.latent_dim,
                  "Prototype and word-vector width");
  sub->add_option("--feature-dim", f->config.feature_dim, "Sample feature width");
  sub->add_option("--noise", f->config.noise_sigma, "Feature noise sigma");
  sub->add_option("--embed-noise", f->config.embed_noise_sigma,
                  "Word-vector noise sigma");
  sub->add_option("--seed", f->config.seed, "Generator seed");
  sub->add_flag("--force", f->force, "Overwrite existing files");
}

int RunGenSynthetic(const CLI::App* sub, const GenSyntheticFlags& f) {
  PrintResolved(sub, "# seed: " + std::to_string(f.config.seed) + "\n");
  const SynthData data = GenerateSynthetic(f.config);
  WriteSynthetic(data, f.out_dir, f.force);
  std::cerr << "wrote " << data.split->seen_pairs.size() << " seen, "
            << data.split->val_unseen.size() << " val-unseen, "
            << data.split->test_unseen.size() << " test-unseen pairs to "
            << f.out_dir << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct MakeSplitsFlags {
  std::string scene_graphs;
  std::string synonyms;
  std::string out_dir;
  CurationConfig config;
  bool force = false;
};

void SetupMakeSplits(CLI::App* sub, MakeSplitsFlags* f) {
  sub->add_option("--scene-graphs", f->scene_graphs, "Scene-graph box file")
      ->required();
  sub->add_option("--synonyms", f->synonyms, "Synonym map file");
  sub->add_option("--out", f->out_dir, "Output split directory")->required();
  sub->add_option("--min-box", f->config.min_box, "Minimum box side in pixels");
  sub->add_option("--moved-fraction", f->config.train_graph_fraction_moved,
                  "Fraction of train graphs moved to val/test");
  sub->add_option("--val-prob", f->config.val_prob,
                  "Probability a val/test graph goes to val");
  sub->add_option("--test-prob", f->config.test_prob,
                  "Probability a val/test graph goes to test");
  sub->add_option("--unseen-division", f->config.unseen_division,
                  "Probability a non-novel val/test pair becomes unseen");
  sub->add_option("--seed", f->config.seed, "Partition seed");
  sub->add_flag("--force", f->force, "Overwrite existing files");
}

int RunMakeSplits(const CLI::App* sub, MakeSplitsFlags f) {
  PrintResolved(sub, "# seed: " + std::to_string(f.config.seed) + "\n");
  if (!f.synonyms.empty()) f.config.synonym_map = LoadSynonymMap(f.synonyms);
  const auto records = LoadSceneGraphs(f.scene_graphs);
  const VocabResult vocab =
      BuildVocab(FilterBoxes(records, f.config), f.config.synonym_map);
  const PartitionResult result = Partition(vocab, f.config);
  EmitSplits(result.split, f.out_dir, f.force);
  const fs::path dir(f.out_dir);
  OpenOutput((dir / "vocab_report.tsv").string()) << FormatVocabReport(vocab.report);
  WriteBoxList(result.train_boxes, result.split, dir / "train_boxes.tsv");
  WriteBoxList(result.val_boxes, result.split, dir / "val_boxes.tsv");
  WriteBoxList(result.test_boxes, result.split, dir / "test_boxes.tsv");
  std::cerr << result.split.states.size() << " states, "
            << result.split.objects.size() << " objects, "
            << result.split.seen_pairs.size() << " seen, "
            << result.split.val_unseen.size() << " val-unseen, "
            << result.split.test_unseen.size() << " test-unseen pairs\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct BuildGraphFlags {
  DataFlags data;
  std::string variant = "d";
  std::string out;
};

void SetupBuildGraph(CLI::App* sub, BuildGraphFlags* f) {
  sub->add_option("--data", f->data.data_dir, "Split directory")->required();
  sub->add_option("--aux", f->data.aux_file, "Auxiliary edge file");
  sub->add_option("--variant", f->variant, "Graph variant b..e");
  sub->add_option("--out", f->out, "Statistics CSV (default stdout)");
}

int RunBuildGraph(const CLI::App* sub, const BuildGraphFlags& f) {
  PrintResolved(sub, "");
  const LoadedData loaded = LoadDataDir(f.data);
  const CompGraph graph = BuildGraph(*loaded.split, ParseGraphVariant(f.variant),
                                     loaded.aux ? &*loaded.aux : nullptr);
  std::map<int, int> histogram;
  for (int i = 0; i < graph.num_nodes(); ++i) {
    ++histogram[static_cast<int>(graph.degree[i])];
  }
  std::ostringstream csv;
  csv << "kind,key,value\n"
      << "count,num_nodes," << graph.num_nodes() << '\n'
      << "count,nnz," << graph.adjacency.nonZeros() << '\n'
      << "count,num_states," << graph.num_states << '\n'
      << "count,num_objects," << graph.num_objects << '\n'
      << "count,num_compositions," << graph.num_compositions() << '\n'
      << "count,num_aux," << graph.num_aux() << '\n';
  for (const auto& [degree, count] : histogram) {
    csv << "degree," << degree << ',' << count << '\n';
  }
  if (f.out.empty()) {
    std::cout << csv.str();
  } else {
    OpenOutput(f.out) << csv.str();
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainCommandFlags {
  DataFlags data;
  TrainFlags train;
  std::string checkpoint;
  std::string log;
  bool log_timing = false;
  bool validate = false;
  bool save_best = false;
};

void SetupTrain(CLI::App* sub, TrainCommandFlags* f) {
  AddDataFlags(sub, &f->data);
  AddTrainFlags(sub, &f->train);
  sub->add_option("--checkpoint", f->checkpoint, "Checkpoint output file")
      ->required();
  sub->add_option("--log", f->log, "TrainLog CSV output (default stdout)");
  sub->add_flag("--log-timing", f->log_timing,
                "Write wall-clock seconds into the TrainLog");
  sub->add_flag("--validate", f->validate,
                "Evaluate validation AUC after every epoch");
  sub->add_flag("--save-best", f->save_best,
                "Checkpoint the best-validation model (implies --validate)");
}

Validator MakeValidator(const GraphInputs& inputs, const Dataset& val) {
  return [&inputs, &val](const CompatModel& model) {
    return Evaluate(model, inputs, val).auc;
  };
}

int RunTrain(const CLI::App* sub, const TrainCommandFlags& f) {
  const ModelConfig config = ResolveModelConfig(f.train, f.data);
  PrintResolved(sub, DescribeModel(config, f.train.seed));
  const LoadedData loaded = LoadDataDir(f.data);
  const Dataset train = LoadPhase(loaded, f.data, Phase::kTrain);
  const EmbeddingTable table = LoadEmbeddings(config, f.data, f.train.seed);
  const GraphInputs inputs = BuildInputs(loaded, config, table);
  CompatModel model = BuildModel(config, train.dim, table.dim(), f.train.seed);

  std::optional<Dataset> val;
  Validator validator;
  if (f.validate || f.save_best) {
    val = LoadPhase(loaded, f.data, Phase::kVal);
    validator = MakeValidator(inputs, *val);
  }
  TrainResult result =
      Fit(std::move(model), inputs, train, MakeTrainConfig(f.train), validator);
  const CompatModel& chosen =
      f.save_best && result.best_model ? *result.best_model : result.model;
  SaveCheckpoint(f.checkpoint, config, train.dim, table.dim(), chosen);
  if (f.log.empty()) {
    result.log.WriteCsv(std::cout, f.log_timing);
  } else {
    std::ofstream out = OpenOutput(f.log);
    result.log.WriteCsv(out, f.log_timing);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalFlags {
  DataFlags data;
  std::string checkpoint;
  std::string phase = "test";
  std::string primitive_at = "sentinel";
  std::string out;
  std::string curve;
  bool pretty = false;
};

void SetupEval(CLI::App* sub, EvalFlags* f) {
  AddDataFlags(sub, &f->data);
  // Checked by hand so the message is stable.
  sub->add_option("--checkpoint", f->checkpoint, "Checkpoint to evaluate");
  sub->add_option("--phase", f->phase, "val | test");
  sub->add_option("--primitive-at", f->primitive_at,
                  "Where state/object accuracy is measured: sentinel | best-hm");
  sub->add_option("--out", f->out, "EvalResult CSV (default stdout)");
  sub->add_option("--curve", f->curve, "Seen/unseen curve CSV");
  sub->add_flag("--pretty", f->pretty, "Print a human-readable table to stderr");
}

void PrintPretty(const EvalResult& r) {
  std::cerr << std::fixed << std::setprecision(4)
            << "  AUC          " << r.auc << '\n'
            << "  best HM      " << r.best_hm << "  (bias " << r.best_hm_bias
            << ")\n"
            << "  best seen    " << r.best_seen << '\n'
            << "  best unseen  " << r.best_unseen << '\n'
            << "  state acc    " << r.state_acc << '\n'
            << "  object acc   " << r.obj_acc << '\n';
  std::cerr.unsetf(std::ios::floatfield);
}

int RunEval(const CLI::App* sub, const EvalFlags& f) {
  if (f.checkpoint.empty()) throw Error("missing --checkpoint");
  const Checkpoint ckpt = LoadCheckpoint(f.checkpoint);
  PrintResolved(sub, DescribeModel(ckpt.config, 0));
  DataFlags data = f.data;
  ModelConfig config = ckpt.config;
  if (!data.embeddings.empty()) {
    config.embedding_sources = SplitString(data.embeddings, ',');
  }
  const Phase phase = ParsePhase(f.phase);
  if (phase == Phase::kTrain) throw Error("--phase must be val or test");
  const LoadedData loaded = LoadDataDir(data);
  const Dataset dataset = LoadPhase(loaded, data, phase);
  if (dataset.dim != ckpt.input_width) {
    throw Error("feature width " + std::to_string(dataset.dim) +
                " does not match checkpoint input width " +
                std::to_string(ckpt.input_width));
  }
  const EmbeddingTable table = LoadEmbeddings(config, data, 0);
  if (table.dim() != ckpt.embedding_width) {
    throw Error("embedding width " + std::to_string(table.dim()) +
                " does not match checkpoint embedding width " +
                std::to_string(ckpt.embedding_width));
  }
  const GraphInputs inputs = BuildInputs(loaded, config, table);
  const EvalResult result =
      Evaluate(ckpt.model, inputs, dataset, ParsePrimitiveAt(f.primitive_at));
  if (f.out.empty()) {
    WriteResultCsv(std::cout, result);
  } else {
    std::ofstream out = OpenOutput(f.out);
    WriteResultCsv(out, result);
  }
  if (!f.curve.empty()) {
    std::ofstream out = OpenOutput(f.curve);
    WriteCurveCsv(out, result.curve);
  }
  if (f.pretty) PrintPretty(result);
  return 0;
}

// ---------------------------------------------------------------------------

struct AblateFlags {
  DataFlags data;
  TrainFlags train;
  std::string variants = "a,b,c,d";
  std::string out;
};

void SetupAblate(CLI::App* sub, AblateFlags* f) {
  AddDataFlags(sub, &f->data);
  AddTrainFlags(sub, &f->train);
  sub->add_option("--variants", f->variants,
                  "Comma list of graph variants (e requires --aux)");
  sub->add_option("--out", f->out, "Comparison CSV (default stdout)");
}

int RunAblate(const CLI::App* sub, const AblateFlags& f) {
  const ModelConfig base = ResolveModelConfig(f.train, f.data);
  PrintResolved(sub, DescribeModel(base, f.train.seed));
  const LoadedData loaded = LoadDataDir(f.data);
  const Dataset train = LoadPhase(loaded, f.data, Phase::kTrain);
  const Dataset val = LoadPhase(loaded, f.data, Phase::kVal);
  const EmbeddingTable table = LoadEmbeddings(base, f.data, f.train.seed);

  std::ostringstream csv;
  csv << "variant,connections,val_auc,best_hm\n";
  for (const auto& token : SplitString(f.variants, ',')) {
    ModelConfig config = base;
    config.graph_variant = ParseGraphVariant(Trim(token));
    if (config.graph_variant == GraphVariant::kFullCgePlusAux && !loaded.aux) {
      throw Error("variant e requires --aux");
    }
    const GraphInputs inputs = BuildInputs(loaded, config, table);
    CompatModel model = BuildModel(config, train.dim, table.dim(), f.train.seed);
    const TrainResult trained =
        Fit(std::move(model), inputs, train, MakeTrainConfig(f.train));
    const EvalResult r = Evaluate(trained.model, inputs, val);
    csv << GraphVariantLetter(config.graph_variant) << ','
        << GraphVariantName(config.graph_variant) << ','
        << FormatDouble(r.auc) << ',' << FormatDouble(r.best_hm) << '\n';
    std::cerr << "variant " << GraphVariantLetter(config.graph_variant)
              << ": val AUC " << FormatDouble(r.auc, 4) << '\n';
  }
  if (f.out.empty()) {
    std::cout << csv.str();
  } else {
    OpenOutput(f.out) << csv.str();
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct GradCheckFlags {
  std::string config_file;
  std::string data_dir;
  uint64_t seed = 0;
  int samples = 50;
  int batch = 8;
  double step = 1e-5;
  double threshold = 1e-4;
};

void SetupGradCheck(CLI::App* sub, GradCheckFlags* f) {
  sub->add_option("--config", f->config_file,
                  "Model config (default: small two-layer reference model)");
  sub->add_option("--data", f->data_dir,
                  "Dataset directory (default: built-in synthetic data)");
  sub->add_option("--seed", f->seed, "Seed for data, init and sampling");
  sub->add_option("--samples", f->samples, "Parameters to check")
      ->check(CLI::PositiveNumber);
  sub->add_option("--batch", f->batch, "Training samples in the batch")
      ->check(CLI::PositiveNumber);
  sub->add_option("--step", f->step, "Central-difference step");
  sub->add_option("--threshold", f->threshold,
                  "Fail when the max relative error exceeds this");
}

ModelConfig ReferenceGradCheckConfig() {
  ModelConfig config;
  config.extractor_kind = FeatureExtractor::Kind::kMlp3;
  config.extractor_widths = {16, 16, 8};
  config.gcn_mode = GcnMode::kGcn;
  config.gcn_widths = {12};
  config.graph_variant = GraphVariant::kFullCge;
  return config;
}

int RunGradCheck(const CLI::App* sub, const GradCheckFlags& f) {
  ModelConfig config = f.config_file.empty() ? ReferenceGradCheckConfig()
                                             : ModelConfig::Load(f.config_file);
  PrintResolved(sub, DescribeModel(config, f.seed));

  std::shared_ptr<const SplitSpec> split;
  Dataset train;
  EmbeddingTable table;
  if (f.data_dir.empty()) {
    SynthConfig synth;
    synth.n_states = 4;
    synth.n_objects = 4;
    synth.seen_fraction = 0.5;
    synth.val_unseen = 2;
    synth.test_unseen = 2;
    synth.samples_per_pair = 2;
    synth.feature_dim = 10;
    synth.latent_dim = 6;
    synth.seed = f.seed;
    SynthData data = GenerateSynthetic(synth);
    split = data.split;
    train = std::move(data.train);
    table = EmbeddingTable::FromSource(std::move(data.embeddings));
  } else {
    DataFlags data{f.data_dir, "", "error", ""};
    const LoadedData loaded = LoadDataDir(data);
    split = loaded.split;
    train = LoadPhase(loaded, data, Phase::kTrain);
    table = LoadEmbeddings(config, data, f.seed);
  }
  const GraphInputs inputs =
      MakeGraphInputs(*split, config.graph_variant, table);
  config.extractor_dropout = 0.0;
  const CompatModel model = BuildModel(config, train.dim, table.dim(), f.seed);

  std::vector<int> rows;
  const int n = std::min<int>(f.batch, static_cast<int>(train.size()));
  for (int i = 0; i < n; ++i) rows.push_back(i);
  const std::vector<int> all_labels = SeenLabelIndices(train);
  const std::vector<int> labels(all_labels.begin(), all_labels.begin() + n);
  GradCheckOptions options;
  options.step = f.step;
  options.num_samples = f.samples;
  options.seed = f.seed;
  const GradCheckResult r =
      GradCheck(model, inputs, train.Features(rows), labels, options);
  std::cout << "max_rel_error," << FormatDouble(r.max_rel_error) << '\n'
            << "checked," << r.checked << '\n'
            << "skipped_kinks," << r.skipped_kinks << '\n'
            << "worst_param," << r.worst_param << '\n';
  if (!(r.max_rel_error <= f.threshold)) {
    std::cerr << "gradient check failed: max relative error "
              << FormatDouble(r.max_rel_error, 6) << " > " << f.threshold
              << " (" << r.worst_param << ")\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct RetrieveFlags {
  DataFlags data;
  std::string checkpoint;
  std::string phase = "test";
  std::string pair;
  int k = 10;
};

void SetupRetrieve(CLI::App* sub, RetrieveFlags* f) {
  AddDataFlags(sub, &f->data);
  sub->add_option("--checkpoint", f->checkpoint, "Trained checkpoint");
  sub->add_option("--phase", f->phase, "train | val | test");
  sub->add_option("--pair", f->pair, "Query composition \"state,object\"")
      ->required();
  sub->add_option("-k,--top-k", f->k, "Number of results")
      ->check(CLI::PositiveNumber);
}

int RunRetrieve(const CLI::App* sub, const RetrieveFlags& f) {
  if (f.checkpoint.empty()) throw Error("missing --checkpoint");
  const Checkpoint ckpt = LoadCheckpoint(f.checkpoint);
  PrintResolved(sub, DescribeModel(ckpt.config, 0));
  ModelConfig config = ckpt.config;
  if (!f.data.embeddings.empty()) {
    config.embedding_sources = SplitString(f.data.embeddings, ',');
  }
  const LoadedData loaded = LoadDataDir(f.data);
  const Dataset dataset = LoadPhase(loaded, f.data, ParsePhase(f.phase));
  const std::vector<std::string> parts = SplitString(f.pair, ',');
  if (parts.size() != 2) throw Error("--pair must be \"state,object\"");
  const auto state = loaded.split->FindState(NormalizeName(parts[0]));
  const auto object = loaded.split->FindObject(NormalizeName(parts[1]));
  if (!state) throw Error("unknown state '" + parts[0] + "'");
  if (!object) throw Error("unknown object '" + parts[1] + "'");
  const EmbeddingTable table = LoadEmbeddings(config, f.data, 0);
  const GraphInputs inputs = BuildInputs(loaded, config, table);
  const RetrievalResult r =
      RetrieveTopK(ckpt.model, inputs, dataset, {*state, *object}, f.k);
  std::cout << "rank,id,score\n";
  for (size_t i = 0; i < r.ids.size(); ++i) {
    std::cout << i + 1 << ',' << r.ids[i] << ',' << FormatDouble(r.scores[i])
              << '\n';
  }
  if (r.truncated) {
    std::cerr << "only " << r.ids.size() << " samples available\n";
  }
  return 0;
}

void ApplyThreadCap() {
  const char* env = std::getenv("CZSL_THREADS");
  if (env == nullptr || *env == '\0') return;
  const int64_t threads = ParseInt(env, "CZSL_THREADS");
  if (threads < 0) throw Error("CZSL_THREADS must be >= 0");
  Eigen::setNbThreads(threads == 0 ? 1 : static_cast<int>(threads));
}

}  // namespace
}  // namespace czsl

int main(int argc, char** argv) {
  using namespace czsl;
  CLI::App app{"Compositional graph embeddings for zero-shot state/object "
               "recognition"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  GenSyntheticFlags gen;
  MakeSplitsFlags splits;
  BuildGraphFlags graph;
  TrainCommandFlags train;
  EvalFlags eval;
  AblateFlags ablate;
  GradCheckFlags grad;
  RetrieveFlags retrieve;

  auto* gen_cmd = app.add_subcommand("gen-synthetic", "Write a synthetic dataset");
  SetupGenSynthetic(gen_cmd, &gen);
  auto* splits_cmd = app.add_subcommand(
      "make-splits", "Curate a compositional split from scene-graph boxes");
  SetupMakeSplits(splits_cmd, &splits);
  auto* graph_cmd =
      app.add_subcommand("build-graph", "Print compositional graph statistics");
  SetupBuildGraph(graph_cmd, &graph);
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  SetupTrain(train_cmd, &train);
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  SetupEval(eval_cmd, &eval);
  auto* ablate_cmd =
      app.add_subcommand("ablate-graph", "Compare graph connection variants");
  SetupAblate(ablate_cmd, &ablate);
  auto* grad_cmd = app.add_subcommand(
      "grad-check", "Finite-difference check of the analytic gradients");
  SetupGradCheck(grad_cmd, &grad);
  auto* retrieve_cmd =
      app.add_subcommand("retrieve", "Top-k samples for a composition");
  SetupRetrieve(retrieve_cmd, &retrieve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    ApplyThreadCap();
    if (*gen_cmd) return RunGenSynthetic(gen_cmd, gen);
    if (*splits_cmd) return RunMakeSplits(splits_cmd, splits);
    if (*graph_cmd) return RunBuildGraph(graph_cmd, graph);
    if (*train_cmd) return RunTrain(train_cmd, train);
    if (*eval_cmd) return RunEval(eval_cmd, eval);
    if (*ablate_cmd) return RunAblate(ablate_cmd, ablate);
    if (*grad_cmd) return RunGradCheck(grad_cmd, grad);
    if (*retrieve_cmd) return RunRetrieve(retrieve_cmd, retrieve);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
