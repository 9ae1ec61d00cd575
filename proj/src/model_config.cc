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

#include "czsl/model_config.h"

#include <set>
#include <sstream>

#include "czsl/common.h"

namespace czsl {
namespace {

std::vector<int> ParseIntList(const std::string& text, const std::string& key) {
  std::vector<int> out;
  for (const auto& part : SplitString(text, ',')) {
    if (Trim(part).empty()) continue;
    out.push_back(static_cast<int>(ParseInt(part, key)));
  }
  return out;
}

std::string JoinInts(const std::vector<int>& values) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

}  // namespace

ModelConfig ModelConfig::Parse(const std::string& text) {
  ModelConfig config;
  std::set<std::string> keys_seen;
  std::istringstream in(text);
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string where = "config line " + std::to_string(line_number);
    const std::string_view trimmed = Trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const size_t eq = trimmed.find('=');
    if (eq == std::string_view::npos) throw Error(where + ": expected key=value");
    const std::string key(Trim(trimmed.substr(0, eq)));
    const std::string value(Trim(trimmed.substr(eq + 1)));
    if (!keys_seen.insert(key).second) {
      throw Error(where + ": duplicate key '" + key + "'");
    }
    if (key == "extractor.variant") {
      if (value == "identity") {
        config.extractor_kind = FeatureExtractor::Kind::kIdentity;
      } else if (value == "mlp3") {
        config.extractor_kind = FeatureExtractor::Kind::kMlp3;
      } else {
        throw Error(where + ": unknown extractor variant '" + value + "'");
      }
    } else if (key == "extractor.widths") {
      config.extractor_widths = ParseIntList(value, where);
      if (config.extractor_widths.size() != 3) {
        throw Error(where + ": extractor.widths needs three values h1,h2,d");
      }
    } else if (key == "extractor.dropout") {
      config.extractor_dropout = ParseDouble(value, where);
    } else if (key == "gcn.mode") {
      config.gcn_mode = ParseGcnMode(value);
    } else if (key == "gcn.widths") {
      config.gcn_widths = ParseIntList(value, where);
    } else if (key == "gcn.alpha") {
      config.gcn_alpha = ParseDouble(value, where);
    } else if (key == "gcn.lambda") {
      config.gcn_lambda = ParseDouble(value, where);
    } else if (key == "graph.variant") {
      config.graph_variant = ParseGraphVariant(value);
    } else if (key == "embeddings.sources") {
      config.embedding_sources.clear();
      for (const auto& part : SplitString(value, ',')) {
        const std::string source(Trim(part));
        if (!source.empty()) config.embedding_sources.push_back(source);
      }
      if (config.embedding_sources.empty()) {
        throw Error(where + ": embeddings.sources is empty");
      }
    } else {
      throw Error(where + ": unknown key '" + key + "'");
    }
  }
  return config;
}

ModelConfig ModelConfig::Load(const std::filesystem::path& file) {
  std::string text;
  for (const auto& line : ReadLines(file)) text += line + "\n";
  return Parse(text);
}

std::string ModelConfig::ToText() const {
  std::ostringstream out;
  out << "extractor.variant="
      << (extractor_kind == FeatureExtractor::Kind::kIdentity ? "identity"
                                                               : "mlp3")
      << '\n';
  out << "extractor.widths=" << JoinInts(extractor_widths) << '\n';
  out << "extractor.dropout=" << FormatDouble(extractor_dropout) << '\n';
  out << "gcn.mode=" << GcnModeName(gcn_mode) << '\n';
  out << "gcn.widths=" << JoinInts(gcn_widths) << '\n';
  out << "gcn.alpha=" << FormatDouble(gcn_alpha) << '\n';
  out << "gcn.lambda=" << FormatDouble(gcn_lambda) << '\n';
  out << "graph.variant=" << GraphVariantName(graph_variant) << '\n';
  out << "embeddings.sources=";
  for (size_t i = 0; i < embedding_sources.size(); ++i) {
    if (i) out << ',';
    out << embedding_sources[i];
  }
  out << '\n';
  return out.str();
}

CompatModel BuildModel(const ModelConfig& config, int input_width,
                       int embedding_width, uint64_t seed) {
  const bool direct = config.graph_variant == GraphVariant::kDirectEmbedding;
  CompatModel model;
  if (config.extractor_kind == FeatureExtractor::Kind::kIdentity) {
    model.extractor = MakeIdentityExtractor(input_width);
  } else {
    if (config.extractor_widths.size() != 3) {
      throw Error("extractor.widths needs three values h1,h2,d");
    }
    std::array<int, 4> widths = {input_width, config.extractor_widths[0],
                                 config.extractor_widths[1],
                                 config.extractor_widths[2]};
    if (direct) widths[3] = embedding_width;
    model.extractor = MakeMlp3Extractor(widths, config.extractor_dropout,
                                        MixSeed(seed, 1));
  }
  model.dim = model.extractor.output_width;
  if (direct) {
    if (model.dim != embedding_width) {
      throw Error("direct embedding requires feature dimension d = P (" +
                  std::to_string(embedding_width) + "), got " +
                  std::to_string(model.dim));
    }
    return model;
  }
  std::vector<int> widths = {embedding_width};
  widths.insert(widths.end(), config.gcn_widths.begin(), config.gcn_widths.end());
  widths.push_back(model.dim);
  model.gcn = InitGcn(widths, model.dim, config.gcn_mode, MixSeed(seed, 2),
                      config.gcn_alpha, config.gcn_lambda);
  return model;
}

}  // namespace czsl
