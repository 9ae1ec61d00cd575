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

#include <bit>
#include <cstring>
#include <fstream>

#include "czsl/common.h"
#include "czsl/model_config.h"

namespace czsl {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'C', 'Z', 'S', 'L', 'C', 'K', 'P', 'T'};

template <typename T>
void WritePod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T ReadPod(std::istream& in, const std::string& what) {
  T value;
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw Error("truncated checkpoint while reading " + what);
  }
  return value;
}

void WriteString(std::ostream& out, const std::string& text) {
  WritePod<uint32_t>(out, static_cast<uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string ReadString(std::istream& in, const std::string& what) {
  const uint32_t size = ReadPod<uint32_t>(in, what);
  std::string text(size, '\0');
  if (size && !in.read(text.data(), size)) {
    throw Error("truncated checkpoint while reading " + what);
  }
  return text;
}

}  // namespace

void SaveCheckpoint(const std::filesystem::path& file, const ModelConfig& config,
                    int input_width, int embedding_width,
                    const CompatModel& model) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + file.string());
  out.write(kMagic, sizeof(kMagic));
  WritePod<uint32_t>(out, kCheckpointVersion);
  WriteString(out, config.ToText());
  WritePod<uint32_t>(out, static_cast<uint32_t>(input_width));
  WritePod<uint32_t>(out, static_cast<uint32_t>(embedding_width));
  const auto params = Parameters(const_cast<CompatModel&>(model));
  WritePod<uint32_t>(out, static_cast<uint32_t>(params.size()));
  for (const auto& p : params) {
    WriteString(out, p.name);
    const Eigen::MatrixXd& m = *p.value;
    WritePod<uint64_t>(out, static_cast<uint64_t>(m.rows()));
    WritePod<uint64_t>(out, static_cast<uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) WritePod<double>(out, m(r, c));
    }
  }
  if (!out) throw Error("write failed: " + file.string());
}

Checkpoint LoadCheckpoint(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + file.string());
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(file.string() + ": not a czsl checkpoint");
  }
  const uint32_t version = ReadPod<uint32_t>(in, "version");
  if (version != kCheckpointVersion) {
    throw Error(file.string() + ": unsupported checkpoint version " +
                std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.config = ModelConfig::Parse(ReadString(in, "config"));
  ckpt.input_width = static_cast<int>(ReadPod<uint32_t>(in, "input width"));
  ckpt.embedding_width =
      static_cast<int>(ReadPod<uint32_t>(in, "embedding width"));
  ckpt.model =
      BuildModel(ckpt.config, ckpt.input_width, ckpt.embedding_width, 0);
  auto params = Parameters(ckpt.model);
  const uint32_t count = ReadPod<uint32_t>(in, "tensor count");
  if (count != params.size()) {
    throw Error(file.string() + ": checkpoint has " + std::to_string(count) +
                " tensors, model expects " + std::to_string(params.size()));
  }
  for (auto& p : params) {
    const std::string name = ReadString(in, "tensor name");
    if (name != p.name) {
      throw Error(file.string() + ": expected tensor '" + p.name + "', found '" +
                  name + "'");
    }
    const uint64_t rows = ReadPod<uint64_t>(in, name + " rows");
    const uint64_t cols = ReadPod<uint64_t>(in, name + " cols");
    if (rows != static_cast<uint64_t>(p.value->rows()) ||
        cols != static_cast<uint64_t>(p.value->cols())) {
      throw Error(file.string() + ": shape mismatch for tensor '" + name + "'");
    }
    for (uint64_t r = 0; r < rows; ++r) {
      for (uint64_t c = 0; c < cols; ++c) {
        (*p.value)(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            ReadPod<double>(in, name);
      }
    }
  }
  return ckpt;
}

}  // namespace czsl
