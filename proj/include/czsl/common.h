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

#ifndef CZSL_COMMON_H_
#define CZSL_COMMON_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace czsl {

// All recoverable failures (bad input files, shape mismatches, numerical
// blow-ups) surface as this exception type. The message is meant for humans.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lowercase, trim, and collapse internal whitespace runs to one space.
std::string NormalizeName(std::string_view name);

std::vector<std::string> SplitString(std::string_view text, char delim);
std::vector<std::string> SplitWhitespace(std::string_view text);
std::string_view Trim(std::string_view text);

// Reads a whole text file into lines. Strips a trailing '\r' from each line.
std::vector<std::string> ReadLines(const std::filesystem::path& path);

double ParseDouble(std::string_view text, std::string_view context);
int64_t ParseInt(std::string_view text, std::string_view context);

// printf-style "%.<precision>g".
std::string FormatDouble(double value, int precision = 17);

// Mixes two 64-bit values into a well-distributed seed (splitmix64 finalizer).
uint64_t MixSeed(uint64_t a, uint64_t b);
uint64_t HashString(std::string_view text);

}  // namespace czsl

#endif  // CZSL_COMMON_H_
