// Copyright 2026 The CityPulse Authors.
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

#ifndef CITYPULSE_CLI_HPP_
#define CITYPULSE_CLI_HPP_

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "citypulse/features.hpp"

namespace citypulse {

/// Runs the citypulse command line. `args` excludes the program name. Each
/// successful command prints the directory of the artifact it wrote and
/// returns 0. Failures print one line
///
///   error: <ErrorClass>: <message>
///
/// to `err` and return 1 (2 for command-line usage errors).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Environment variable naming the artifact root; overrides store.dir.
inline constexpr const char* kStoreEnv = "CITYPULSE_STORE";

/// Token docs file: a header line {"magic": "CPTOK1", "version": 1,
/// "preset": ...} then one {"id", "lang", "tokens"} object per line.
struct TokenDocsFile {
  std::string preset;
  std::vector<std::string> ids;
  std::vector<std::string> langs;
  std::vector<TokenDoc> docs;
};

void write_token_docs(std::ostream& out, const TokenDocsFile& f);
/// Throws Error(FormatError).
TokenDocsFile read_token_docs(std::istream& in);

/// Labels file: CSV with header id,label,split,modes. label is 1 or -1, split
/// is train, test or empty, modes are ';'-separated.
struct LabelRow {
  int label = -1;
  std::string split;
  std::vector<std::string> modes;
};

void write_labels(std::ostream& out, const std::map<std::string, LabelRow>& labels);
/// Throws Error(FormatError).
std::map<std::string, LabelRow> read_labels(std::istream& in);

}  // namespace citypulse

#endif  // CITYPULSE_CLI_HPP_
