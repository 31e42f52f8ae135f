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

#ifndef CITYPULSE_STORE_HPP_
#define CITYPULSE_STORE_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace citypulse {

std::string sha256_hex(std::string_view bytes);
/// Throws Error(IoError).
std::string file_sha256(const std::filesystem::path& path);
std::string read_file_bytes(const std::filesystem::path& path);

/// One file an artifact was computed from. Only the base name is recorded so
/// manifests do not depend on where the store lives.
struct ArtifactInput {
  std::string role;
  std::filesystem::path path;
};

/// Artifacts are directories named <command>-<12 hex digits>. The digits are
/// the leading SHA-256 of the command, the effective config, the extra
/// parameters and the content hash of every input, so the same inputs always
/// land in the same directory and a change to any of them moves it.
///
/// Each directory holds its output files and manifest.json:
///
///   {"artifact", "command", "config", "params",
///    "inputs": [{"role", "file", "sha256"}], "outputs": {"<file>": "<sha256>"},
///    "format": "citypulse-manifest", "version": 1}
///
/// Manifests carry no timestamps, so reruns are byte-identical.
class ArtifactStore {
 public:
  explicit ArtifactStore(std::filesystem::path root) : root_(std::move(root)) {}
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

/// Writes one artifact. Construction takes <root>/<name>.lock with an
/// exclusive create and throws Error(Locked) when another writer holds it.
/// Files are staged in a hidden directory and moved into place by commit();
/// destruction without commit discards them and releases the lock.
class ArtifactWriter {
 public:
  ArtifactWriter(const ArtifactStore& store, std::string command, std::vector<ArtifactInput> inputs,
                 nlohmann::json config, nlohmann::json params = nlohmann::json::object());
  ~ArtifactWriter();
  ArtifactWriter(const ArtifactWriter&) = delete;
  ArtifactWriter& operator=(const ArtifactWriter&) = delete;

  const std::string& name() const { return name_; }
  /// Final location, valid after commit().
  std::filesystem::path dir() const { return final_; }
  /// Staging path of an output file.
  std::filesystem::path file(const std::string& name) const;
  void write(const std::string& name, std::string_view bytes);
  /// Writes the manifest and moves the directory into place.
  std::filesystem::path commit();

 private:
  std::string name_;
  std::filesystem::path final_;
  std::filesystem::path staging_;
  std::filesystem::path lock_;
  nlohmann::json manifest_;
  bool committed_ = false;
};

/// manifest.json of the artifact holding `file` (its parent directory).
/// Throws Error(FormatError) when absent or not a manifest.
nlohmann::json manifest_of(const std::filesystem::path& file);

/// Checks that `supplied` has the content hash recorded for `role` in the
/// manifest. Throws Error(FormatError) naming both when they differ.
void check_input(const nlohmann::json& manifest, const std::string& role, const std::filesystem::path& supplied);

/// First line of a file when it is a JSON header, checked for `magic` and
/// `version`. Throws Error(FormatError).
nlohmann::json read_header(std::istream& in, std::string_view magic, int version);

}  // namespace citypulse

#endif  // CITYPULSE_STORE_HPP_
