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

#include "citypulse/store.hpp"

#include <fcntl.h>
#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "citypulse/error.hpp"

namespace citypulse {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void io_error(const std::string& m) { throw Error(ErrorKind::kIoError, m); }

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    io_error("SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 15]);
  }
  return out;
}

std::string read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_error("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string file_sha256(const fs::path& path) { return sha256_hex(read_file_bytes(path)); }

ArtifactWriter::ArtifactWriter(const ArtifactStore& store, std::string command, std::vector<ArtifactInput> inputs,
                               json config, json params) {
  json in = json::array();
  for (const auto& i : inputs) {
    in.push_back({{"role", i.role}, {"file", i.path.filename().string()}, {"sha256", file_sha256(i.path)}});
  }
  std::string key = command + "\n" + config.dump() + "\n" + params.dump() + "\n";
  for (const auto& i : in) key += i["role"].get<std::string>() + "=" + i["sha256"].get<std::string>() + "\n";
  name_ = command + "-" + sha256_hex(key).substr(0, 12);

  manifest_ = {{"format", "citypulse-manifest"}, {"version", 1},   {"artifact", name_}, {"command", command},
               {"config", std::move(config)},    {"params", params}, {"inputs", std::move(in)}};

  std::error_code ec;
  fs::create_directories(store.root(), ec);
  if (ec) io_error("cannot create store " + store.root().string() + ": " + ec.message());
  final_ = store.root() / name_;
  staging_ = store.root() / ("." + name_ + ".partial");
  lock_ = store.root() / (name_ + ".lock");

  const int fd = ::open(lock_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST) throw Error(ErrorKind::kLocked, "artifact " + name_ + " is locked by " + lock_.string());
    io_error("cannot create lock " + lock_.string() + ": " + std::strerror(errno));
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);

  fs::remove_all(staging_, ec);
  fs::create_directories(staging_, ec);
  if (ec) {
    fs::remove(lock_, ec);
    io_error("cannot create " + staging_.string());
  }
}

ArtifactWriter::~ArtifactWriter() {
  std::error_code ec;
  if (!committed_) fs::remove_all(staging_, ec);
  fs::remove(lock_, ec);
}

fs::path ArtifactWriter::file(const std::string& name) const { return staging_ / name; }

void ArtifactWriter::write(const std::string& name, std::string_view bytes) {
  std::ofstream out(file(name), std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) io_error("cannot write " + file(name).string());
}

fs::path ArtifactWriter::commit() {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(staging_)) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  json outputs = json::object();
  for (const auto& n : names) outputs[n] = file_sha256(staging_ / n);
  manifest_["outputs"] = std::move(outputs);
  write("manifest.json", manifest_.dump(2) + "\n");

  std::error_code ec;
  fs::remove_all(final_, ec);
  fs::rename(staging_, final_, ec);
  if (ec) io_error("cannot move " + staging_.string() + " into place: " + ec.message());
  committed_ = true;
  fs::remove(lock_, ec);
  return final_;
}

json manifest_of(const fs::path& file) {
  const fs::path m = file.parent_path() / "manifest.json";
  std::ifstream in(m, std::ios::binary);
  if (!in) throw Error(ErrorKind::kFormatError, file.string() + " is not inside an artifact (no manifest.json)");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object() || j.value("format", "") != "citypulse-manifest") {
    throw Error(ErrorKind::kFormatError, m.string() + " is not an artifact manifest");
  }
  if (j.value("version", 0) != 1) throw Error(ErrorKind::kFormatError, m.string() + ": unsupported manifest version");
  return j;
}

void check_input(const json& manifest, const std::string& role, const fs::path& supplied) {
  for (const auto& i : manifest.at("inputs")) {
    if (i.at("role") != role) continue;
    if (i.at("sha256") != file_sha256(supplied)) {
      throw Error(ErrorKind::kFormatError, manifest.at("artifact").get<std::string>() + " was built from a different " +
                                               role + " (" + i.at("file").get<std::string>() + ") than " +
                                               supplied.string());
    }
    return;
  }
  throw Error(ErrorKind::kFormatError, manifest.at("artifact").get<std::string>() + " records no " + role + " input");
}

json read_header(std::istream& in, std::string_view magic, int version) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::kFormatError, "empty file, expected " + std::string(magic));
  json h = json::parse(line, nullptr, false);
  if (h.is_discarded() || !h.is_object() || h.value("magic", "") != magic) {
    throw Error(ErrorKind::kFormatError, "not a " + std::string(magic) + " file");
  }
  if (h.value("version", 0) != version) {
    throw Error(ErrorKind::kFormatError, std::string(magic) + " version " + h.value("version", json(0)).dump() +
                                             " is not supported");
  }
  return h;
}

}  // namespace citypulse
