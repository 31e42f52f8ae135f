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

#ifndef CITYPULSE_CONFIG_HPP_
#define CITYPULSE_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "citypulse/classify.hpp"
#include "citypulse/features.hpp"
#include "citypulse/geo.hpp"
#include "citypulse/topics.hpp"

namespace citypulse {

struct CityConfig {
  std::string key;
  GeoBox box;
  int utc_offset_minutes = 0;
  std::vector<std::string> langs;
  PlaceMode place_mode = PlaceMode::kContainment;
};

/// Run configuration: a flat map of dotted keys to JSON values.
///
/// File format, one entry per line:
///
///   # comment
///   [lda]                 optional section header, prefixes later keys
///   topics = 50           value parsed as JSON when it parses
///   preset = travel       ... and kept as a plain string otherwise
///   city.rio.sw = [-23.08302, -43.795449]
///
/// Keys must be known (see defaults()) or follow city.<name>.<field> with
/// field one of sw, ne, utc_offset, langs, place_mode. Later entries win.
class RunConfig {
 public:
  /// Every parameter at its default, plus the five bundled cities.
  static RunConfig defaults();

  /// Throws Error(ConfigError) with `origin` and the line number.
  void merge_text(std::string_view text, std::string_view origin = "config");
  /// Throws Error(IoError) when the file cannot be read.
  void merge_file(const std::string& path);
  /// `raw` is parsed like a file value.
  void set(const std::string& key, std::string_view raw);
  void set_json(const std::string& key, nlohmann::json value);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const nlohmann::json& at(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::uint64_t get_size(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  std::uint64_t seed() const { return get_size("seed"); }
  std::vector<std::string> cities() const;
  /// Throws Error(ConfigError) for unknown or incomplete cities.
  CityConfig city(std::string_view key) const;
  /// The city named by the "city" key.
  CityConfig current_city() const { return city(get_string("city")); }

  /// profile is "bow", "lda" or "embed". max_size 0 means unlimited.
  VocabularyParams vocabulary(std::string_view profile) const;
  SkipgramConfig skipgram() const;
  LdaConfig lda() const;
  LinearConfig linear() const;
  ForestConfig forest() const;

  /// Parses every block and each module's validate(); throws Error(ConfigError).
  void validate() const;

  /// Effective values, sorted by key.
  nlohmann::json to_json() const;
  const std::map<std::string, nlohmann::json>& values() const { return values_; }

 private:
  void check_key(const std::string& key) const;
  std::map<std::string, nlohmann::json> values_;
};

/// "[lat, lon]" as a JSON pair.
GeoPoint parse_lat_lon(const nlohmann::json& j, std::string_view key);

}  // namespace citypulse

#endif  // CITYPULSE_CONFIG_HPP_
