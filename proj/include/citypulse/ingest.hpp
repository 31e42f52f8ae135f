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

#ifndef CITYPULSE_INGEST_HPP_
#define CITYPULSE_INGEST_HPP_

#include <chrono>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "citypulse/geo.hpp"
#include "citypulse/timeutil.hpp"

namespace citypulse {

struct EntityCounts {
  std::uint32_t hashtags = 0;
  std::uint32_t user_mentions = 0;
  std::uint32_t urls = 0;
  std::uint32_t media = 0;

  friend bool operator==(const EntityCounts&, const EntityCounts&) = default;
};

/// One parsed status. Coordinates are held as (lat, lon) even though the wire
/// format carries [lon, lat] pairs.
struct TweetRecord {
  std::string id;
  std::string text;
  Timestamp created_at_utc;
  std::string lang;
  std::optional<GeoPoint> coordinate;
  std::optional<PlaceTag> place;
  EntityCounts entities;
  std::string user_id;

  friend bool operator==(const TweetRecord&, const TweetRecord&) = default;
};

struct IngestStats {
  std::uint64_t lines_read = 0;
  std::uint64_t parsed_ok = 0;
  std::uint64_t malformed = 0;
  std::uint64_t language_rejected = 0;

  friend bool operator==(const IngestStats&, const IngestStats&) = default;
};

/// Parses one NDJSON line. Throws Error with kind MalformedJson (not an
/// object, invalid UTF-8, wrong field types, bad created_at), MissingField
/// (id, text, created_at or lang absent or empty) or BadGeometry (place ring
/// without exactly four vertices, coordinates out of range).
TweetRecord parse_record(std::string_view line);

/// Serializes to the wire subset accepted by parse_record. Entity arrays are
/// emitted as lists of empty objects so only their lengths carry over.
std::string to_wire_json(const TweetRecord& r);

/// Single-pass reader over an NDJSON stream. Blank lines are skipped without
/// being counted. An empty `allowed_langs` admits every language.
class RecordReader {
 public:
  RecordReader(std::istream& in, std::set<std::string> allowed_langs);

  /// Next admitted record, or nullopt at end of stream.
  std::optional<TweetRecord> next();
  const IngestStats& stats() const { return stats_; }

  /// Caps emission at `per_second` records per second (0 disables) to mimic
  /// a live feed.
  void set_replay_rate(double per_second);

 private:
  std::istream& in_;
  std::set<std::string> allowed_;
  IngestStats stats_;
  std::string line_;
  double replay_rate_ = 0.0;
  std::uint64_t emitted_ = 0;
  std::chrono::steady_clock::time_point replay_start_;
};

struct IngestResult {
  std::vector<TweetRecord> records;
  IngestStats stats;
};

IngestResult read_stream(std::istream& in, const std::set<std::string>& allowed_langs);

/// Opens `path` (or stdin for "-") and reads it fully. Throws IoError when the
/// file cannot be opened.
IngestResult read_file(const std::string& path, const std::set<std::string>& allowed_langs);

}  // namespace citypulse

#endif  // CITYPULSE_INGEST_HPP_
