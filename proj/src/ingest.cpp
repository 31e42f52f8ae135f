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

#include "citypulse/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "citypulse/error.hpp"

namespace citypulse {
namespace {

using nlohmann::json;

[[noreturn]] void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string required_string(const json& obj, const char* key) {
  const json* v = find(obj, key);
  if (v == nullptr) fail(ErrorKind::kMissingField, std::string("missing field '") + key + "'");
  if (!v->is_string()) fail(ErrorKind::kMalformedJson, std::string("field '") + key + "' is not a string");
  std::string s = v->get<std::string>();
  if (s.empty()) fail(ErrorKind::kMissingField, std::string("field '") + key + "' is empty");
  return s;
}

double number_at(const json& arr, std::size_t i) {
  if (!arr.is_array() || i >= arr.size() || !arr[i].is_number()) {
    fail(ErrorKind::kBadGeometry, "coordinate pair must hold two numbers");
  }
  return arr[i].get<double>();
}

GeoPoint lonlat_point(const json& pair) {
  if (!pair.is_array() || pair.size() != 2) fail(ErrorKind::kBadGeometry, "coordinate pair must have two entries");
  const double lon = number_at(pair, 0);
  const double lat = number_at(pair, 1);
  try {
    return GeoPoint(lat, lon);
  } catch (const Error& e) {
    fail(ErrorKind::kBadGeometry, e.what());
  }
}

std::uint32_t array_length(const json& entities, const char* key) {
  const json* v = find(entities, key);
  if (v == nullptr) return 0;
  if (!v->is_array()) fail(ErrorKind::kMalformedJson, std::string("entities.") + key + " is not an array");
  return static_cast<std::uint32_t>(v->size());
}

std::optional<PlaceTag> parse_place(const json& obj) {
  const json* place = find(obj, "place");
  if (place == nullptr) return std::nullopt;
  if (!place->is_object()) fail(ErrorKind::kMalformedJson, "place is not an object");
  std::string name;
  if (const json* n = find(*place, "full_name"); n != nullptr) {
    if (!n->is_string()) fail(ErrorKind::kMalformedJson, "place.full_name is not a string");
    name = n->get<std::string>();
  }
  const json* bbox = find(*place, "bounding_box");
  if (bbox == nullptr || !bbox->is_object()) fail(ErrorKind::kBadGeometry, "place without bounding_box");
  const json* rings = find(*bbox, "coordinates");
  if (rings == nullptr || !rings->is_array() || rings->size() != 1 || !(*rings)[0].is_array()) {
    fail(ErrorKind::kBadGeometry, "bounding_box.coordinates must hold one ring");
  }
  const json& ring = (*rings)[0];
  if (ring.size() != 4) fail(ErrorKind::kBadGeometry, "bounding box ring must have exactly 4 vertices");
  double min_lat = 0, max_lat = 0, min_lon = 0, max_lon = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const GeoPoint p = lonlat_point(ring[i]);
    if (i == 0) {
      min_lat = max_lat = p.lat();
      min_lon = max_lon = p.lon();
    } else {
      min_lat = std::min(min_lat, p.lat());
      max_lat = std::max(max_lat, p.lat());
      min_lon = std::min(min_lon, p.lon());
      max_lon = std::max(max_lon, p.lon());
    }
  }
  return PlaceTag{std::move(name), GeoBox(GeoPoint(min_lat, min_lon), GeoPoint(max_lat, max_lon))};
}

}  // namespace

TweetRecord parse_record(std::string_view line) {
  json obj;
  try {
    obj = json::parse(line.begin(), line.end());
  } catch (const json::exception& e) {
    fail(ErrorKind::kMalformedJson, e.what());
  }
  if (!obj.is_object()) fail(ErrorKind::kMalformedJson, "record is not a JSON object");

  TweetRecord r;
  if (const json* id = find(obj, "id_str"); id != nullptr && id->is_string() && !id->get<std::string>().empty()) {
    r.id = id->get<std::string>();
  } else if (const json* nid = find(obj, "id"); nid != nullptr && nid->is_number_integer()) {
    r.id = nid->dump();
  } else {
    fail(ErrorKind::kMissingField, "missing field 'id_str'");
  }
  r.text = required_string(obj, "text");
  const std::string created = required_string(obj, "created_at");
  const auto ts = parse_twitter_date(created);
  if (!ts) fail(ErrorKind::kMalformedJson, "unparseable created_at '" + created + "'");
  r.created_at_utc = *ts;
  r.lang = required_string(obj, "lang");
  std::transform(r.lang.begin(), r.lang.end(), r.lang.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

  if (const json* coords = find(obj, "coordinates"); coords != nullptr) {
    if (!coords->is_object()) fail(ErrorKind::kMalformedJson, "coordinates is not an object");
    const json* pair = find(*coords, "coordinates");
    if (pair == nullptr) fail(ErrorKind::kBadGeometry, "coordinates without a pair");
    r.coordinate = lonlat_point(*pair);
  }
  r.place = parse_place(obj);

  if (const json* ent = find(obj, "entities"); ent != nullptr) {
    if (!ent->is_object()) fail(ErrorKind::kMalformedJson, "entities is not an object");
    r.entities.hashtags = array_length(*ent, "hashtags");
    r.entities.user_mentions = array_length(*ent, "user_mentions");
    r.entities.urls = array_length(*ent, "urls");
    r.entities.media = array_length(*ent, "media");
  }
  if (const json* user = find(obj, "user"); user != nullptr && user->is_object()) {
    if (const json* uid = find(*user, "id_str"); uid != nullptr && uid->is_string()) {
      r.user_id = uid->get<std::string>();
    }
  }
  return r;
}

std::string to_wire_json(const TweetRecord& r) {
  nlohmann::ordered_json j;
  j["id_str"] = r.id;
  j["created_at"] = format_twitter_date(r.created_at_utc);
  j["text"] = r.text;
  j["lang"] = r.lang;
  if (r.coordinate) {
    j["coordinates"] = {{"type", "Point"}, {"coordinates", {r.coordinate->lon(), r.coordinate->lat()}}};
  } else {
    j["coordinates"] = nullptr;
  }
  if (r.place) {
    const GeoBox& b = r.place->box;
    const double w = b.sw().lon(), s = b.sw().lat(), e = b.ne().lon(), n = b.ne().lat();
    nlohmann::ordered_json ring = nlohmann::ordered_json::array({{w, s}, {e, s}, {e, n}, {w, n}});
    j["place"] = {{"full_name", r.place->name},
                  {"bounding_box", {{"type", "Polygon"}, {"coordinates", nlohmann::ordered_json::array({ring})}}}};
  } else {
    j["place"] = nullptr;
  }
  auto empties = [](std::uint32_t n) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (std::uint32_t i = 0; i < n; ++i) a.push_back(nlohmann::ordered_json::object());
    return a;
  };
  j["entities"] = {{"hashtags", empties(r.entities.hashtags)},
                   {"user_mentions", empties(r.entities.user_mentions)},
                   {"urls", empties(r.entities.urls)},
                   {"media", empties(r.entities.media)}};
  j["user"] = {{"id_str", r.user_id}};
  return j.dump();
}

RecordReader::RecordReader(std::istream& in, std::set<std::string> allowed_langs)
    : in_(in), allowed_(std::move(allowed_langs)) {}

void RecordReader::set_replay_rate(double per_second) {
  replay_rate_ = per_second > 0.0 ? per_second : 0.0;
  emitted_ = 0;
  replay_start_ = std::chrono::steady_clock::now();
}

std::optional<TweetRecord> RecordReader::next() {
  while (std::getline(in_, line_)) {
    if (std::all_of(line_.begin(), line_.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    ++stats_.lines_read;
    TweetRecord r;
    try {
      r = parse_record(line_);
    } catch (const Error&) {
      ++stats_.malformed;
      continue;
    }
    ++stats_.parsed_ok;
    if (!allowed_.empty() && allowed_.count(r.lang) == 0) {
      ++stats_.language_rejected;
      continue;
    }
    if (replay_rate_ > 0.0) {
      const auto due = replay_start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                           std::chrono::duration<double>(static_cast<double>(emitted_) / replay_rate_));
      std::this_thread::sleep_until(due);
    }
    ++emitted_;
    return r;
  }
  if (in_.bad()) throw Error(ErrorKind::kIoError, "read error on input stream");
  return std::nullopt;
}

IngestResult read_stream(std::istream& in, const std::set<std::string>& allowed_langs) {
  RecordReader reader(in, allowed_langs);
  IngestResult out;
  while (auto r = reader.next()) out.records.push_back(std::move(*r));
  out.stats = reader.stats();
  return out;
}

IngestResult read_file(const std::string& path, const std::set<std::string>& allowed_langs) {
  if (path == "-") return read_stream(std::cin, allowed_langs);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open '" + path + "'");
  return read_stream(in, allowed_langs);
}

}  // namespace citypulse
