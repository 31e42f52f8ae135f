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

#include <sstream>

#include "citypulse/error.hpp"
#include "citypulse/ingest.hpp"
#include "citypulse/rng.hpp"
#include "doctest.h"

using namespace citypulse;

namespace {

const char* kMinimal =
    R"({"id_str":"1","text":"hi","created_at":"Wed Oct 10 20:19:24 +0000 2018","lang":"en"})";

ErrorKind kind_of(std::string_view line) {
  try {
    parse_record(line);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a parse error");
  return ErrorKind::kIoError;
}

}  // namespace

TEST_CASE("minimal record has no geo fields") {
  const TweetRecord r = parse_record(kMinimal);
  CHECK(r.id == "1");
  CHECK(r.text == "hi");
  CHECK(r.lang == "en");
  CHECK_FALSE(r.coordinate.has_value());
  CHECK_FALSE(r.place.has_value());
  CHECK(r.entities == EntityCounts{});
  CHECK(format_twitter_date(r.created_at_utc) == "Wed Oct 10 20:19:24 +0000 2018");
}

TEST_CASE("coordinates arrive lon-lat and are stored lat-lon") {
  const TweetRecord r = parse_record(
      R"({"id_str":"2","text":"x","created_at":"Wed Oct 10 20:19:24 +0000 2018","lang":"pt",)"
      R"("coordinates":{"coordinates":[-43.2,-22.9]}})");
  REQUIRE(r.coordinate.has_value());
  CHECK(r.coordinate->lat() == -22.9);
  CHECK(r.coordinate->lon() == -43.2);
}

TEST_CASE("degenerate place ring is kept as a point box") {
  const TweetRecord r = parse_record(
      R"({"id_str":"3","text":"x","created_at":"Wed Oct 10 20:19:24 +0000 2018","lang":"pt",)"
      R"("place":{"full_name":"Venue","bounding_box":{"coordinates":[[[-43.1,-22.9],[-43.1,-22.9],[-43.1,-22.9],[-43.1,-22.9]]]}}})");
  REQUIRE(r.place.has_value());
  CHECK(r.place->name == "Venue");
  CHECK(r.place->box.degenerate());
  CHECK(r.place->box.sw() == GeoPoint(-22.9, -43.1));
}

TEST_CASE("entity counts are array lengths, missing arrays count zero") {
  const TweetRecord r = parse_record(
      R"({"id_str":"4","text":"x","created_at":"Wed Oct 10 20:19:24 +0000 2018","lang":"EN",)"
      R"("entities":{"hashtags":[{},{}],"urls":[{}]},"user":{"id_str":"u9"}})");
  CHECK(r.entities.hashtags == 2);
  CHECK(r.entities.urls == 1);
  CHECK(r.entities.user_mentions == 0);
  CHECK(r.entities.media == 0);
  CHECK(r.user_id == "u9");
  CHECK(r.lang == "en");
}

TEST_CASE("parse errors are classified") {
  CHECK(kind_of("not json") == ErrorKind::kMalformedJson);
  CHECK(kind_of("[1,2]") == ErrorKind::kMalformedJson);
  CHECK(kind_of("{\"text\":\"\xff\"}") == ErrorKind::kMalformedJson);
  CHECK(kind_of(R"({"id_str":"1","created_at":"Wed Oct 10 20:19:24 +0000 2018","lang":"en"})") ==
        ErrorKind::kMissingField);
  CHECK(kind_of(R"({"id_str":"1","text":"a","lang":"en"})") == ErrorKind::kMissingField);
  CHECK(kind_of(R"({"id_str":"1","text":"a","created_at":"Wed Oct 10 20:19:24 +0000 2018"})") ==
        ErrorKind::kMissingField);
  CHECK(kind_of(R"({"text":"a","created_at":"Wed Oct 10 20:19:24 +0000 2018","lang":"en"})") ==
        ErrorKind::kMissingField);
  // Strict dates: wrong weekday for the date, and a non-Twitter layout.
  CHECK(kind_of(R"({"id_str":"1","text":"a","created_at":"Thu Oct 10 20:19:24 +0000 2018","lang":"en"})") ==
        ErrorKind::kMalformedJson);
  CHECK(kind_of(R"({"id_str":"1","text":"a","created_at":"2018-10-10T20:19:24Z","lang":"en"})") ==
        ErrorKind::kMalformedJson);
  CHECK(kind_of(R"({"id_str":"1","text":"a","created_at":"Wed Oct 10 20:19:24 +0000 2018","lang":"en",)"
                R"("place":{"bounding_box":{"coordinates":[[[0,0],[1,0],[1,1]]]}}})") == ErrorKind::kBadGeometry);
}

TEST_CASE("created_at honours the zone offset") {
  const auto a = parse_twitter_date("Wed Oct 10 20:19:24 +0000 2018");
  const auto b = parse_twitter_date("Wed Oct 10 17:19:24 -0300 2018");
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK(*a == *b);
}

TEST_CASE("read_stream counts malformed and language-rejected lines") {
  std::string pt = kMinimal;
  pt.replace(pt.find("\"en\""), 4, "\"pt\"");
  std::istringstream in(std::string(kMinimal) + "\n{oops\n" + pt + "\n");
  const IngestResult res = read_stream(in, {"en"});
  CHECK(res.records.size() == 1);
  CHECK(res.stats == IngestStats{3, 2, 1, 1});
}

TEST_CASE("empty source yields nothing") {
  std::istringstream in("");
  const IngestResult res = read_stream(in, {"en"});
  CHECK(res.records.empty());
  CHECK(res.stats == IngestStats{});
}

TEST_CASE("missing file is an IoError") {
  try {
    read_file("/nonexistent/tweets.ndjson", {});
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kIoError);
  }
}

TEST_CASE("parsing is total over arbitrary byte lines") {
  Rng rng(11);
  const std::string alphabet = "{}[]\":,0123456789abcdefghijklmnopqrstuvwxyz \\\x80\xc3\xa9\xff-+.eE";
  std::uint64_t errors = 0;
  for (int i = 0; i < 2000; ++i) {
    std::string line;
    const auto n = rng.below(60);
    for (std::uint64_t k = 0; k < n; ++k) line.push_back(alphabet[rng.below(alphabet.size())]);
    if (i % 3 == 0) line = std::string(kMinimal).substr(0, rng.below(std::string(kMinimal).size() + 1));
    try {
      parse_record(line);
    } catch (const Error&) {
      ++errors;
    }
  }
  CHECK(errors > 0);
}

TEST_CASE("wire round trip is field-wise identical") {
  Rng rng(5);
  for (int i = 0; i < 300; ++i) {
    TweetRecord r;
    r.id = std::to_string(rng.next());
    r.text = "texto " + std::to_string(i) + " \"quoted\" ônibus";
    r.created_at_utc = Timestamp{std::chrono::seconds{static_cast<std::int64_t>(rng.below(2'000'000'000))}};
    r.lang = i % 2 ? "pt" : "en";
    if (rng.bernoulli(0.5)) r.coordinate = GeoPoint(rng.uniform(-90, 90), rng.uniform(-180, 180));
    if (rng.bernoulli(0.5)) {
      const double lat = rng.uniform(-80, 80), lon = rng.uniform(-170, 170);
      const double dl = rng.bernoulli(0.3) ? 0.0 : rng.uniform(0, 5);
      r.place = PlaceTag{"Place " + std::to_string(i), GeoBox(GeoPoint(lat, lon), GeoPoint(lat + dl, lon + dl))};
    }
    r.entities = {static_cast<std::uint32_t>(rng.below(3)), static_cast<std::uint32_t>(rng.below(3)),
                  static_cast<std::uint32_t>(rng.below(3)), static_cast<std::uint32_t>(rng.below(3))};
    r.user_id = "u" + std::to_string(rng.below(50));
    CHECK(parse_record(to_wire_json(r)) == r);
  }
}
