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

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "citypulse/error.hpp"
#include "citypulse/features.hpp"
#include "citypulse/geo.hpp"
#include "citypulse/synth.hpp"
#include "citypulse/textprep.hpp"
#include "doctest.h"

using namespace citypulse;

namespace {

std::string ndjson(const SynthCorpus& c) {
  std::ostringstream out;
  write_ndjson(out, c.records);
  return out.str();
}

void check_ledger_complete(const SynthCorpus& c) {
  REQUIRE(c.ledger.entries.size() == c.records.size());
  std::set<std::string> ids;
  for (std::size_t i = 0; i < c.records.size(); ++i) {
    CHECK(c.ledger.entries[i].id == c.records[i].id);
    ids.insert(c.records[i].id);
  }
  CHECK(ids.size() == c.records.size());
}

}  // namespace

TEST_CASE("pseudo words are distinct and survive preprocessing") {
  const PipelineConfig topic = PipelineConfig::preset("topic", "en");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < 2000; i += 7) {
    const std::string w = pseudo_word(i * 97);
    CHECK(seen.insert(w).second);
    CHECK(run_pipeline(w, topic).tokens == std::vector<std::string>{w});
  }
}

TEST_CASE("topic corpus") {
  PlantedTopicSpec one{0, {"kalimo"}, {1.0}};
  const auto single = generate_topic_corpus({one}, 5, 4, 1);
  for (const auto& r : single.records) CHECK(r.text == "kalimo kalimo kalimo kalimo");
  CHECK(generate_topic_corpus({one}, 0, 4, 1).records.empty());

  const auto corpus = generate_topic_corpus(planted_topics(5, 20), 500, 15, 7);
  check_ledger_complete(corpus);
  std::map<std::uint32_t, double> counts;
  for (const auto& e : corpus.ledger.entries) counts[*e.topic] += 1;
  const double mean = 100.0, sigma = std::sqrt(500 * 0.2 * 0.8);
  for (const auto& [k, n] : counts) CHECK(std::abs(n - mean) <= 3 * sigma);
  CHECK(ndjson(corpus) == ndjson(generate_topic_corpus(planted_topics(5, 20), 500, 15, 7)));
}

TEST_CASE("classification corpus honours counts") {
  const ClassificationCounts counts;
  const auto c = generate_classification_corpus(default_modes(), default_negative_topics(), counts, 3);
  check_ledger_complete(c);
  std::map<std::string, std::size_t> per_mode;
  std::size_t positives = 0, negatives = 0, test_negatives = 0;
  for (const auto& e : c.ledger.entries) {
    for (const auto& m : e.modes) ++per_mode[m];
    if (e.positive()) {
      ++positives;
      CHECK(e.modes.size() <= 2);
    } else {
      ++(e.split == "train" ? negatives : test_negatives);
    }
  }
  for (const auto& [m, n] : counts.per_mode) CHECK(per_mode[m] == n);
  CHECK(positives == 1686);
  CHECK(negatives == 1686);
  CHECK(test_negatives == 300);

  ClassificationCounts bad = counts;
  bad.per_mode.push_back({"boat", 3});
  CHECK_THROWS_AS(generate_classification_corpus(default_modes(), default_negative_topics(), bad, 3), Error);
  ClassificationCounts impossible = counts;
  impossible.positives = 100;
  CHECK_THROWS_AS(generate_classification_corpus(default_modes(), default_negative_topics(), impossible, 3), Error);
}

TEST_CASE("reserved synonyms stay out of the training split") {
  ClassificationOptions opt;
  opt.holdout_fraction = 0.2;
  const auto c = generate_classification_corpus(default_modes(), default_negative_topics(), ClassificationCounts{}, 5, opt);
  std::set<std::string> synonyms;
  for (const auto& m : default_modes()) synonyms.insert(m.synonyms.begin(), m.synonyms.end());

  const PipelineConfig travel = PipelineConfig::preset("travel", "pt");
  std::vector<TokenDoc> train;
  std::size_t test_with_synonym = 0;
  for (std::size_t i = 0; i < c.records.size(); ++i) {
    const auto doc = run_pipeline(c.records[i].text, travel).tokens;
    const bool has = std::any_of(doc.begin(), doc.end(), [&](const std::string& t) { return synonyms.count(t) > 0; });
    if (c.ledger.entries[i].split == "train") {
      train.push_back(doc);
      CHECK_FALSE(has);
    } else if (c.ledger.entries[i].positive()) {
      test_with_synonym += has;
    }
  }
  CHECK(test_with_synonym > 0);
  const Vocabulary v = build_vocabulary(train, {});
  for (const auto& s : synonyms) CHECK_FALSE(v.find(s).has_value());
}

TEST_CASE("geo placement matches the ledger") {
  auto corpus = generate_embedding_corpus(default_modes(), default_negative_topics(), 2000, 9);
  GeoSpec spec;
  for (double inside : {1.0, 0.0}) {
    spec.inside_fraction = inside;
    generate_geo(corpus, spec, 4);
    for (const auto& r : corpus.records) CHECK(city_filter(r, spec.city).accepted == (inside == 1.0));
  }
  spec.inside_fraction = 0.7;
  spec.kind_mix = {0.2, 0.01, 0.79};
  generate_geo(corpus, spec, 5);
  std::map<GeoTagKind, double> kinds;
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    const LedgerEntry& e = corpus.ledger.entries[i];
    kinds[*e.geotag] += 1;
    CHECK(classify_geotag(corpus.records[i]) == *e.geotag);
    for (PlaceMode mode : {PlaceMode::kContainment, PlaceMode::kCenterInside, PlaceMode::kOverlap}) {
      CHECK(city_filter(corpus.records[i], spec.city, mode).accepted == *e.inside);
    }
  }
  const GeotagBreakdown b = geotag_breakdown(corpus.records);
  const double n = static_cast<double>(corpus.records.size());
  CHECK(std::abs(b.precise.percentage - 100 * kinds[GeoTagKind::kPreciseCoordinate] / n) < 0.01);
  CHECK(std::abs(b.degenerate.percentage - 100 * kinds[GeoTagKind::kDegeneratePlaceBox] / n) < 0.01);
  CHECK(std::abs(b.variable.percentage - 100 * kinds[GeoTagKind::kVariablePlaceBox] / n) < 0.01);
}

TEST_CASE("activity corpus follows the weekday plan") {
  ActivitySpec spec;
  spec.days = 70;
  spec.weekday_rates = {10, 10, 10, 10, 10, 10, 100};
  const auto c = generate_activity_corpus(spec, 12);
  check_ledger_complete(c);
  std::size_t sunday = 0;
  for (std::size_t i = 0; i < c.records.size(); ++i) {
    const LedgerEntry& e = c.ledger.entries[i];
    const LocalTime t = localize_timestamp(c.records[i].created_at_utc, spec.utc_offset_minutes);
    CHECK(t.wall == *e.local_time);
    sunday += t.weekday() == 6;
    CHECK(c.records[i].entities == e.entities);
  }
  const double share = static_cast<double>(sunday) / static_cast<double>(c.records.size());
  CHECK(std::abs(share - 100.0 / 160.0) < 0.05);
}

TEST_CASE("fixture is deterministic and its ledger round-trips") {
  FixtureSpec spec;
  spec.counts = ClassificationCounts{}.scaled(6);
  spec.embedding_docs = 500;
  const auto a = generate_fixture(spec, 77);
  const auto b = generate_fixture(spec, 77);
  check_ledger_complete(a);
  CHECK(ndjson(a) == ndjson(b));
  CHECK(a.ledger.to_json().dump() == b.ledger.to_json().dump());
  const SynthLedger back = SynthLedger::from_json(a.ledger.to_json());
  CHECK(back.entries == a.ledger.entries);
  for (const auto& r : a.records) CHECK(parse_record(to_wire_json(r)) == r);
}
