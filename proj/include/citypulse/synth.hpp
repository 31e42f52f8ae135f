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

// Seeded synthetic corpora with ground-truth ledgers. Every draw goes through
// citypulse::Rng, so a seed fixes the output byte for byte.

#ifndef CITYPULSE_SYNTH_HPP_
#define CITYPULSE_SYNTH_HPP_

#include <array>
#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "citypulse/geo.hpp"
#include "citypulse/ingest.hpp"

namespace citypulse {

/// Index of the first pseudo word used for the rare-word tail of negatives.
inline constexpr std::size_t kTailWordBase = 210000;

/// A pronounceable consonant-vowel word of three syllables, unique per index
/// below 13^3 * 5^3. Such words survive every preprocessing step unchanged.
std::string pseudo_word(std::size_t index);

struct PlantedTopicSpec {
  std::uint32_t id = 0;
  std::vector<std::string> terms;
  /// Positive and summing to 1.
  std::vector<double> weights;
};

/// `topics` topics over disjoint pseudo-word vocabularies, weight of rank r
/// proportional to (r + 1)^-decay.
std::vector<PlantedTopicSpec> planted_topics(std::size_t topics, std::size_t terms_per_topic, double decay = 0.5);

struct PlantedModeSpec {
  std::string name;
  /// Terms used in training material.
  std::vector<std::string> core_terms;
  /// Informal or alternative names; reserved to the test split on request.
  std::vector<std::string> synonyms;
  /// Words that accompany this mode only.
  std::vector<std::string> contexts;
};

/// Six Portuguese-language modes (bike, bus, car, taxi, train, walk).
std::vector<PlantedModeSpec> default_modes();
/// Word lists of unrelated everyday subjects used for negatives.
std::vector<std::vector<std::string>> default_negative_topics();
/// Travel words shared by every mode in the unlabeled corpus.
std::vector<std::string> default_shared_travel_words();
/// Neutral words sprinkled into every kind of document.
std::vector<std::string> default_filler_words();

struct LedgerEntry {
  std::string id;
  std::optional<std::uint32_t> topic;
  /// Travel modes the record talks about; empty for negatives.
  std::vector<std::string> modes;
  /// "train", "test" or "unlabeled" for classification material, else empty.
  std::string split;
  std::optional<GeoTagKind> geotag;
  std::optional<bool> inside;
  std::string user_id;
  std::optional<Timestamp> local_time;
  EntityCounts entities;

  bool labeled() const { return split == "train" || split == "test"; }
  bool positive() const { return !modes.empty(); }

  friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

struct SynthLedger {
  std::vector<LedgerEntry> entries;

  const LedgerEntry* find(const std::string& id) const;
  nlohmann::json to_json() const;
  /// Throws Error(FormatError).
  static SynthLedger from_json(const nlohmann::json& j);
};

struct SynthCorpus {
  std::vector<TweetRecord> records;
  SynthLedger ledger;

  void append(SynthCorpus other);
};

struct TopicCorpusOptions {
  /// Sample a Dirichlet(mixture_alpha) topic mixture per document instead of
  /// a single topic. The ledger then holds the largest mixture component.
  bool mixture = false;
  double mixture_alpha = 0.1;
  std::string lang = "en";
  std::uint64_t id_base = 100000;
};

SynthCorpus generate_topic_corpus(const std::vector<PlantedTopicSpec>& specs, std::size_t docs, std::size_t doc_length,
                                  std::uint64_t seed, const TopicCorpusOptions& options = {});

struct ClassificationCounts {
  /// Positive documents per mode. A document may talk about two modes, so the
  /// sum may exceed `positives`; the excess is the number of two-mode docs.
  std::vector<std::pair<std::string, std::size_t>> per_mode = {
      {"bike", 300}, {"bus", 311}, {"car", 317}, {"taxi", 314}, {"train", 317}, {"walk", 217}};
  std::size_t positives = 1686;
  std::size_t negatives = 1686;
  /// Extra negatives kept aside for testing.
  std::size_t test_negatives = 300;

  /// Every count divided by `factor`, rounded, keeping the overlap feasible.
  ClassificationCounts scaled(double factor) const;
};

struct ClassificationOptions {
  /// Fraction of positives moved to the test split and written with the
  /// mode's synonyms; 0 disables the holdout and lets synonyms appear
  /// anywhere at `synonym_rate`.
  double holdout_fraction = 0.0;
  double synonym_rate = 0.3;
  /// Share of negatives that mention a mode term outside a travel context.
  double hard_negative_rate = 0.05;
  /// Half the negatives are written only in rare words drawn from a pool this
  /// large, the open vocabulary of everyday posts. 0 keeps every negative on
  /// the negative topics.
  std::size_t negative_tail_words = 5000;
  std::string lang = "pt";
  std::uint64_t id_base = 200000;
};

/// Throws Error(InvalidArgument) when the counts cannot be realized.
SynthCorpus generate_classification_corpus(const std::vector<PlantedModeSpec>& modes,
                                           const std::vector<std::vector<std::string>>& negative_topics,
                                           const ClassificationCounts& counts, std::uint64_t seed,
                                           const ClassificationOptions& options = {});

struct EmbeddingCorpusOptions {
  double travel_fraction = 0.4;
  /// As in ClassificationOptions.
  std::size_t negative_tail_words = 5000;
  std::string lang = "pt";
  std::uint64_t id_base = 300000;
};

/// Unlabeled documents: travel documents pair a mode term (core or synonym,
/// equally likely and in identical templates) with the mode's contexts and
/// shared travel words; the rest come from the negative topics.
SynthCorpus generate_embedding_corpus(const std::vector<PlantedModeSpec>& modes,
                                      const std::vector<std::vector<std::string>>& negative_topics, std::size_t docs,
                                      std::uint64_t seed, const EmbeddingCorpusOptions& options = {});

struct GeoSpec {
  GeoBox city{GeoPoint(-23.08302, -43.795449), GeoPoint(-22.739823, -43.087707)};
  double inside_fraction = 0.9;
  /// Shares of precise coordinates, degenerate place boxes and variable place
  /// boxes.
  std::array<double, 3> kind_mix = {0.2, 0.01, 0.79};
  std::size_t variable_places = 40;
  std::size_t venues = 150;
};

/// Gives every record a coordinate or place. Inside records pass city_filter
/// under every place mode; outside records fail it under every place mode.
void generate_geo(SynthCorpus& corpus, const GeoSpec& spec, std::uint64_t seed);

struct ActivitySpec {
  std::chrono::sys_days start{std::chrono::year{2018} / 10 / 1};
  std::size_t days = 90;
  /// Expected records per local day, Monday first.
  std::array<double, 7> weekday_rates = {40, 42, 44, 46, 55, 60, 50};
  /// Relative weight of each local hour.
  std::array<double, 24> hour_weights = {3, 2, 1, 1, 1, 2, 4, 7, 9, 8, 7, 7, 8, 8, 7, 7, 8, 9, 10, 11, 11, 10, 8, 5};
  int utc_offset_minutes = -180;
  std::size_t users = 400;
  double zipf_exponent = 1.2;
  /// Probability that a record carries at least one entity of each kind:
  /// hashtags, user mentions, URLs, media.
  std::array<double, 4> entity_rates = {0.15, 0.35, 0.12, 0.08};
};

/// A corpus whose size follows the plan: Poisson(weekday rate) records per
/// day, hours from the hour weights, Zipf users, independent entities.
SynthCorpus generate_activity_corpus(const ActivitySpec& spec, std::uint64_t seed);

/// Spreads existing records over the date range (day drawn with weight equal
/// to its weekday rate) and assigns users and entities.
void assign_activity(SynthCorpus& corpus, const ActivitySpec& spec, std::uint64_t seed);

struct FixtureSpec {
  ClassificationCounts counts;
  ClassificationOptions classification;
  std::size_t embedding_docs = 6000;
  GeoSpec geo;
  ActivitySpec activity;
};

/// Labeled travel material, unlabeled embedding material, then geo and
/// activity over all of it.
SynthCorpus generate_fixture(const FixtureSpec& spec, std::uint64_t seed);

/// One wire-format line per record.
void write_ndjson(std::ostream& out, const std::vector<TweetRecord>& records);

}  // namespace citypulse

#endif  // CITYPULSE_SYNTH_HPP_
