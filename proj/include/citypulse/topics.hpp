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

#ifndef CITYPULSE_TOPICS_HPP_
#define CITYPULSE_TOPICS_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "citypulse/features.hpp"
#include "citypulse/timeutil.hpp"

namespace citypulse {

struct LdaConfig {
  std::size_t topics = 50;
  std::size_t iterations = 20;
  /// Document-topic prior; 50 / topics when unset.
  std::optional<double> alpha;
  double beta = 0.01;
  std::uint64_t seed = 1;

  double alpha_value() const { return alpha ? *alpha : 50.0 / static_cast<double>(topics); }
  /// Throws Error(ConfigError).
  void validate() const;
  nlohmann::json to_json() const;
  static LdaConfig from_json(const nlohmann::json& j);
};

/// Count tables and token assignments of a collapsed Gibbs LDA run.
class LdaModel {
 public:
  LdaModel() = default;
  LdaModel(Vocabulary vocab, LdaConfig config);

  const Vocabulary& vocabulary() const { return vocab_; }
  const LdaConfig& config() const { return config_; }
  std::size_t topics() const { return config_.topics; }
  std::size_t vocab_size() const { return vocab_.size(); }
  std::size_t docs() const { return doc_words_.size(); }

  std::uint32_t topic_word(std::size_t k, std::size_t w) const { return topic_word_[k * vocab_size() + w]; }
  std::uint32_t topic_total(std::size_t k) const { return topic_total_[k]; }
  std::uint32_t doc_topic(std::size_t d, std::size_t k) const { return doc_topic_[d * topics() + k]; }
  std::uint32_t doc_total(std::size_t d) const { return static_cast<std::uint32_t>(doc_words_[d].size()); }
  const std::vector<std::uint32_t>& doc_words(std::size_t d) const { return doc_words_[d]; }
  const std::vector<std::uint32_t>& assignments(std::size_t d) const { return assignments_[d]; }

  /// (n_{d,k} + alpha) / (N_d + K alpha).
  std::vector<double> theta(std::size_t d) const;
  /// (n_{k,w} + beta) / (n_k + |V| beta) over all w.
  std::vector<double> phi(std::size_t k) const;
  double phi(std::size_t k, std::size_t w) const;

  /// True when every count table agrees with the assignments.
  bool consistent() const;

  /// Appends a document with the given topic assignments.
  void add_document(std::vector<std::uint32_t> words, std::vector<std::uint32_t> topics);
  /// Moves token i of document d to topic k, updating the counts.
  void reassign(std::size_t d, std::size_t i, std::uint32_t k);

 private:
  Vocabulary vocab_;
  LdaConfig config_;
  std::vector<std::uint32_t> topic_word_;
  std::vector<std::uint32_t> topic_total_;
  std::vector<std::uint32_t> doc_topic_;
  std::vector<std::vector<std::uint32_t>> doc_words_;
  std::vector<std::vector<std::uint32_t>> assignments_;
};

/// Called after each full sweep with the sweep index and current model.
using SweepObserver = std::function<void(std::size_t sweep, const LdaModel& model)>;

/// Each BowVector is expanded into its token multiset (index order). Initial
/// assignments are uniform draws; each sweep visits every token in document
/// order and resamples its topic from
///   p(k) ~ (n_dk + alpha) (n_kw + beta) / (n_k + |V| beta)
/// with the token's own counts removed. Throws Error(EmptyCorpus) when there
/// are no documents or no tokens.
LdaModel train_lda(std::span<const BowVector> docs, const Vocabulary& vocab, const LdaConfig& config,
                   const SweepObserver& observer = {});

/// Gibbs sampling of one new document against the frozen topic-word counts.
/// An empty document gets the uniform prior.
std::vector<double> infer_topics(const LdaModel& model, const BowVector& doc, std::size_t iterations = 20,
                                 std::uint64_t seed = 0);

struct TopicSummary {
  std::uint32_t topic = 0;
  std::vector<std::pair<std::string, double>> terms;
};

/// The n most probable terms of a topic; ties broken lexicographically.
TopicSummary top_words(const LdaModel& model, std::size_t topic, std::size_t n);

/// argmax, lowest index on ties. Throws Error(InvalidArgument) when empty.
std::uint32_t dominant_topic(std::span<const double> theta);

/// Many-to-one topic labels. Topics absent from `labels` count as unlabeled.
struct TopicLabelMap {
  std::map<std::uint32_t, std::string> labels;
  std::set<std::uint32_t> unlabeled;

  static constexpr const char* kUnlabeled = "unlabeled";

  std::string label_of(std::uint32_t topic) const;
  /// Every topic in [0, topics) is either labeled or listed as unlabeled.
  bool covers(std::size_t topics) const;

  nlohmann::json to_json() const;
  /// Throws Error(FormatError).
  static TopicLabelMap from_json(const nlohmann::json& j);
};

struct LabelShare {
  std::string label;
  std::uint64_t count = 0;
  double percentage = 0.0;

  friend bool operator==(const LabelShare&, const LabelShare&) = default;
};

/// Counts documents per label, "unlabeled" included, ordered by count
/// descending then label. Percentages are over all documents.
std::vector<LabelShare> apply_label_map(std::span<const std::pair<std::string, std::uint32_t>> assignments,
                                        const TopicLabelMap& map);

using WeekdayRow = std::array<double, 7>;

/// Row k holds the share of topic-k documents on each local weekday
/// (Monday = 0). Rows of topics with no documents stay zero.
/// Throws Error(RowMismatch) when the inputs differ in length.
std::vector<WeekdayRow> topic_day_of_week(std::span<const std::uint32_t> topics, std::span<const LocalTime> times,
                                          std::size_t topic_count);

/// exp(-mean log p(w | d)) over held-out documents, with theta inferred per
/// document and p(w | d) = sum_k theta_k phi_kw.
double perplexity(const LdaModel& model, std::span<const BowVector> docs, std::size_t iterations = 20,
                  std::uint64_t seed = 0);

/// Container format: one JSON header line with magic "CPLDA1", the config,
/// the vocabulary and "doc_lengths"; then little-endian uint32 arrays:
/// topic-word counts (K x |V|), topic totals (K), doc-topic counts (M x K),
/// and for every document its word indices followed by its assignments.
void write_lda_model(std::ostream& out, const LdaModel& model);
/// Throws Error(FormatError).
LdaModel read_lda_model(std::istream& in);

/// CSV with header topic,rank,term,prob, n rows per topic, rank from 1.
void write_topic_csv(std::ostream& out, const LdaModel& model, std::size_t n);

}  // namespace citypulse

#endif  // CITYPULSE_TOPICS_HPP_
