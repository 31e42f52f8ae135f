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

#include "citypulse/topics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "citypulse/csv.hpp"
#include "citypulse/error.hpp"
#include "citypulse/rng.hpp"

namespace citypulse {

using nlohmann::json;

namespace {

std::vector<std::uint32_t> expand(const BowVector& doc) {
  std::vector<std::uint32_t> words;
  for (const auto& [w, c] : doc.entries) words.insert(words.end(), c, w);
  return words;
}

std::uint32_t draw(std::span<const double> cumulative, Rng& rng) {
  const double u = rng.uniform() * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) --it;
  return static_cast<std::uint32_t>(it - cumulative.begin());
}

void put_u32s(std::ostream& out, std::span<const std::uint32_t> values) {
  for (std::uint32_t v : values) {
    const char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16),
                       static_cast<char>(v >> 24)};
    out.write(b, 4);
  }
}

std::vector<std::uint32_t> get_u32s(std::istream& in, std::size_t n) {
  std::vector<unsigned char> buf(n * 4);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size()) throw Error(ErrorKind::kFormatError, "LDA file is truncated");
  std::vector<std::uint32_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = buf[4 * i] | (buf[4 * i + 1] << 8) | (buf[4 * i + 2] << 16) |
             (static_cast<std::uint32_t>(buf[4 * i + 3]) << 24);
  }
  return out;
}

}  // namespace

void LdaConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::kConfigError, m); };
  if (topics == 0) fail("LDA needs at least one topic");
  if (iterations == 0) fail("LDA needs at least one iteration");
  if (!(alpha_value() > 0.0) || !std::isfinite(alpha_value())) fail("alpha must be positive");
  if (!(beta > 0.0) || !std::isfinite(beta)) fail("beta must be positive");
}

json LdaConfig::to_json() const {
  return json{{"topics", topics}, {"iterations", iterations}, {"alpha", alpha_value()}, {"beta", beta}, {"seed", seed}};
}

LdaConfig LdaConfig::from_json(const json& j) {
  LdaConfig c;
  try {
    c.topics = j.value("topics", c.topics);
    c.iterations = j.value("iterations", c.iterations);
    if (j.contains("alpha") && !j.at("alpha").is_null()) c.alpha = j.at("alpha").get<double>();
    c.beta = j.value("beta", c.beta);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormatError, std::string("bad LDA config: ") + e.what());
  }
  c.validate();
  return c;
}

LdaModel::LdaModel(Vocabulary vocab, LdaConfig config) : vocab_(std::move(vocab)), config_(config) {
  config_.validate();
  topic_word_.assign(config_.topics * vocab_.size(), 0);
  topic_total_.assign(config_.topics, 0);
}

std::vector<double> LdaModel::theta(std::size_t d) const {
  const double alpha = config_.alpha_value();
  const double denom = static_cast<double>(doc_total(d)) + static_cast<double>(topics()) * alpha;
  std::vector<double> out(topics());
  for (std::size_t k = 0; k < topics(); ++k) out[k] = (doc_topic(d, k) + alpha) / denom;
  return out;
}

double LdaModel::phi(std::size_t k, std::size_t w) const {
  const double beta = config_.beta;
  return (topic_word(k, w) + beta) / (topic_total(k) + static_cast<double>(vocab_size()) * beta);
}

std::vector<double> LdaModel::phi(std::size_t k) const {
  std::vector<double> out(vocab_size());
  for (std::size_t w = 0; w < vocab_size(); ++w) out[w] = phi(k, w);
  return out;
}

bool LdaModel::consistent() const {
  std::vector<std::uint32_t> tw(topic_word_.size(), 0), tt(topics(), 0), dt(doc_topic_.size(), 0);
  for (std::size_t d = 0; d < docs(); ++d) {
    if (assignments_[d].size() != doc_words_[d].size()) return false;
    for (std::size_t i = 0; i < doc_words_[d].size(); ++i) {
      const std::uint32_t k = assignments_[d][i], w = doc_words_[d][i];
      if (k >= topics() || w >= vocab_size()) return false;
      ++tw[k * vocab_size() + w];
      ++tt[k];
      ++dt[d * topics() + k];
    }
  }
  for (std::size_t k = 0; k < topics(); ++k) {
    std::uint64_t row = 0;
    for (std::size_t w = 0; w < vocab_size(); ++w) row += topic_word(k, w);
    if (row != topic_total_[k]) return false;
  }
  for (std::size_t d = 0; d < docs(); ++d) {
    std::uint64_t row = 0;
    for (std::size_t k = 0; k < topics(); ++k) row += doc_topic(d, k);
    if (row != doc_total(d)) return false;
  }
  return tw == topic_word_ && tt == topic_total_ && dt == doc_topic_;
}

void LdaModel::add_document(std::vector<std::uint32_t> words, std::vector<std::uint32_t> topics_of) {
  if (words.size() != topics_of.size()) throw Error(ErrorKind::kRowMismatch, "words and assignments differ in length");
  const std::size_t d = docs();
  doc_topic_.resize(doc_topic_.size() + topics(), 0);
  for (std::size_t i = 0; i < words.size(); ++i) {
    const std::uint32_t w = words[i], k = topics_of[i];
    if (w >= vocab_size() || k >= topics()) throw Error(ErrorKind::kInvalidArgument, "word or topic out of range");
    ++topic_word_[k * vocab_size() + w];
    ++topic_total_[k];
    ++doc_topic_[d * topics() + k];
  }
  doc_words_.push_back(std::move(words));
  assignments_.push_back(std::move(topics_of));
}

void LdaModel::reassign(std::size_t d, std::size_t i, std::uint32_t k) {
  const std::uint32_t old = assignments_[d][i], w = doc_words_[d][i];
  --topic_word_[old * vocab_size() + w];
  --topic_total_[old];
  --doc_topic_[d * topics() + old];
  ++topic_word_[k * vocab_size() + w];
  ++topic_total_[k];
  ++doc_topic_[d * topics() + k];
  assignments_[d][i] = k;
}

LdaModel train_lda(std::span<const BowVector> docs, const Vocabulary& vocab, const LdaConfig& config,
                   const SweepObserver& observer) {
  config.validate();
  if (docs.empty()) throw Error(ErrorKind::kEmptyCorpus, "LDA needs at least one document");
  LdaModel model(vocab, config);
  Rng rng(config.seed);
  const std::size_t K = config.topics;
  std::size_t tokens = 0;
  for (const auto& doc : docs) {
    auto words = expand(doc);
    std::vector<std::uint32_t> z(words.size());
    for (auto& k : z) k = static_cast<std::uint32_t>(rng.below(K));
    tokens += words.size();
    model.add_document(std::move(words), std::move(z));
  }
  if (tokens == 0) throw Error(ErrorKind::kEmptyCorpus, "LDA corpus has no in-vocabulary tokens");

  const double alpha = config.alpha_value(), beta = config.beta;
  const double vbeta = static_cast<double>(vocab.size()) * beta;
  std::vector<double> cumulative(K);
  for (std::size_t sweep = 0; sweep < config.iterations; ++sweep) {
    for (std::size_t d = 0; d < model.docs(); ++d) {
      const auto& words = model.doc_words(d);
      for (std::size_t i = 0; i < words.size(); ++i) {
        const std::uint32_t w = words[i], old = model.assignments(d)[i];
        double acc = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          const double own = k == old ? 1.0 : 0.0;
          acc += (model.doc_topic(d, k) - own + alpha) * (model.topic_word(k, w) - own + beta) /
                 (model.topic_total(k) - own + vbeta);
          cumulative[k] = acc;
        }
        const std::uint32_t k = draw(cumulative, rng);
        if (k != old) model.reassign(d, i, k);
      }
    }
    if (observer) observer(sweep, model);
  }
  return model;
}

std::vector<double> infer_topics(const LdaModel& model, const BowVector& doc, std::size_t iterations,
                                 std::uint64_t seed) {
  const std::size_t K = model.topics();
  const double alpha = model.config().alpha_value();
  const auto words = expand(doc);
  for (auto w : words) {
    if (w >= model.vocab_size()) throw Error(ErrorKind::kInvalidArgument, "document index outside the vocabulary");
  }
  std::vector<std::uint32_t> counts(K, 0), z(words.size());
  Rng rng = Rng(model.config().seed).split(seed + 1);
  for (auto& k : z) {
    k = static_cast<std::uint32_t>(rng.below(K));
    ++counts[k];
  }
  std::vector<double> cumulative(K);
  for (std::size_t it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      --counts[z[i]];
      double acc = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        acc += (counts[k] + alpha) * model.phi(k, words[i]);
        cumulative[k] = acc;
      }
      z[i] = draw(cumulative, rng);
      ++counts[z[i]];
    }
  }
  const double denom = static_cast<double>(words.size()) + static_cast<double>(K) * alpha;
  std::vector<double> theta(K);
  for (std::size_t k = 0; k < K; ++k) theta[k] = (counts[k] + alpha) / denom;
  return theta;
}

TopicSummary top_words(const LdaModel& model, std::size_t topic, std::size_t n) {
  if (topic >= model.topics()) throw Error(ErrorKind::kInvalidArgument, "topic id out of range");
  std::vector<std::pair<std::string, double>> all;
  for (std::size_t w = 0; w < model.vocab_size(); ++w) all.emplace_back(model.vocabulary().term(w), model.phi(topic, w));
  const std::size_t keep = std::min(n, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                    [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; });
  all.resize(keep);
  return {static_cast<std::uint32_t>(topic), std::move(all)};
}

std::uint32_t dominant_topic(std::span<const double> theta) {
  if (theta.empty()) throw Error(ErrorKind::kInvalidArgument, "empty topic distribution");
  return static_cast<std::uint32_t>(std::max_element(theta.begin(), theta.end()) - theta.begin());
}

std::string TopicLabelMap::label_of(std::uint32_t topic) const {
  auto it = labels.find(topic);
  return it == labels.end() || it->second.empty() ? kUnlabeled : it->second;
}

bool TopicLabelMap::covers(std::size_t topics) const {
  for (std::uint32_t k = 0; k < topics; ++k) {
    if (!labels.contains(k) && !unlabeled.contains(k)) return false;
  }
  return true;
}

json TopicLabelMap::to_json() const {
  json l = json::object();
  for (const auto& [k, v] : labels) l[std::to_string(k)] = v;
  return json{{"labels", l}, {"unlabeled", unlabeled}};
}

TopicLabelMap TopicLabelMap::from_json(const json& j) {
  TopicLabelMap m;
  try {
    for (const auto& [k, v] : j.at("labels").items()) {
      std::size_t used = 0;
      const unsigned long id = std::stoul(k, &used);
      if (used != k.size()) throw Error(ErrorKind::kFormatError, "label map key '" + k + "' is not a topic id");
      m.labels[static_cast<std::uint32_t>(id)] = v.get<std::string>();
    }
    if (j.contains("unlabeled")) {
      for (const auto& id : j.at("unlabeled")) m.unlabeled.insert(id.get<std::uint32_t>());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormatError, std::string("bad label map: ") + e.what());
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::kFormatError, "label map keys must be topic ids");
  }
  return m;
}

std::vector<LabelShare> apply_label_map(std::span<const std::pair<std::string, std::uint32_t>> assignments,
                                        const TopicLabelMap& map) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& [doc, topic] : assignments) ++counts[map.label_of(topic)];
  std::vector<LabelShare> out;
  const double total = static_cast<double>(assignments.size());
  for (const auto& [label, n] : counts) out.push_back({label, n, 100.0 * static_cast<double>(n) / total});
  std::stable_sort(out.begin(), out.end(), [](const LabelShare& a, const LabelShare& b) { return a.count > b.count; });
  return out;
}

std::vector<WeekdayRow> topic_day_of_week(std::span<const std::uint32_t> topics, std::span<const LocalTime> times,
                                          std::size_t topic_count) {
  if (topics.size() != times.size()) throw Error(ErrorKind::kRowMismatch, "topic and timestamp counts differ");
  std::vector<WeekdayRow> out(topic_count, WeekdayRow{});
  std::vector<double> totals(topic_count, 0.0);
  for (std::size_t i = 0; i < topics.size(); ++i) {
    if (topics[i] >= topic_count) throw Error(ErrorKind::kInvalidArgument, "topic id out of range");
    out[topics[i]][times[i].weekday()] += 1.0;
    totals[topics[i]] += 1.0;
  }
  for (std::size_t k = 0; k < topic_count; ++k) {
    if (totals[k] == 0.0) continue;
    for (auto& x : out[k]) x /= totals[k];
  }
  return out;
}

double perplexity(const LdaModel& model, std::span<const BowVector> docs, std::size_t iterations, std::uint64_t seed) {
  double log_sum = 0.0;
  std::uint64_t n = 0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto theta = infer_topics(model, docs[d], iterations, seed + d);
    for (const auto& [w, c] : docs[d].entries) {
      double p = 0.0;
      for (std::size_t k = 0; k < model.topics(); ++k) p += theta[k] * model.phi(k, w);
      log_sum += c * std::log(p);
      n += c;
    }
  }
  if (n == 0) throw Error(ErrorKind::kEmptyCorpus, "perplexity needs at least one held-out token");
  return std::exp(-log_sum / static_cast<double>(n));
}

void write_lda_model(std::ostream& out, const LdaModel& model) {
  json lengths = json::array();
  for (std::size_t d = 0; d < model.docs(); ++d) lengths.push_back(model.doc_total(d));
  json header{{"magic", "CPLDA1"},
              {"config", model.config().to_json()},
              {"vocabulary", model.vocabulary().to_json()},
              {"doc_lengths", std::move(lengths)}};
  out << header.dump() << '\n';
  const std::size_t K = model.topics(), V = model.vocab_size();
  std::vector<std::uint32_t> buf;
  buf.reserve(K * V);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t w = 0; w < V; ++w) buf.push_back(model.topic_word(k, w));
  }
  put_u32s(out, buf);
  buf.clear();
  for (std::size_t k = 0; k < K; ++k) buf.push_back(model.topic_total(k));
  put_u32s(out, buf);
  buf.clear();
  for (std::size_t d = 0; d < model.docs(); ++d) {
    for (std::size_t k = 0; k < K; ++k) buf.push_back(model.doc_topic(d, k));
  }
  put_u32s(out, buf);
  for (std::size_t d = 0; d < model.docs(); ++d) {
    put_u32s(out, model.doc_words(d));
    put_u32s(out, model.assignments(d));
  }
  if (!out) throw Error(ErrorKind::kIoError, "failed writing LDA model");
}

LdaModel read_lda_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::kFormatError, "empty LDA file");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception&) {
    throw Error(ErrorKind::kFormatError, "LDA header is not JSON");
  }
  if (!header.is_object() || header.value("magic", "") != "CPLDA1") {
    throw Error(ErrorKind::kFormatError, "not a CPLDA1 model file");
  }
  try {
    LdaModel model(Vocabulary::from_json(header.at("vocabulary")), LdaConfig::from_json(header.at("config")));
    const std::size_t K = model.topics(), V = model.vocab_size();
    const auto lengths = header.at("doc_lengths").get<std::vector<std::size_t>>();
    const auto topic_word = get_u32s(in, K * V);
    const auto topic_total = get_u32s(in, K);
    const auto doc_topic = get_u32s(in, lengths.size() * K);
    for (std::size_t len : lengths) {
      auto words = get_u32s(in, len);
      auto z = get_u32s(in, len);
      model.add_document(std::move(words), std::move(z));
    }
    for (std::size_t k = 0; k < K; ++k) {
      if (topic_total[k] != model.topic_total(k)) throw Error(ErrorKind::kFormatError, "LDA topic totals disagree");
      for (std::size_t w = 0; w < V; ++w) {
        if (topic_word[k * V + w] != model.topic_word(k, w)) {
          throw Error(ErrorKind::kFormatError, "LDA topic-word counts disagree with assignments");
        }
      }
    }
    for (std::size_t d = 0; d < lengths.size(); ++d) {
      for (std::size_t k = 0; k < K; ++k) {
        if (doc_topic[d * K + k] != model.doc_topic(d, k)) {
          throw Error(ErrorKind::kFormatError, "LDA doc-topic counts disagree with assignments");
        }
      }
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormatError, std::string("bad LDA header: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kInvalidArgument) throw Error(ErrorKind::kFormatError, e.what());
    throw;
  }
}

void write_topic_csv(std::ostream& out, const LdaModel& model, std::size_t n) {
  out << "topic,rank,term,prob\n";
  for (std::size_t k = 0; k < model.topics(); ++k) {
    const TopicSummary s = top_words(model, k, n);
    for (std::size_t r = 0; r < s.terms.size(); ++r) {
      out << csv_row({std::to_string(k), std::to_string(r + 1), csv_field(s.terms[r].first),
                      format_double(s.terms[r].second)});
    }
  }
}

}  // namespace citypulse
