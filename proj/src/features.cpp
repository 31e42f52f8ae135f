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

#include "citypulse/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "citypulse/error.hpp"
#include "citypulse/rng.hpp"

namespace citypulse {

using nlohmann::json;

namespace {

template <class T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

template <class T>
T dot(std::span<const T> a, std::span<const T> b) {
  T s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Maps documents to vocabulary indices, dropping out-of-vocabulary tokens.
std::vector<std::vector<std::uint32_t>> encode(std::span<const TokenDoc> docs, const Vocabulary& vocab) {
  std::vector<std::vector<std::uint32_t>> out(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& tok : docs[d]) {
      if (auto i = vocab.find(tok)) out[d].push_back(*i);
    }
  }
  return out;
}

std::size_t token_total(const std::vector<std::vector<std::uint32_t>>& encoded) {
  std::size_t n = 0;
  for (const auto& d : encoded) n += d.size();
  return n;
}

void check_trainable(const Vocabulary& vocab, std::size_t tokens) {
  if (vocab.size() < 2) {
    throw Error(ErrorKind::kDegenerateVocabulary,
                "embedding training needs at least 2 vocabulary terms, got " + std::to_string(vocab.size()));
  }
  if (tokens == 0) throw Error(ErrorKind::kEmptyCorpus, "no in-vocabulary tokens to train on");
}

void init_uniform(std::span<float> table, std::size_t dim, Rng& rng) {
  const double half = 0.5 / static_cast<double>(dim);
  for (auto& x : table) x = static_cast<float>(rng.uniform(-half, half));
}

class LearningRate {
 public:
  LearningRate(const SkipgramConfig& c, std::size_t total_steps)
      : lr0_(c.learning_rate), floor_(c.learning_rate * c.min_learning_rate_ratio),
        total_(static_cast<double>(std::max<std::size_t>(total_steps, 1))) {}

  float next() {
    const double lr = std::max(floor_, lr0_ * (1.0 - static_cast<double>(done_++) / total_));
    return static_cast<float>(lr);
  }

 private:
  double lr0_;
  double floor_;
  double total_;
  std::size_t done_ = 0;
};

// Draws the targets of one pair: the context word then up to k noise words,
// skipping draws equal to the context word.
void draw_targets(const EmbeddingModel& model, std::uint32_t context, std::size_t k, Rng& rng,
                  std::vector<std::uint32_t>& targets) {
  targets.clear();
  targets.push_back(context);
  for (std::size_t i = 0; i < k; ++i) {
    const std::uint32_t neg = model.sample_negative(rng.uniform());
    if (neg != context) targets.push_back(neg);
  }
}

std::vector<std::uint32_t> subsampled(const std::vector<std::uint32_t>& doc, const EmbeddingModel& model,
                                      double total_count, Rng& rng) {
  const double t = model.config().subsample_threshold;
  std::vector<std::uint32_t> out;
  for (auto w : doc) {
    const double f = static_cast<double>(model.vocabulary().count(w)) / total_count;
    const double keep = (std::sqrt(f / t) + 1.0) * t / f;
    if (keep >= 1.0 || rng.uniform() < keep) out.push_back(w);
  }
  return out;
}

struct EvalTriple {
  std::uint32_t center;
  std::vector<std::uint32_t> targets;
};

// A fixed sample of pairs scored after each epoch. Drawn from its own stream
// so observing a run does not change it.
std::vector<EvalTriple> eval_batch(const std::vector<std::vector<std::uint32_t>>& encoded,
                                   const EmbeddingModel& model, Rng rng, std::size_t size = 1000) {
  std::vector<std::pair<std::size_t, std::size_t>> positions;
  for (std::size_t d = 0; d < encoded.size(); ++d) {
    if (encoded[d].size() < 2) continue;
    for (std::size_t t = 0; t < encoded[d].size(); ++t) positions.emplace_back(d, t);
  }
  std::vector<EvalTriple> out;
  if (positions.empty()) return out;
  const std::size_t window = model.config().window;
  for (std::size_t i = 0; i < size; ++i) {
    const auto [d, t] = positions[rng.below(positions.size())];
    const auto& doc = encoded[d];
    const std::size_t lo = t >= window ? t - window : 0;
    const std::size_t hi = std::min(doc.size() - 1, t + window);
    std::size_t c = lo + rng.below(hi - lo);
    if (c >= t) ++c;
    EvalTriple e{doc[t], {}};
    draw_targets(model, doc[c], model.config().negatives, rng, e.targets);
    out.push_back(std::move(e));
  }
  return out;
}

double eval_loss(const EmbeddingModel& model, const std::vector<EvalTriple>& batch) {
  if (batch.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& e : batch) {
    sum += sgns_pair_loss<float>(model.input(e.center), model.output_table(), e.targets);
  }
  return sum / static_cast<double>(batch.size());
}

void skipgram_position(EmbeddingModel& model, const std::vector<std::uint32_t>& doc, std::size_t t, float lr,
                       Rng& rng, std::vector<std::uint32_t>& targets, std::vector<float>& scratch) {
  const std::size_t window = model.config().window;
  const std::size_t lo = t >= window ? t - window : 0;
  const std::size_t hi = std::min(doc.size() - 1, t + window);
  for (std::size_t c = lo; c <= hi; ++c) {
    if (c == t) continue;
    draw_targets(model, doc[c], model.config().negatives, rng, targets);
    sgns_pair_step<float>(model.input(doc[t]), model.output_table(), targets, lr, scratch);
  }
}

void append_floats(std::ostream& out, std::span<const float> values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * 4));
  } else {
    for (float f : values) {
      auto bits = std::bit_cast<std::uint32_t>(f);
      char b[4] = {static_cast<char>(bits), static_cast<char>(bits >> 8), static_cast<char>(bits >> 16),
                   static_cast<char>(bits >> 24)};
      out.write(b, 4);
    }
  }
}

void read_floats(std::istream& in, std::span<float> values) {
  std::vector<unsigned char> buf(values.size() * 4);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
    throw Error(ErrorKind::kFormatError, "embedding file is truncated");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::uint32_t bits = buf[4 * i] | (buf[4 * i + 1] << 8) | (buf[4 * i + 2] << 16) |
                               (static_cast<std::uint32_t>(buf[4 * i + 3]) << 24);
    values[i] = std::bit_cast<float>(bits);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Vocabulary

std::optional<std::uint32_t> Vocabulary::find(std::string_view term) const {
  auto it = lookup_.find(std::string(term));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::index() {
  lookup_.clear();
  for (std::size_t i = 0; i < terms_.size(); ++i) lookup_.emplace(terms_[i], static_cast<std::uint32_t>(i));
}

Vocabulary build_vocabulary(std::span<const TokenDoc> docs, const VocabularyParams& params) {
  if (docs.empty()) throw Error(ErrorKind::kEmptyCorpus, "cannot build a vocabulary from zero documents");
  if (!(params.max_df_ratio > 0.0 && params.max_df_ratio <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "max_df_ratio must lie in (0, 1]");
  }
  struct Tally {
    std::uint64_t count = 0;
    std::uint64_t df = 0;
  };
  std::unordered_map<std::string, Tally> tally;
  for (const auto& doc : docs) {
    std::unordered_set<std::string_view> seen;
    for (const auto& tok : doc) {
      auto& t = tally[tok];
      ++t.count;
      if (seen.insert(tok).second) ++t.df;
    }
  }

  Vocabulary v;
  v.params_ = params;
  v.total_docs_ = docs.size();
  v.stats_.candidates = tally.size();
  const double total = static_cast<double>(docs.size());
  std::vector<std::pair<std::string, Tally>> kept;
  for (auto& [term, t] : tally) {
    if (t.count < params.min_count) {
      ++v.stats_.below_min_count;
    } else if (static_cast<double>(t.df) / total > params.max_df_ratio) {
      ++v.stats_.above_max_df;
    } else {
      kept.emplace_back(term, t);
    }
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second.count != b.second.count) return a.second.count > b.second.count;
    return a.first < b.first;
  });
  if (kept.size() > params.max_size) {
    v.stats_.truncated = kept.size() - params.max_size;
    kept.resize(params.max_size);
  }
  for (auto& [term, t] : kept) {
    v.terms_.push_back(term);
    v.counts_.push_back(t.count);
    v.dfs_.push_back(t.df);
  }
  v.stats_.empty = v.terms_.empty();
  v.index();
  return v;
}

json Vocabulary::to_json() const {
  json terms = json::array();
  for (std::size_t i = 0; i < terms_.size(); ++i) terms.push_back(json::array({terms_[i], counts_[i], dfs_[i]}));
  return json{{"params",
               {{"min_count", params_.min_count},
                {"max_df_ratio", params_.max_df_ratio},
                {"max_size", params_.max_size}}},
              {"total_docs", total_docs_},
              {"stats",
               {{"candidates", stats_.candidates},
                {"below_min_count", stats_.below_min_count},
                {"above_max_df", stats_.above_max_df},
                {"truncated", stats_.truncated},
                {"empty", stats_.empty}}},
              {"terms", std::move(terms)}};
}

Vocabulary Vocabulary::from_json(const json& j) {
  try {
    Vocabulary v;
    const auto& p = j.at("params");
    v.params_.min_count = p.at("min_count").get<std::uint64_t>();
    v.params_.max_df_ratio = p.at("max_df_ratio").get<double>();
    v.params_.max_size = p.at("max_size").get<std::size_t>();
    v.total_docs_ = j.at("total_docs").get<std::uint64_t>();
    if (j.contains("stats")) {
      const auto& s = j.at("stats");
      v.stats_.candidates = s.at("candidates").get<std::size_t>();
      v.stats_.below_min_count = s.at("below_min_count").get<std::size_t>();
      v.stats_.above_max_df = s.at("above_max_df").get<std::size_t>();
      v.stats_.truncated = s.at("truncated").get<std::size_t>();
      v.stats_.empty = s.at("empty").get<bool>();
    }
    for (const auto& t : j.at("terms")) {
      v.terms_.push_back(t.at(0).get<std::string>());
      v.counts_.push_back(t.at(1).get<std::uint64_t>());
      v.dfs_.push_back(t.at(2).get<std::uint64_t>());
    }
    v.index();
    if (v.lookup_.size() != v.terms_.size()) throw Error(ErrorKind::kFormatError, "duplicate vocabulary term");
    return v;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormatError, std::string("bad vocabulary JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Bag of words

std::uint64_t BowVector::total() const {
  std::uint64_t n = 0;
  for (const auto& [i, c] : entries) n += c;
  return n;
}

BowVector bow_vector(const TokenDoc& doc, const Vocabulary& vocab) {
  std::vector<std::uint32_t> ids;
  for (const auto& tok : doc) {
    if (auto i = vocab.find(tok)) ids.push_back(*i);
  }
  std::sort(ids.begin(), ids.end());
  BowVector v;
  for (auto id : ids) {
    if (!v.entries.empty() && v.entries.back().first == id) {
      ++v.entries.back().second;
    } else {
      v.entries.emplace_back(id, 1);
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Embeddings

void SkipgramConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::kConfigError, m); };
  if (dim == 0) fail("embedding dim must be positive");
  if (window == 0) fail("window must be at least 1");
  if (epochs == 0) fail("epochs must be at least 1");
  if (negatives == 0) fail("negatives must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning rate must be positive");
  if (!(min_learning_rate_ratio > 0.0 && min_learning_rate_ratio <= 1.0)) {
    fail("min_learning_rate_ratio must lie in (0, 1]");
  }
  if (subsample && !(subsample_threshold > 0.0)) fail("subsample threshold must be positive");
}

json SkipgramConfig::to_json() const {
  return json{{"dim", dim},
              {"window", window},
              {"epochs", epochs},
              {"negatives", negatives},
              {"learning_rate", learning_rate},
              {"min_learning_rate_ratio", min_learning_rate_ratio},
              {"seed", seed},
              {"subsample", subsample},
              {"subsample_threshold", subsample_threshold},
              {"co_train_words", co_train_words}};
}

SkipgramConfig SkipgramConfig::from_json(const json& j) {
  SkipgramConfig c;
  try {
    c.dim = j.value("dim", c.dim);
    c.window = j.value("window", c.window);
    c.epochs = j.value("epochs", c.epochs);
    c.negatives = j.value("negatives", c.negatives);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.min_learning_rate_ratio = j.value("min_learning_rate_ratio", c.min_learning_rate_ratio);
    c.seed = j.value("seed", c.seed);
    c.subsample = j.value("subsample", c.subsample);
    c.subsample_threshold = j.value("subsample_threshold", c.subsample_threshold);
    c.co_train_words = j.value("co_train_words", c.co_train_words);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormatError, std::string("bad embedding config: ") + e.what());
  }
  c.validate();
  return c;
}

EmbeddingModel::EmbeddingModel(Vocabulary vocab, SkipgramConfig config)
    : vocab_(std::move(vocab)), config_(config) {
  config_.validate();
  input_.assign(vocab_.size() * config_.dim, 0.0f);
  output_.assign(vocab_.size() * config_.dim, 0.0f);
  build_noise();
}

void EmbeddingModel::build_noise() {
  noise_cdf_.clear();
  double acc = 0.0;
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    acc += std::pow(static_cast<double>(vocab_.count(i)), 0.75);
    noise_cdf_.push_back(acc);
  }
  for (auto& x : noise_cdf_) x /= acc;
}

std::uint32_t EmbeddingModel::sample_negative(double u) const {
  auto it = std::upper_bound(noise_cdf_.begin(), noise_cdf_.end(), u);
  if (it == noise_cdf_.end()) --it;
  return static_cast<std::uint32_t>(it - noise_cdf_.begin());
}

std::span<const float> EmbeddingModel::vector(std::string_view term) const {
  if (auto i = vocab_.find(term)) return input(*i);
  return {};
}

bool EmbeddingModel::all_finite() const {
  auto finite = [](float x) { return std::isfinite(x); };
  return std::all_of(input_.begin(), input_.end(), finite) && std::all_of(output_.begin(), output_.end(), finite);
}

template <class T>
double sgns_pair_loss(std::span<const T> v, std::span<const T> u, std::span<const std::uint32_t> targets) {
  const std::size_t dim = v.size();
  double loss = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double f = static_cast<double>(dot<T>(v, u.subspan(targets[i] * dim, dim)));
    loss += i == 0 ? softplus(-f) : softplus(f);
  }
  return loss;
}

template <class T>
void sgns_pair_step(std::span<T> v, std::span<T> u, std::span<const std::uint32_t> targets, T lr,
                    std::span<T> scratch) {
  const std::size_t dim = v.size();
  std::fill(scratch.begin(), scratch.end(), T(0));
  for (std::size_t i = 0; i < targets.size(); ++i) {
    T* uk = u.data() + targets[i] * dim;
    const T f = dot<T>(std::span<const T>(v.data(), dim), std::span<const T>(uk, dim));
    const T g = ((i == 0 ? T(1) : T(0)) - sigmoid(f)) * lr;
    for (std::size_t d = 0; d < dim; ++d) scratch[d] += g * uk[d];
    for (std::size_t d = 0; d < dim; ++d) uk[d] += g * v[d];
  }
  for (std::size_t d = 0; d < dim; ++d) v[d] += scratch[d];
}

template double sgns_pair_loss<float>(std::span<const float>, std::span<const float>,
                                      std::span<const std::uint32_t>);
template double sgns_pair_loss<double>(std::span<const double>, std::span<const double>,
                                       std::span<const std::uint32_t>);
template void sgns_pair_step<float>(std::span<float>, std::span<float>, std::span<const std::uint32_t>, float,
                                    std::span<float>);
template void sgns_pair_step<double>(std::span<double>, std::span<double>, std::span<const std::uint32_t>, double,
                                     std::span<double>);

EmbeddingModel train_skipgram(std::span<const TokenDoc> docs, const Vocabulary& vocab, const SkipgramConfig& config,
                              const EpochObserver& observer) {
  config.validate();
  const auto encoded = encode(docs, vocab);
  const std::size_t tokens = token_total(encoded);
  check_trainable(vocab, tokens);

  EmbeddingModel model(vocab, config);
  Rng rng(config.seed);
  init_uniform(model.input_table(), config.dim, rng);
  std::vector<EvalTriple> batch;
  if (observer) batch = eval_batch(encoded, model, rng.split(1));

  double total_count = 0.0;
  for (std::size_t i = 0; i < vocab.size(); ++i) total_count += static_cast<double>(vocab.count(i));
  LearningRate rate(config, config.epochs * tokens);
  std::vector<std::uint32_t> targets;
  std::vector<float> scratch(config.dim);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& full : encoded) {
      const auto doc = config.subsample ? subsampled(full, model, total_count, rng) : full;
      for (std::size_t t = 0; t < doc.size(); ++t) {
        const float lr = rate.next();
        skipgram_position(model, doc, t, lr, rng, targets, scratch);
      }
    }
    if (observer) observer(epoch, eval_loss(model, batch));
  }
  return model;
}

PvDbowResult train_pvdbow(std::span<const TokenDoc> docs, const Vocabulary& vocab, const SkipgramConfig& config,
                          std::span<const std::string> ids, const EpochObserver& observer) {
  config.validate();
  if (!ids.empty() && ids.size() != docs.size()) {
    throw Error(ErrorKind::kRowMismatch, "document id count differs from document count");
  }
  const auto encoded = encode(docs, vocab);
  const std::size_t tokens = token_total(encoded);
  check_trainable(vocab, tokens);

  PvDbowResult res{{}, EmbeddingModel(vocab, config)};
  EmbeddingModel& model = res.model;
  const std::size_t dim = config.dim;
  Rng rng(config.seed);
  init_uniform(model.input_table(), dim, rng);
  std::vector<float> doc_table(docs.size() * dim);
  init_uniform(doc_table, dim, rng);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (encoded[d].empty()) std::fill_n(doc_table.begin() + static_cast<std::ptrdiff_t>(d * dim), dim, 0.0f);
  }
  std::vector<EvalTriple> batch;
  if (observer) batch = eval_batch(encoded, model, rng.split(1));

  double total_count = 0.0;
  for (std::size_t i = 0; i < vocab.size(); ++i) total_count += static_cast<double>(vocab.count(i));
  LearningRate rate(config, config.epochs * tokens);
  std::vector<std::uint32_t> targets;
  std::vector<float> scratch(dim);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t d = 0; d < encoded.size(); ++d) {
      const auto doc = config.subsample ? subsampled(encoded[d], model, total_count, rng) : encoded[d];
      std::span<float> dv(doc_table.data() + d * dim, dim);
      for (std::size_t t = 0; t < doc.size(); ++t) {
        const float lr = rate.next();
        draw_targets(model, doc[t], config.negatives, rng, targets);
        sgns_pair_step<float>(dv, model.output_table(), targets, lr, scratch);
        if (config.co_train_words) skipgram_position(model, doc, t, lr, rng, targets, scratch);
      }
    }
    if (observer) observer(epoch, eval_loss(model, batch));
  }

  res.docs.reserve(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    res.docs.push_back({ids.empty() ? std::to_string(d) : ids[d],
                        std::vector<float>(doc_table.begin() + static_cast<std::ptrdiff_t>(d * dim),
                                           doc_table.begin() + static_cast<std::ptrdiff_t>((d + 1) * dim))});
  }
  return res;
}

DocEmbedding infer_doc_vector(const EmbeddingModel& model, const TokenDoc& doc, std::size_t epochs,
                              std::uint64_t seed, std::string doc_id) {
  const SkipgramConfig& config = model.config();
  const std::size_t dim = config.dim;
  if (epochs == 0) epochs = config.epochs;
  std::vector<std::uint32_t> ids;
  for (const auto& tok : doc) {
    if (auto i = model.vocabulary().find(tok)) ids.push_back(*i);
  }
  DocEmbedding out{std::move(doc_id), std::vector<float>(dim, 0.0f)};
  if (ids.empty()) return out;

  Rng rng = Rng(config.seed).split(seed + 2);
  init_uniform(out.values, dim, rng);
  LearningRate rate(config, epochs * ids.size());
  std::vector<std::uint32_t> targets;
  std::vector<float> step(dim);
  const auto& u = model.output_table();
  for (std::size_t e = 0; e < epochs; ++e) {
    for (auto w : ids) {
      const float lr = rate.next();
      draw_targets(model, w, config.negatives, rng, targets);
      std::fill(step.begin(), step.end(), 0.0f);
      for (std::size_t i = 0; i < targets.size(); ++i) {
        std::span<const float> uk(u.data() + targets[i] * dim, dim);
        const float g = ((i == 0 ? 1.0f : 0.0f) - sigmoid(dot<float>(out.values, uk))) * lr;
        for (std::size_t d = 0; d < dim; ++d) step[d] += g * uk[d];
      }
      for (std::size_t d = 0; d < dim; ++d) out.values[d] += step[d];
    }
  }
  return out;
}

std::vector<float> mean_word_vector(const EmbeddingModel& model, const TokenDoc& doc) {
  std::vector<float> out(model.dim(), 0.0f);
  std::size_t n = 0;
  for (const auto& tok : doc) {
    auto v = model.vector(tok);
    if (v.empty()) continue;
    for (std::size_t d = 0; d < v.size(); ++d) out[d] += v[d];
    ++n;
  }
  if (n > 0) {
    for (auto& x : out) x /= static_cast<float>(n);
  }
  return out;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::kInvalidArgument, "cosine of vectors with different lengths");
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += static_cast<double>(a[i]) * b[i];
    aa += static_cast<double>(a[i]) * a[i];
    bb += static_cast<double>(b[i]) * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Feature matrices

void FeatureMatrix::add_row(std::string id, SparseRow sparse, std::vector<float> dense) {
  if (dense.size() != dense_cols_) {
    throw Error(ErrorKind::kRowMismatch, "row '" + id + "' has " + std::to_string(dense.size()) +
                                             " dense values, expected " + std::to_string(dense_cols_));
  }
  for (std::size_t i = 0; i < sparse.size(); ++i) {
    if (sparse[i].first >= sparse_cols_ || (i > 0 && sparse[i].first <= sparse[i - 1].first)) {
      throw Error(ErrorKind::kRowMismatch, "row '" + id + "' has a bad sparse index");
    }
  }
  if (!id_index_.emplace(id, ids_.size()).second) {
    throw Error(ErrorKind::kRowMismatch, "duplicate row id '" + id + "'");
  }
  ids_.push_back(std::move(id));
  sparse_.push_back(std::move(sparse));
  dense_.insert(dense_.end(), dense.begin(), dense.end());
}

std::vector<float> FeatureMatrix::densify(std::size_t row) const {
  std::vector<float> out(arity(), 0.0f);
  for (const auto& [i, x] : sparse_[row]) out[i] = x;
  auto d = dense(row);
  std::copy(d.begin(), d.end(), out.begin() + static_cast<std::ptrdiff_t>(sparse_cols_));
  return out;
}

double FeatureMatrix::dot(std::span<const double> w, std::size_t row) const {
  double s = 0.0;
  for (const auto& [i, x] : sparse_[row]) s += w[i] * x;
  auto d = dense(row);
  for (std::size_t k = 0; k < d.size(); ++k) s += w[sparse_cols_ + k] * d[k];
  return s;
}

void FeatureMatrix::axpy(double scale, std::size_t row, std::span<double> w) const {
  for (const auto& [i, x] : sparse_[row]) w[i] += scale * x;
  auto d = dense(row);
  for (std::size_t k = 0; k < d.size(); ++k) w[sparse_cols_ + k] += scale * d[k];
}

FeatureMatrix FeatureMatrix::select(std::span<const std::size_t> rows) const {
  FeatureMatrix out(sparse_cols_, dense_cols_);
  for (auto r : rows) {
    auto d = dense(r);
    out.add_row(ids_[r], sparse_[r], std::vector<float>(d.begin(), d.end()));
  }
  return out;
}

FeatureMatrix bow_matrix(std::span<const TokenDoc> docs, std::span<const std::string> ids, const Vocabulary& vocab) {
  if (docs.size() != ids.size()) throw Error(ErrorKind::kRowMismatch, "document and id counts differ");
  FeatureMatrix m(vocab.size(), 0);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    FeatureMatrix::SparseRow row;
    for (const auto& [k, c] : bow_vector(docs[i], vocab).entries) row.emplace_back(k, static_cast<float>(c));
    m.add_row(ids[i], std::move(row));
  }
  return m;
}

FeatureMatrix boe_matrix(std::span<const DocEmbedding> docs) {
  FeatureMatrix m(0, docs.empty() ? 0 : docs.front().values.size());
  for (const auto& d : docs) m.add_row(d.doc_id, {}, d.values);
  return m;
}

Standardizer Standardizer::fit(const FeatureMatrix& m) {
  const std::size_t cols = m.dense_cols();
  Standardizer s;
  s.mean_.assign(cols, 0.0);
  s.sigma_.assign(cols, 1.0);
  if (m.rows() == 0) return s;
  const double n = static_cast<double>(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto d = m.dense(r);
    for (std::size_t c = 0; c < cols; ++c) s.mean_[c] += d[c];
  }
  for (auto& x : s.mean_) x /= n;
  std::vector<double> var(cols, 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto d = m.dense(r);
    for (std::size_t c = 0; c < cols; ++c) var[c] += (d[c] - s.mean_[c]) * (d[c] - s.mean_[c]);
  }
  for (std::size_t c = 0; c < cols; ++c) {
    const double sd = std::sqrt(var[c] / n);
    s.sigma_[c] = sd < 1e-12 ? 1.0 : sd;
  }
  return s;
}

std::vector<float> Standardizer::apply(std::span<const float> row) const {
  if (row.size() != mean_.size()) throw Error(ErrorKind::kRowMismatch, "standardizer width differs from row width");
  std::vector<float> out(row.size());
  for (std::size_t c = 0; c < row.size(); ++c) out[c] = static_cast<float>((row[c] - mean_[c]) / sigma_[c]);
  return out;
}

json Standardizer::to_json() const { return json{{"mean", mean_}, {"sigma", sigma_}}; }

Standardizer Standardizer::from_json(const json& j) {
  Standardizer s;
  try {
    s.mean_ = j.at("mean").get<std::vector<double>>();
    s.sigma_ = j.at("sigma").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormatError, std::string("bad standardizer: ") + e.what());
  }
  if (s.mean_.size() != s.sigma_.size()) throw Error(ErrorKind::kFormatError, "standardizer arrays differ in length");
  return s;
}

FeatureMatrix concat_features(const FeatureMatrix& bow, const FeatureMatrix& boe, const Standardizer& standardizer) {
  if (bow.rows() != boe.rows()) {
    throw Error(ErrorKind::kRowMismatch, "BoW has " + std::to_string(bow.rows()) + " rows, BoE has " +
                                             std::to_string(boe.rows()));
  }
  if (bow.dense_cols() != 0 || boe.sparse_cols() != 0) {
    throw Error(ErrorKind::kInvalidArgument, "concat_features expects a sparse BoW block and a dense BoE block");
  }
  FeatureMatrix out(bow.sparse_cols(), boe.dense_cols());
  for (std::size_t r = 0; r < bow.rows(); ++r) {
    if (bow.ids()[r] != boe.ids()[r]) {
      throw Error(ErrorKind::kRowMismatch, "row " + std::to_string(r) + " ids differ: '" + bow.ids()[r] + "' vs '" +
                                               boe.ids()[r] + "'");
    }
    out.add_row(bow.ids()[r], bow.sparse(r), standardizer.apply(boe.dense(r)));
  }
  return out;
}

std::pair<FeatureMatrix, Standardizer> concat_features(const FeatureMatrix& bow, const FeatureMatrix& boe) {
  Standardizer s = Standardizer::fit(boe);
  FeatureMatrix m = concat_features(bow, boe, s);
  return {std::move(m), std::move(s)};
}

// ---------------------------------------------------------------------------
// Serialization

void write_embedding_model(std::ostream& out, const EmbeddingModel& model, std::span<const DocEmbedding> docs) {
  json header{{"magic", "CPEMB1"},
              {"config", model.config().to_json()},
              {"vocabulary", model.vocabulary().to_json()},
              {"rows", model.vocabulary().size()},
              {"cols", model.dim()}};
  if (!docs.empty()) {
    json ids = json::array();
    for (const auto& d : docs) {
      if (d.values.size() != model.dim()) throw Error(ErrorKind::kRowMismatch, "document vector width differs");
      ids.push_back(d.doc_id);
    }
    header["doc_ids"] = std::move(ids);
  }
  out << header.dump() << '\n';
  append_floats(out, model.input_table());
  append_floats(out, model.output_table());
  for (const auto& d : docs) append_floats(out, d.values);
  if (!out) throw Error(ErrorKind::kIoError, "failed writing embedding model");
}

LoadedEmbedding read_embedding_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::kFormatError, "empty embedding file");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception&) {
    throw Error(ErrorKind::kFormatError, "embedding header is not JSON");
  }
  if (!header.is_object() || header.value("magic", "") != "CPEMB1") {
    throw Error(ErrorKind::kFormatError, "not a CPEMB1 embedding file");
  }
  LoadedEmbedding res;
  try {
    Vocabulary vocab = Vocabulary::from_json(header.at("vocabulary"));
    SkipgramConfig config = SkipgramConfig::from_json(header.at("config"));
    if (header.at("rows").get<std::size_t>() != vocab.size() || header.at("cols").get<std::size_t>() != config.dim) {
      throw Error(ErrorKind::kFormatError, "embedding header dimensions disagree");
    }
    res.model = EmbeddingModel(std::move(vocab), config);
    read_floats(in, res.model.input_table());
    read_floats(in, res.model.output_table());
    if (header.contains("doc_ids")) {
      for (const auto& id : header.at("doc_ids")) {
        DocEmbedding d{id.get<std::string>(), std::vector<float>(config.dim)};
        read_floats(in, d.values);
        res.docs.push_back(std::move(d));
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormatError, std::string("bad embedding header: ") + e.what());
  }
  return res;
}

}  // namespace citypulse
