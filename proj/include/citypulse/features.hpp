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

#ifndef CITYPULSE_FEATURES_HPP_
#define CITYPULSE_FEATURES_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace citypulse {

/// A preprocessed document: its tokens in order.
using TokenDoc = std::vector<std::string>;

struct VocabularyParams {
  std::uint64_t min_count = 1;
  double max_df_ratio = 1.0;
  std::size_t max_size = std::numeric_limits<std::size_t>::max();

  friend bool operator==(const VocabularyParams&, const VocabularyParams&) = default;
};

/// How many candidate terms each threshold removed during a build.
struct VocabularyStats {
  std::size_t candidates = 0;
  std::size_t below_min_count = 0;
  std::size_t above_max_df = 0;
  std::size_t truncated = 0;
  bool empty = false;

  friend bool operator==(const VocabularyStats&, const VocabularyStats&) = default;
};

/// Unigram vocabulary. Index order is corpus count descending, ties broken
/// lexicographically.
class Vocabulary {
 public:
  Vocabulary() = default;

  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  std::optional<std::uint32_t> find(std::string_view term) const;
  const std::string& term(std::size_t i) const { return terms_[i]; }
  std::uint64_t count(std::size_t i) const { return counts_[i]; }
  std::uint64_t doc_frequency(std::size_t i) const { return dfs_[i]; }
  std::uint64_t total_docs() const { return total_docs_; }
  const VocabularyParams& params() const { return params_; }
  const VocabularyStats& stats() const { return stats_; }
  const std::vector<std::string>& terms() const { return terms_; }

  nlohmann::json to_json() const;
  /// Throws Error(FormatError).
  static Vocabulary from_json(const nlohmann::json& j);

  friend Vocabulary build_vocabulary(std::span<const TokenDoc> docs, const VocabularyParams& params);

 private:
  void index();

  std::vector<std::string> terms_;
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> dfs_;
  std::uint64_t total_docs_ = 0;
  VocabularyParams params_;
  VocabularyStats stats_;
  std::unordered_map<std::string, std::uint32_t> lookup_;
};

/// Keeps terms with count >= min_count and df / docs <= max_df_ratio, then the
/// max_size most frequent of those. An empty result is reported through
/// stats().empty rather than thrown. Throws Error(EmptyCorpus) for zero docs
/// and Error(InvalidArgument) for max_df_ratio outside (0, 1].
Vocabulary build_vocabulary(std::span<const TokenDoc> docs, const VocabularyParams& params);

/// Sparse term counts, indices strictly increasing.
struct BowVector {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;

  std::uint64_t total() const;
  friend bool operator==(const BowVector&, const BowVector&) = default;
};

BowVector bow_vector(const TokenDoc& doc, const Vocabulary& vocab);

struct SkipgramConfig {
  std::size_t dim = 100;
  std::size_t window = 2;
  std::size_t epochs = 10;
  std::size_t negatives = 5;
  double learning_rate = 0.025;
  /// The rate decays linearly to learning_rate * min_learning_rate_ratio.
  double min_learning_rate_ratio = 1e-4;
  std::uint64_t seed = 1;
  /// word2vec-style frequency subsampling; off unless requested.
  bool subsample = false;
  double subsample_threshold = 1e-3;
  /// PV-DBOW only: interleave skip-gram updates of the word vectors.
  bool co_train_words = true;

  /// Throws Error(ConfigError).
  void validate() const;
  nlohmann::json to_json() const;
  static SkipgramConfig from_json(const nlohmann::json& j);

  friend bool operator==(const SkipgramConfig&, const SkipgramConfig&) = default;
};

/// Input (word) and output (context) tables, |V| x dim each, row-major.
class EmbeddingModel {
 public:
  EmbeddingModel() = default;
  EmbeddingModel(Vocabulary vocab, SkipgramConfig config);

  const Vocabulary& vocabulary() const { return vocab_; }
  const SkipgramConfig& config() const { return config_; }
  std::size_t dim() const { return config_.dim; }

  std::span<const float> input(std::size_t word) const { return {input_.data() + word * dim(), dim()}; }
  std::span<float> input(std::size_t word) { return {input_.data() + word * dim(), dim()}; }
  std::span<const float> output(std::size_t word) const { return {output_.data() + word * dim(), dim()}; }
  std::span<float> output(std::size_t word) { return {output_.data() + word * dim(), dim()}; }
  /// Input vector of a term, empty when the term is out of vocabulary.
  std::span<const float> vector(std::string_view term) const;

  std::vector<float>& input_table() { return input_; }
  std::vector<float>& output_table() { return output_; }
  const std::vector<float>& input_table() const { return input_; }
  const std::vector<float>& output_table() const { return output_; }

  /// Draws from unigram counts raised to 0.75.
  std::uint32_t sample_negative(double u) const;

  bool all_finite() const;

 private:
  void build_noise();

  Vocabulary vocab_;
  SkipgramConfig config_;
  std::vector<float> input_;
  std::vector<float> output_;
  std::vector<double> noise_cdf_;
};

struct DocEmbedding {
  std::string doc_id;
  std::vector<float> values;
};

/// Called after every epoch with the mean negative-sampling loss over a fixed
/// evaluation batch of (center, context, negatives) triples drawn once before
/// training.
using EpochObserver = std::function<void(std::size_t epoch, double eval_loss)>;

/// Skip-gram with negative sampling: for every token w_t and every w_{t+j},
/// 0 < |j| <= window, inside one document, raises
///   log s(u_{t+j} . v_t) + sum_k log s(-u_k . v_t)
/// by one SGD step. v is the input table, u the output table, s the logistic
/// function, and the k noise words come from the unigram^0.75 distribution
/// (a draw equal to the context word is skipped). Input rows start uniform in
/// [-0.5/dim, 0.5/dim), output rows at zero. Single-threaded and deterministic
/// for a given seed.
/// Throws Error(EmptyCorpus) when no token is in the vocabulary and
/// Error(DegenerateVocabulary) when |V| < 2.
EmbeddingModel train_skipgram(std::span<const TokenDoc> docs, const Vocabulary& vocab, const SkipgramConfig& config,
                              const EpochObserver& observer = {});

struct PvDbowResult {
  std::vector<DocEmbedding> docs;
  EmbeddingModel model;
};

/// PV-DBOW: each document vector is trained to predict each of the document's
/// tokens against the shared output table. When config.co_train_words is set,
/// skip-gram updates of the word vectors are interleaved position by position.
/// `ids` names the documents; when empty the decimal index is used.
PvDbowResult train_pvdbow(std::span<const TokenDoc> docs, const Vocabulary& vocab, const SkipgramConfig& config,
                          std::span<const std::string> ids = {}, const EpochObserver& observer = {});

/// Fits a fresh document vector against the frozen output table. Zero vector
/// when no token is in vocabulary. `epochs` of 0 means config().epochs.
DocEmbedding infer_doc_vector(const EmbeddingModel& model, const TokenDoc& doc, std::size_t epochs = 0,
                              std::uint64_t seed = 0, std::string doc_id = {});

/// Average of the input vectors of in-vocabulary tokens; zeros if none.
std::vector<float> mean_word_vector(const EmbeddingModel& model, const TokenDoc& doc);

/// dot(a, b) / (|a| |b|), 0 when either norm is 0. Clamped to [-1, 1].
double cosine(std::span<const float> a, std::span<const float> b);

/// Negative-sampling loss of one (center, context) pair and its update, shared
/// by training and the gradient check. `v` is the center input vector, `u`
/// the output table, `targets[0]` the context word, the rest noise words.
///   loss = -log s(u_0 . v) - sum_{k>0} log s(-u_k . v)
template <class T>
double sgns_pair_loss(std::span<const T> v, std::span<const T> u, std::span<const std::uint32_t> targets);

/// One gradient-descent step of the loss above with rate `lr`. Each u_k moves
/// using the v held before the step; v moves by the sum of its per-target
/// gradients, so for distinct targets the step is exactly -lr * gradient.
/// `scratch` must hold v.size() elements.
template <class T>
void sgns_pair_step(std::span<T> v, std::span<T> u, std::span<const std::uint32_t> targets, T lr,
                    std::span<T> scratch);

/// Row-aligned feature rows: a sparse block of `sparse_cols` columns followed
/// by a dense block of `dense_cols` columns.
class FeatureMatrix {
 public:
  using SparseRow = std::vector<std::pair<std::uint32_t, float>>;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t sparse_cols, std::size_t dense_cols)
      : sparse_cols_(sparse_cols), dense_cols_(dense_cols) {}

  /// Throws Error(RowMismatch) on a duplicate id, a dense row of the wrong
  /// length, or a sparse index out of range / not increasing.
  void add_row(std::string id, SparseRow sparse, std::vector<float> dense = {});

  std::size_t rows() const { return ids_.size(); }
  std::size_t arity() const { return sparse_cols_ + dense_cols_; }
  std::size_t sparse_cols() const { return sparse_cols_; }
  std::size_t dense_cols() const { return dense_cols_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const SparseRow& sparse(std::size_t row) const { return sparse_[row]; }
  std::span<const float> dense(std::size_t row) const {
    return {dense_.data() + row * dense_cols_, dense_cols_};
  }
  /// The full row as a dense vector of arity() values.
  std::vector<float> densify(std::size_t row) const;
  /// dot(w, row) for a weight vector of arity() values.
  double dot(std::span<const double> w, std::size_t row) const;
  /// w += scale * row.
  void axpy(double scale, std::size_t row, std::span<double> w) const;

  FeatureMatrix select(std::span<const std::size_t> rows) const;

 private:
  std::size_t sparse_cols_ = 0;
  std::size_t dense_cols_ = 0;
  std::vector<std::string> ids_;
  std::vector<SparseRow> sparse_;
  std::vector<float> dense_;
  std::unordered_map<std::string, std::size_t> id_index_;
};

FeatureMatrix bow_matrix(std::span<const TokenDoc> docs, std::span<const std::string> ids, const Vocabulary& vocab);
FeatureMatrix boe_matrix(std::span<const DocEmbedding> docs);

/// Per-column z-score of a dense block, fitted once on training rows and
/// reapplied to test rows. sigma below 1e-12 is clamped to 1.
class Standardizer {
 public:
  Standardizer() = default;
  static Standardizer fit(const FeatureMatrix& dense_rows);

  bool fitted() const { return !mean_.empty(); }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& sigma() const { return sigma_; }
  std::vector<float> apply(std::span<const float> row) const;

  nlohmann::json to_json() const;
  static Standardizer from_json(const nlohmann::json& j);

 private:
  std::vector<double> mean_;
  std::vector<double> sigma_;
};

/// BoW block first, standardized BoE block second. Throws Error(RowMismatch)
/// when row counts or ids differ.
FeatureMatrix concat_features(const FeatureMatrix& bow, const FeatureMatrix& boe, const Standardizer& standardizer);
/// Fits the standardizer on `boe` and returns it alongside the result.
std::pair<FeatureMatrix, Standardizer> concat_features(const FeatureMatrix& bow, const FeatureMatrix& boe);

/// Container format: one JSON header line with magic "CPEMB1", the config,
/// the vocabulary, "rows" and "cols", and optional "doc_ids"; then the input
/// table, the output table and, if doc_ids is present, the document table,
/// each as little-endian float32 in row-major order.
void write_embedding_model(std::ostream& out, const EmbeddingModel& model, std::span<const DocEmbedding> docs = {});
struct LoadedEmbedding {
  EmbeddingModel model;
  std::vector<DocEmbedding> docs;
};
/// Throws Error(FormatError).
LoadedEmbedding read_embedding_model(std::istream& in);

}  // namespace citypulse

#endif  // CITYPULSE_FEATURES_HPP_
