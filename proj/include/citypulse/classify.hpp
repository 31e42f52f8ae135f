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

#ifndef CITYPULSE_CLASSIFY_HPP_
#define CITYPULSE_CLASSIFY_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "citypulse/features.hpp"
#include "citypulse/ingest.hpp"

namespace citypulse {

/// Labels are +1 (travel-related) and -1 (non-related).
using Labels = std::vector<int>;

/// Anything that scores a row; label is +1 iff score > threshold().
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual double score(const FeatureMatrix& x, std::size_t row) const = 0;
  virtual double threshold() const = 0;
  virtual std::size_t arity() const = 0;
  int predict(const FeatureMatrix& x, std::size_t row) const { return score(x, row) > threshold() ? 1 : -1; }
};

using Trainer = std::function<std::unique_ptr<Classifier>(const FeatureMatrix& x, std::span<const int> y,
                                                          std::uint64_t seed)>;

// ---------------------------------------------------------------------------
// Linear models

enum class LossKind { kHinge, kLogistic };

std::string_view loss_kind_name(LossKind kind);
/// "hinge" / "svm" or "logistic" / "lr"; throws Error(ConfigError).
LossKind parse_loss_kind(std::string_view name);

struct LinearConfig {
  LossKind loss = LossKind::kHinge;
  double lambda = 1e-4;
  std::size_t epochs = 50;
  /// Logistic step size is eta0 / (1 + eta0 lambda t); hinge uses 1 / (lambda t).
  double eta0 = 0.5;
  /// z-score the dense block on the training rows; folded back into the
  /// stored weights so the model scores raw rows.
  bool standardize_dense = true;
  /// Report and return the mean of each epoch's iterates instead of the last one.
  bool average = true;
  std::uint64_t seed = 1;

  void validate() const;
  nlohmann::json to_json() const;
  static LinearConfig from_json(const nlohmann::json& j);
};

class LinearModel : public Classifier {
 public:
  LinearModel() = default;
  LinearModel(std::vector<double> weights, double bias, LinearConfig config)
      : weights_(std::move(weights)), bias_(bias), config_(config) {}

  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }
  const LinearConfig& config() const { return config_; }

  /// w . x + b
  double score(const FeatureMatrix& x, std::size_t row) const override;
  double threshold() const override { return 0.0; }
  std::size_t arity() const override { return weights_.size(); }

 private:
  std::vector<double> weights_;
  double bias_ = 0.0;
  LinearConfig config_;
};

/// Called after each epoch with the regularized objective on the training set.
using LinearEpochObserver = std::function<void(std::size_t epoch, double objective)>;

/// SGD on lambda/2 (|w|^2 + b^2) + mean loss(y (w.x + b)); the bias is an
/// augmented constant feature. Each epoch visits a fresh seeded permutation.
/// Throws Error(SingleClassTraining) unless both labels occur, and
/// Error(RowMismatch) when y and x differ in length.
LinearModel train_linear(const FeatureMatrix& x, std::span<const int> y, const LinearConfig& config,
                         const LinearEpochObserver& observer = {});

/// The training objective at an augmented weight vector (bias last).
double linear_objective(const FeatureMatrix& x, std::span<const int> y, std::span<const double> w_aug,
                        LossKind loss, double lambda);
/// Its (sub)gradient with respect to w_aug.
std::vector<double> linear_objective_gradient(const FeatureMatrix& x, std::span<const int> y,
                                              std::span<const double> w_aug, LossKind loss, double lambda);

/// Container format: one JSON header line with magic "CPLIN1", the config,
/// "arity" and "bias"; then arity little-endian float32 weights.
void write_linear_model(std::ostream& out, const LinearModel& model);
/// Throws Error(FormatError).
LinearModel read_linear_model(std::istream& in);

// ---------------------------------------------------------------------------
// Random forest

struct ForestConfig {
  std::size_t trees = 100;
  /// 0 means floor(sqrt(arity)).
  std::size_t max_features = 0;
  std::size_t min_leaf = 1;
  bool bootstrap = true;
  std::uint64_t seed = 1;

  std::size_t features_per_node(std::size_t arity) const;
  void validate() const;
  nlohmann::json to_json() const;
  static ForestConfig from_json(const nlohmann::json& j);
};

/// Flat node arrays; a node with left == 0 is a leaf (the root is node 0, so
/// no node points back at it). Rows go left when x[feature] <= threshold.
struct DecisionTree {
  std::vector<std::uint32_t> feature;
  std::vector<double> threshold;
  std::vector<std::uint32_t> left;
  std::vector<std::uint32_t> right;
  std::vector<int> vote;

  std::size_t nodes() const { return vote.size(); }
  bool is_leaf(std::size_t n) const { return left[n] == 0; }
  int predict(std::span<const float> row) const;
  /// Leaf votes are +/-1 and internal features are below arity.
  bool valid(std::size_t arity) const;
};

struct SplitChoice {
  bool found = false;
  std::uint32_t feature = 0;
  double threshold = 0.0;
  /// Size-weighted gini of the two children.
  double impurity = 0.0;
};

/// Best gini split of `rows` over `features`: thresholds are midpoints of
/// consecutive distinct values; ties keep the earliest feature in the given
/// order, then the lowest threshold. Both children must hold >= min_leaf rows.
SplitChoice best_gini_split(std::span<const std::vector<float>> rows, std::span<const int> y,
                            std::span<const std::uint32_t> features, std::size_t min_leaf = 1);

/// Size-weighted gini impurity of splitting at x[feature] <= threshold.
double split_impurity(std::span<const std::vector<float>> rows, std::span<const int> y, std::uint32_t feature,
                      double threshold);

/// Row indices of one bootstrap resample of n rows.
std::vector<std::size_t> bootstrap_sample(std::size_t n, std::uint64_t seed);

class ForestModel : public Classifier {
 public:
  ForestModel() = default;
  ForestModel(std::vector<DecisionTree> trees, std::size_t arity, ForestConfig config)
      : trees_(std::move(trees)), arity_(arity), config_(config) {}

  const std::vector<DecisionTree>& trees() const { return trees_; }
  const ForestConfig& config() const { return config_; }

  /// Fraction of trees voting +1.
  double score(const FeatureMatrix& x, std::size_t row) const override;
  double score_dense(std::span<const float> row) const;
  double threshold() const override { return 0.5; }
  std::size_t arity() const override { return arity_; }

  /// Misclassified fraction over rows that were out of bag for at least one
  /// tree; NaN when no row was ever out of bag. Set by the trainer.
  double oob_error() const { return oob_error_; }
  void set_oob_error(double e) { oob_error_ = e; }

 private:
  std::vector<DecisionTree> trees_;
  std::size_t arity_ = 0;
  ForestConfig config_;
  double oob_error_ = 0.0;
};

/// Tree t is grown on bootstrap_sample(n, seed + t) (or all rows) with
/// features drawn per node from Rng(seed + t). When every drawn feature is
/// constant on the node, drawing continues until a usable one is found or
/// all are exhausted. Throws Error(SingleClassTraining).
ForestModel train_random_forest(const FeatureMatrix& x, std::span<const int> y, const ForestConfig& config);

/// The CART grower used by the forest, on the given row indices.
DecisionTree grow_tree(std::span<const std::vector<float>> rows, std::span<const int> y,
                       std::span<const std::size_t> sample, std::size_t max_features, std::size_t min_leaf,
                       std::uint64_t seed);

/// Container format: a single JSON document with magic "CPRF1", the config,
/// "arity", "oob_error" and the node arrays of every tree.
void write_forest_model(std::ostream& out, const ForestModel& model);
/// Throws Error(FormatError).
ForestModel read_forest_model(std::istream& in);

/// Reads either container by its magic.
std::unique_ptr<Classifier> read_classifier(std::istream& in);
void write_classifier(std::ostream& out, const Classifier& model);

// ---------------------------------------------------------------------------
// Evaluation

struct ConfusionCounts {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  /// Throws Error(RowMismatch) when lengths differ.
  static ConfusionCounts tally(std::span<const int> predicted, std::span<const int> truth);

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// Set when any of the three was 0/0 and reported as 0.
  bool degenerate = false;
};

Metrics metrics(const ConfusionCounts& counts);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;

  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct RocResult {
  std::vector<RocPoint> points;
  double auc = 0.5;
  /// Single-class input: AUC is reported as 0.5 over the diagonal.
  bool degenerate = false;
};

/// One point per distinct score, from (0,0) to (1,1); a group of tied scores
/// becomes one diagonal segment, so the trapezoidal area counts ties as 1/2.
RocResult roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Trapezoidal area under a point list.
double trapezoid_area(std::span<const RocPoint> points);

struct EvalReport {
  ConfusionCounts counts;
  Metrics metrics;
  RocResult roc;

  nlohmann::json to_json() const;
};

EvalReport evaluate_scores(std::span<const double> scores, std::span<const int> labels, double threshold);
EvalReport evaluate(const Classifier& model, const FeatureMatrix& x, std::span<const int> labels);

/// Unweighted mean of per-unit scalar metrics.
struct MeanReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.0;
  std::size_t units = 0;

  static MeanReport of(std::span<const EvalReport> reports);
  nlohmann::json to_json() const;
};

/// Folds as row-index lists. Stratified mode shuffles each class and deals it
/// round-robin with one running fold counter, so per-class and total fold
/// sizes differ by at most one. Throws Error(TooFewExamples) when n < k and
/// Error(InvalidArgument) when k < 2.
std::vector<std::vector<std::size_t>> kfold_indices(std::span<const int> labels, std::size_t k, bool stratified,
                                                    std::uint64_t seed);

struct CvResult {
  std::vector<EvalReport> folds;
  MeanReport mean;

  nlohmann::json to_json() const;
};

/// Fold f trains with seed + f.
CvResult k_fold_cv(const FeatureMatrix& x, std::span<const int> y, std::size_t k, bool stratified,
                   std::uint64_t seed, const Trainer& trainer);

/// Per-row input to the leave-one-group-out split. Positives carry the
/// transport modes they mention; negatives carry none.
struct GroupedExample {
  int label = -1;
  std::vector<std::string> modes;
};

struct LogoFold {
  std::string hidden_mode;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::size_t train_positives = 0;
  std::size_t test_positives = 0;
  std::size_t train_negatives = 0;
  std::size_t test_negatives = 0;
};

/// One fold per mode of `modes`. Every positive mentioning the hidden mode is
/// a test positive; the other positives train. A single seeded sample of
/// `test_negatives` negatives is shared by every fold as test negatives and
/// the rest train. Throws Error(UnknownMode) for a mode outside `modes`,
/// Error(EmptyGroup) when a fold has no test or no training positives, and
/// Error(InvalidArgument) when there are too few negatives.
std::vector<LogoFold> logo_split_plan(std::span<const GroupedExample> examples, std::span<const std::string> modes,
                                      std::size_t test_negatives, std::uint64_t seed);

struct LogoResult {
  std::vector<LogoFold> folds;
  std::vector<EvalReport> reports;
  MeanReport mean;

  nlohmann::json to_json() const;
};

/// Fold i trains with seed + i.
LogoResult leave_one_group_out(const FeatureMatrix& x, std::span<const GroupedExample> examples,
                               std::span<const std::string> modes, std::size_t test_negatives, std::uint64_t seed,
                               const Trainer& trainer);

/// CSV header for summary rows.
inline constexpr const char* kEvalCsvHeader = "model,features,precision,recall,f1,auc";
std::string eval_csv_row(std::string_view model, std::string_view features, double precision, double recall,
                         double f1, double auc);

// ---------------------------------------------------------------------------
// Candidate search

/// lang -> mode -> lowercase terms.
class TravelTermTable {
 public:
  TravelTermTable() = default;
  /// Tab-separated lang, mode, term lines; '#' comments.
  static TravelTermTable parse(std::string_view tsv);
  static const TravelTermTable& bundled();

  void add(const std::string& lang, const std::string& mode, const std::string& term);
  /// Modes whose term list for `lang` contains `token`.
  std::vector<std::string> modes_of(std::string_view lang, const std::string& token) const;
  std::vector<std::string> modes(std::string_view lang) const;
  const std::map<std::string, std::map<std::string, std::vector<std::string>>>& entries() const { return entries_; }

 private:
  std::map<std::string, std::map<std::string, std::vector<std::string>>> entries_;
};

struct TermMatch {
  std::string id;
  /// Sorted, distinct.
  std::vector<std::string> modes;

  friend bool operator==(const TermMatch&, const TermMatch&) = default;
};

/// Modes whose terms occur as whole lowercase tokens of `text`.
std::vector<std::string> match_travel_terms(std::string_view text, std::string_view lang,
                                            const TravelTermTable& table);

/// Records with at least one match, in input order, using each record's lang.
std::vector<TermMatch> travel_term_search(std::span<const TweetRecord> records, const TravelTermTable& table);

}  // namespace citypulse

#endif  // CITYPULSE_CLASSIFY_HPP_
