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

#include "citypulse/classify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "citypulse/bundled_data.hpp"
#include "citypulse/csv.hpp"
#include "citypulse/error.hpp"
#include "citypulse/rng.hpp"
#include "citypulse/textprep.hpp"
#include "citypulse/utf8.hpp"

namespace citypulse {

using nlohmann::json;

namespace {

double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void check_labels(const FeatureMatrix& x, std::span<const int> y) {
  if (x.rows() != y.size()) {
    throw Error(ErrorKind::kRowMismatch,
                std::to_string(x.rows()) + " feature rows but " + std::to_string(y.size()) + " labels");
  }
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) {
      pos = true;
    } else if (v == -1) {
      neg = true;
    } else {
      throw Error(ErrorKind::kInvalidArgument, "labels must be +1 or -1, got " + std::to_string(v));
    }
  }
  if (!pos || !neg) throw Error(ErrorKind::kSingleClassTraining, "training data holds a single class");
}

double aug_dot(const FeatureMatrix& x, std::span<const double> w_aug, std::size_t row) {
  return x.dot(w_aug.first(x.arity()), row) + w_aug[x.arity()];
}

void append_floats(std::ostream& out, std::span<const float> values) {
  for (float f : values) {
    const auto bits = std::bit_cast<std::uint32_t>(f);
    const char b[4] = {static_cast<char>(bits), static_cast<char>(bits >> 8), static_cast<char>(bits >> 16),
                       static_cast<char>(bits >> 24)};
    out.write(b, 4);
  }
}

void read_floats(std::istream& in, std::span<float> values) {
  std::vector<unsigned char> buf(values.size() * 4);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size()) throw Error(ErrorKind::kFormatError, "model file is truncated");
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::uint32_t bits = buf[4 * i] | (buf[4 * i + 1] << 8) | (buf[4 * i + 2] << 16) |
                               (static_cast<std::uint32_t>(buf[4 * i + 3]) << 24);
    values[i] = std::bit_cast<float>(bits);
  }
}

json read_header_line(std::istream& in, const char* magic) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::kFormatError, "empty model file");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception&) {
    throw Error(ErrorKind::kFormatError, "model header is not JSON");
  }
  if (!header.is_object() || header.value("magic", "") != magic) {
    throw Error(ErrorKind::kFormatError, std::string("not a ") + magic + " model file");
  }
  return header;
}

}  // namespace

// ---------------------------------------------------------------------------
// Linear models

std::string_view loss_kind_name(LossKind kind) { return kind == LossKind::kHinge ? "hinge" : "logistic"; }

LossKind parse_loss_kind(std::string_view name) {
  if (name == "hinge" || name == "svm") return LossKind::kHinge;
  if (name == "logistic" || name == "lr") return LossKind::kLogistic;
  throw Error(ErrorKind::kConfigError, "unknown loss '" + std::string(name) + "'");
}

void LinearConfig::validate() const {
  if (!(lambda > 0) || !std::isfinite(lambda)) throw Error(ErrorKind::kConfigError, "lambda must be > 0");
  if (epochs < 1) throw Error(ErrorKind::kConfigError, "epochs must be >= 1");
  if (!(eta0 > 0) || eta0 * lambda >= 1.0) throw Error(ErrorKind::kConfigError, "eta0 must be in (0, 1/lambda)");
}

json LinearConfig::to_json() const {
  return json{{"loss", loss_kind_name(loss)}, {"lambda", lambda},   {"epochs", epochs},
              {"eta0", eta0},                 {"standardize_dense", standardize_dense}, {"average", average},
              {"seed", seed}};
}

LinearConfig LinearConfig::from_json(const json& j) {
  LinearConfig c;
  try {
    if (j.contains("loss")) c.loss = parse_loss_kind(j.at("loss").get<std::string>());
    c.lambda = j.value("lambda", c.lambda);
    c.epochs = j.value("epochs", c.epochs);
    c.eta0 = j.value("eta0", c.eta0);
    c.standardize_dense = j.value("standardize_dense", c.standardize_dense);
    c.average = j.value("average", c.average);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfigError, std::string("bad linear config: ") + e.what());
  }
  c.validate();
  return c;
}

double LinearModel::score(const FeatureMatrix& x, std::size_t row) const {
  if (x.arity() != weights_.size()) {
    throw Error(ErrorKind::kRowMismatch, "model arity " + std::to_string(weights_.size()) + " but features have " +
                                             std::to_string(x.arity()));
  }
  return x.dot(weights_, row) + bias_;
}

double linear_objective(const FeatureMatrix& x, std::span<const int> y, std::span<const double> w_aug, LossKind loss,
                        double lambda) {
  if (w_aug.size() != x.arity() + 1) throw Error(ErrorKind::kRowMismatch, "augmented weight width differs");
  double reg = 0.0;
  for (double v : w_aug) reg += v * v;
  double risk = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double m = y[i] * aug_dot(x, w_aug, i);
    risk += loss == LossKind::kHinge ? std::max(0.0, 1.0 - m) : softplus(-m);
  }
  return 0.5 * lambda * reg + (x.rows() ? risk / static_cast<double>(x.rows()) : 0.0);
}

std::vector<double> linear_objective_gradient(const FeatureMatrix& x, std::span<const int> y,
                                              std::span<const double> w_aug, LossKind loss, double lambda) {
  if (w_aug.size() != x.arity() + 1) throw Error(ErrorKind::kRowMismatch, "augmented weight width differs");
  std::vector<double> g(w_aug.size());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = lambda * w_aug[j];
  const double inv_n = x.rows() ? 1.0 / static_cast<double>(x.rows()) : 0.0;
  std::span<double> gw(g.data(), x.arity());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double m = y[i] * aug_dot(x, w_aug, i);
    const double dl = loss == LossKind::kHinge ? (m < 1.0 ? -1.0 : 0.0) : -sigmoid(-m);
    if (dl == 0.0) continue;
    x.axpy(dl * y[i] * inv_n, i, gw);
    g[x.arity()] += dl * y[i] * inv_n;
  }
  return g;
}

LinearModel train_linear(const FeatureMatrix& x_raw, std::span<const int> y, const LinearConfig& config,
                         const LinearEpochObserver& observer) {
  config.validate();
  check_labels(x_raw, y);

  Standardizer standardizer;
  FeatureMatrix scaled;
  const bool scale = config.standardize_dense && x_raw.dense_cols() > 0;
  if (scale) {
    standardizer = Standardizer::fit(x_raw);
    scaled = FeatureMatrix(x_raw.sparse_cols(), x_raw.dense_cols());
    for (std::size_t r = 0; r < x_raw.rows(); ++r) {
      scaled.add_row(x_raw.ids()[r], x_raw.sparse(r), standardizer.apply(x_raw.dense(r)));
    }
  }
  const FeatureMatrix& x = scale ? scaled : x_raw;

  // w_aug = s * v; the scalar absorbs the uniform shrink of each step.
  const std::size_t arity = x.arity();
  std::vector<double> v(arity + 1, 0.0);
  double s = 1.0;
  std::span<double> vw(v.data(), arity);
  Rng rng(config.seed);
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::uint64_t t = 0;
  std::vector<double> w(arity + 1, 0.0);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t i : order) {
      ++t;
      const double eta = config.loss == LossKind::kHinge
                             ? 1.0 / (config.lambda * static_cast<double>(t))
                             : config.eta0 / (1.0 + config.eta0 * config.lambda * static_cast<double>(t));
      const double m = y[i] * s * aug_dot(x, v, i);
      const double dl = config.loss == LossKind::kHinge ? (m < 1.0 ? -1.0 : 0.0) : -sigmoid(-m);
      s *= 1.0 - eta * config.lambda;
      if (s <= 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        s = 1.0;
      }
      if (dl != 0.0) {
        const double step = -eta * dl * y[i] / s;
        x.axpy(step, i, vw);
        v[arity] += step;
      }
      if (s < 1e-9) {
        for (auto& e : v) e *= s;
        s = 1.0;
      }
      if (config.average) {
        for (std::size_t j = 0; j <= arity; ++j) w[j] += s * v[j];
      }
    }
    if (config.average) {
      for (auto& e : w) e /= static_cast<double>(order.size());
    } else {
      for (std::size_t j = 0; j <= arity; ++j) w[j] = s * v[j];
    }
    if (observer) observer(epoch, linear_objective(x, y, w, config.loss, config.lambda));
  }

  double b = w[arity];
  w.pop_back();
  if (scale) {
    for (std::size_t c = 0; c < x.dense_cols(); ++c) {
      const std::size_t j = x.sparse_cols() + c;
      w[j] /= standardizer.sigma()[c];
      b -= w[j] * standardizer.mean()[c];
    }
  }
  for (double e : w) {
    if (!std::isfinite(e)) throw Error(ErrorKind::kInvalidArgument, "linear training diverged");
  }
  return LinearModel(std::move(w), b, config);
}

void write_linear_model(std::ostream& out, const LinearModel& model) {
  const json header{{"magic", "CPLIN1"},
                    {"config", model.config().to_json()},
                    {"arity", model.arity()},
                    {"bias", model.bias()}};
  out << header.dump() << '\n';
  std::vector<float> w(model.weights().begin(), model.weights().end());
  append_floats(out, w);
  if (!out) throw Error(ErrorKind::kIoError, "failed writing linear model");
}

LinearModel read_linear_model(std::istream& in) {
  const json header = read_header_line(in, "CPLIN1");
  try {
    const LinearConfig config = LinearConfig::from_json(header.at("config"));
    std::vector<float> w(header.at("arity").get<std::size_t>());
    read_floats(in, w);
    return LinearModel(std::vector<double>(w.begin(), w.end()), header.at("bias").get<double>(), config);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormatError, std::string("bad linear model header: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Random forest

std::size_t ForestConfig::features_per_node(std::size_t arity) const {
  if (max_features) return std::min(max_features, arity);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(arity))));
}

void ForestConfig::validate() const {
  if (trees < 1) throw Error(ErrorKind::kConfigError, "trees must be >= 1");
  if (min_leaf < 1) throw Error(ErrorKind::kConfigError, "min_leaf must be >= 1");
}

json ForestConfig::to_json() const {
  return json{{"trees", trees},         {"max_features", max_features}, {"min_leaf", min_leaf},
              {"bootstrap", bootstrap}, {"seed", seed}};
}

ForestConfig ForestConfig::from_json(const json& j) {
  ForestConfig c;
  try {
    c.trees = j.value("trees", c.trees);
    c.max_features = j.value("max_features", c.max_features);
    c.min_leaf = j.value("min_leaf", c.min_leaf);
    c.bootstrap = j.value("bootstrap", c.bootstrap);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfigError, std::string("bad forest config: ") + e.what());
  }
  c.validate();
  return c;
}

int DecisionTree::predict(std::span<const float> row) const {
  std::size_t n = 0;
  while (!is_leaf(n)) n = row[feature[n]] <= threshold[n] ? left[n] : right[n];
  return vote[n];
}

bool DecisionTree::valid(std::size_t arity) const {
  const std::size_t n = nodes();
  if (n == 0 || feature.size() != n || threshold.size() != n || left.size() != n || right.size() != n) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (is_leaf(i)) {
      if (vote[i] != 1 && vote[i] != -1) return false;
    } else if (feature[i] >= arity || left[i] >= n || right[i] >= n || right[i] == 0) {
      return false;
    }
  }
  return true;
}

namespace {

double gini(std::size_t pos, std::size_t n) {
  if (n == 0) return 0.0;
  const double p = static_cast<double>(pos) / static_cast<double>(n);
  return 2.0 * p * (1.0 - p);
}

double weighted_gini(std::size_t lpos, std::size_t ln, std::size_t rpos, std::size_t rn) {
  const double n = static_cast<double>(ln + rn);
  return (static_cast<double>(ln) * gini(lpos, ln) + static_cast<double>(rn) * gini(rpos, rn)) / n;
}

/// Scans one feature over the node rows; improves `best` only on a strictly
/// lower impurity. Returns false when the feature is constant on the node.
bool scan_feature(std::span<const std::vector<float>> rows, std::span<const int> y,
                  std::span<const std::size_t> node, std::uint32_t f, std::size_t min_leaf,
                  std::vector<std::pair<float, int>>& buf, SplitChoice& best) {
  buf.clear();
  float lo = std::numeric_limits<float>::infinity(), hi = -lo;
  std::size_t total_pos = 0;
  for (std::size_t i : node) {
    const float v = rows[i][f];
    buf.emplace_back(v, y[i]);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    total_pos += y[i] == 1;
  }
  if (!(lo < hi)) return false;
  std::sort(buf.begin(), buf.end());
  const std::size_t n = buf.size();
  std::size_t lpos = 0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    lpos += buf[k].second == 1;
    if (buf[k].first == buf[k + 1].first) continue;
    const std::size_t ln = k + 1;
    if (ln < min_leaf || n - ln < min_leaf) continue;
    const double imp = weighted_gini(lpos, ln, total_pos - lpos, n - ln);
    if (!best.found || imp < best.impurity) {
      best.found = true;
      best.feature = f;
      best.threshold = (static_cast<double>(buf[k].first) + static_cast<double>(buf[k + 1].first)) / 2.0;
      best.impurity = imp;
    }
  }
  return true;
}

}  // namespace

SplitChoice best_gini_split(std::span<const std::vector<float>> rows, std::span<const int> y,
                            std::span<const std::uint32_t> features, std::size_t min_leaf) {
  std::vector<std::size_t> node(rows.size());
  std::iota(node.begin(), node.end(), std::size_t{0});
  std::vector<std::pair<float, int>> buf;
  SplitChoice best;
  for (std::uint32_t f : features) scan_feature(rows, y, node, f, min_leaf, buf, best);
  return best;
}

double split_impurity(std::span<const std::vector<float>> rows, std::span<const int> y, std::uint32_t feature,
                      double threshold) {
  std::size_t lpos = 0, ln = 0, rpos = 0, rn = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i][feature] <= threshold) {
      ++ln;
      lpos += y[i] == 1;
    } else {
      ++rn;
      rpos += y[i] == 1;
    }
  }
  return weighted_gini(lpos, ln, rpos, rn);
}

std::vector<std::size_t> bootstrap_sample(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = static_cast<std::size_t>(rng.below(n));
  return out;
}

DecisionTree grow_tree(std::span<const std::vector<float>> rows, std::span<const int> y,
                       std::span<const std::size_t> sample, std::size_t max_features, std::size_t min_leaf,
                       std::uint64_t seed) {
  const std::size_t arity = rows.empty() ? 0 : rows[0].size();
  Rng rng(seed);
  std::vector<std::uint32_t> feats(arity);
  std::iota(feats.begin(), feats.end(), std::uint32_t{0});
  std::vector<std::pair<float, int>> buf;

  DecisionTree tree;
  auto new_node = [&tree] {
    tree.feature.push_back(0);
    tree.threshold.push_back(0.0);
    tree.left.push_back(0);
    tree.right.push_back(0);
    tree.vote.push_back(-1);
    return static_cast<std::uint32_t>(tree.vote.size() - 1);
  };
  struct Pending {
    std::uint32_t node;
    std::vector<std::size_t> rows;
  };
  std::vector<Pending> stack;
  stack.push_back({new_node(), std::vector<std::size_t>(sample.begin(), sample.end())});
  while (!stack.empty()) {
    Pending p = std::move(stack.back());
    stack.pop_back();
    std::size_t pos = 0;
    for (std::size_t i : p.rows) pos += y[i] == 1;
    tree.vote[p.node] = 2 * pos > p.rows.size() ? 1 : -1;
    if (pos == 0 || pos == p.rows.size() || p.rows.size() < 2 * min_leaf) continue;

    SplitChoice best;
    std::size_t usable = 0;
    for (std::size_t j = 0; j < arity && usable < max_features; ++j) {
      std::swap(feats[j], feats[j + static_cast<std::size_t>(rng.below(arity - j))]);
      usable += scan_feature(rows, y, p.rows, feats[j], min_leaf, buf, best);
    }
    if (!best.found) continue;

    std::vector<std::size_t> l, r;
    for (std::size_t i : p.rows) (rows[i][best.feature] <= best.threshold ? l : r).push_back(i);
    const std::uint32_t ln = new_node();
    const std::uint32_t rn = new_node();
    tree.feature[p.node] = best.feature;
    tree.threshold[p.node] = best.threshold;
    tree.left[p.node] = ln;
    tree.right[p.node] = rn;
    stack.push_back({rn, std::move(r)});
    stack.push_back({ln, std::move(l)});
  }
  return tree;
}

double ForestModel::score_dense(std::span<const float> row) const {
  if (trees_.empty()) return 0.0;
  std::size_t pos = 0;
  for (const auto& t : trees_) pos += t.predict(row) == 1;
  return static_cast<double>(pos) / static_cast<double>(trees_.size());
}

double ForestModel::score(const FeatureMatrix& x, std::size_t row) const {
  if (x.arity() != arity_) {
    throw Error(ErrorKind::kRowMismatch, "model arity " + std::to_string(arity_) + " but features have " +
                                             std::to_string(x.arity()));
  }
  return score_dense(x.densify(row));
}

ForestModel train_random_forest(const FeatureMatrix& x, std::span<const int> y, const ForestConfig& config) {
  config.validate();
  check_labels(x, y);
  std::vector<std::vector<float>> rows(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) rows[r] = x.densify(r);
  const std::size_t n = rows.size();
  const std::size_t mtry = config.features_per_node(x.arity());

  std::vector<DecisionTree> trees;
  std::vector<std::size_t> oob_pos(n, 0), oob_total(n, 0);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (std::size_t t = 0; t < config.trees; ++t) {
    const std::uint64_t tree_seed = config.seed + t;
    const std::vector<std::size_t> sample = config.bootstrap ? bootstrap_sample(n, tree_seed) : all;
    trees.push_back(grow_tree(rows, y, sample, mtry, config.min_leaf, Rng::mix(tree_seed)));
    if (config.bootstrap) {
      std::vector<bool> in_bag(n, false);
      for (std::size_t i : sample) in_bag[i] = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (in_bag[i]) continue;
        ++oob_total[i];
        oob_pos[i] += trees.back().predict(rows[i]) == 1;
      }
    }
  }
  std::size_t seen = 0, wrong = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!oob_total[i]) continue;
    ++seen;
    const int pred = 2 * oob_pos[i] > oob_total[i] ? 1 : -1;
    wrong += pred != y[i];
  }
  ForestModel model(std::move(trees), x.arity(), config);
  model.set_oob_error(seen ? static_cast<double>(wrong) / static_cast<double>(seen)
                           : std::numeric_limits<double>::quiet_NaN());
  return model;
}

void write_forest_model(std::ostream& out, const ForestModel& model) {
  json trees = json::array();
  for (const auto& t : model.trees()) {
    trees.push_back(json{{"feature", t.feature},
                         {"threshold", t.threshold},
                         {"left", t.left},
                         {"right", t.right},
                         {"vote", t.vote}});
  }
  const double oob = model.oob_error();
  const json doc{{"magic", "CPRF1"},
                 {"config", model.config().to_json()},
                 {"arity", model.arity()},
                 {"oob_error", std::isfinite(oob) ? json(oob) : json(nullptr)},
                 {"trees", std::move(trees)}};
  out << doc.dump() << '\n';
  if (!out) throw Error(ErrorKind::kIoError, "failed writing forest model");
}

ForestModel read_forest_model(std::istream& in) {
  const json doc = read_header_line(in, "CPRF1");
  try {
    const ForestConfig config = ForestConfig::from_json(doc.at("config"));
    const std::size_t arity = doc.at("arity").get<std::size_t>();
    std::vector<DecisionTree> trees;
    for (const auto& t : doc.at("trees")) {
      DecisionTree tree;
      t.at("feature").get_to(tree.feature);
      t.at("threshold").get_to(tree.threshold);
      t.at("left").get_to(tree.left);
      t.at("right").get_to(tree.right);
      t.at("vote").get_to(tree.vote);
      if (!tree.valid(arity)) throw Error(ErrorKind::kFormatError, "forest holds a malformed tree");
      trees.push_back(std::move(tree));
    }
    ForestModel model(std::move(trees), arity, config);
    const json& oob = doc.at("oob_error");
    model.set_oob_error(oob.is_null() ? std::numeric_limits<double>::quiet_NaN() : oob.get<double>());
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormatError, std::string("bad forest model: ") + e.what());
  }
}

std::unique_ptr<Classifier> read_classifier(std::istream& in) {
  std::string first;
  const auto start = in.tellg();
  std::getline(in, first);
  in.clear();
  in.seekg(start);
  if (first.find("\"CPLIN1\"") != std::string::npos) return std::make_unique<LinearModel>(read_linear_model(in));
  if (first.find("\"CPRF1\"") != std::string::npos) return std::make_unique<ForestModel>(read_forest_model(in));
  throw Error(ErrorKind::kFormatError, "not a classifier model file");
}

void write_classifier(std::ostream& out, const Classifier& model) {
  if (const auto* lin = dynamic_cast<const LinearModel*>(&model)) return write_linear_model(out, *lin);
  if (const auto* rf = dynamic_cast<const ForestModel*>(&model)) return write_forest_model(out, *rf);
  throw Error(ErrorKind::kInvalidArgument, "unknown classifier type");
}

// ---------------------------------------------------------------------------
// Evaluation

ConfusionCounts ConfusionCounts::tally(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw Error(ErrorKind::kRowMismatch, "prediction and label counts differ");
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = predicted[i] == 1, t = truth[i] == 1;
    if (p && t) {
      ++c.tp;
    } else if (p) {
      ++c.fp;
    } else if (t) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

Metrics metrics(const ConfusionCounts& c) {
  Metrics m;
  const auto ratio = [&m](double num, double den) {
    if (den == 0.0) {
      m.degenerate = true;
      return 0.0;
    }
    return num / den;
  };
  m.precision = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
  m.recall = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
  m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
  return m;
}

double trapezoid_area(std::span<const RocPoint> points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
  }
  return area;
}

RocResult roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error(ErrorKind::kRowMismatch, "score and label counts differ");
  std::size_t p = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw Error(ErrorKind::kInvalidArgument, "NaN score");
    p += labels[i] == 1;
  }
  const std::size_t n = scores.size() - p;
  RocResult res;
  if (p == 0 || n == 0) {
    res.points = {{0.0, 0.0}, {1.0, 1.0}};
    res.auc = 0.5;
    res.degenerate = true;
    return res;
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  res.points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] == 1 ? tp : fp) += 1;
    res.points.push_back({static_cast<double>(fp) / static_cast<double>(n), static_cast<double>(tp) / static_cast<double>(p)});
  }
  res.auc = trapezoid_area(res.points);
  return res;
}

json EvalReport::to_json() const {
  json pts = json::array();
  for (const auto& pt : roc.points) pts.push_back({pt.fpr, pt.tpr});
  return json{{"counts", {{"tp", counts.tp}, {"fp", counts.fp}, {"fn", counts.fn}, {"tn", counts.tn}}},
              {"precision", metrics.precision},
              {"recall", metrics.recall},
              {"f1", metrics.f1},
              {"degenerate", metrics.degenerate},
              {"auc", roc.auc},
              {"roc_degenerate", roc.degenerate},
              {"roc", std::move(pts)}};
}

EvalReport evaluate_scores(std::span<const double> scores, std::span<const int> labels, double threshold) {
  std::vector<int> predicted(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) predicted[i] = scores[i] > threshold ? 1 : -1;
  EvalReport r;
  r.counts = ConfusionCounts::tally(predicted, labels);
  r.metrics = metrics(r.counts);
  r.roc = roc_auc(scores, labels);
  return r;
}

EvalReport evaluate(const Classifier& model, const FeatureMatrix& x, std::span<const int> labels) {
  std::vector<double> scores(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) scores[i] = model.score(x, i);
  return evaluate_scores(scores, labels, model.threshold());
}

MeanReport MeanReport::of(std::span<const EvalReport> reports) {
  MeanReport m;
  m.units = reports.size();
  if (reports.empty()) return m;
  for (const auto& r : reports) {
    m.precision += r.metrics.precision;
    m.recall += r.metrics.recall;
    m.f1 += r.metrics.f1;
    m.auc += r.roc.auc;
  }
  const double k = static_cast<double>(reports.size());
  m.precision /= k;
  m.recall /= k;
  m.f1 /= k;
  m.auc /= k;
  return m;
}

json MeanReport::to_json() const {
  return json{{"precision", precision}, {"recall", recall}, {"f1", f1}, {"auc", auc}, {"units", units}};
}

std::vector<std::vector<std::size_t>> kfold_indices(std::span<const int> labels, std::size_t k, bool stratified,
                                                    std::uint64_t seed) {
  if (k < 2) throw Error(ErrorKind::kInvalidArgument, "k must be >= 2");
  if (labels.size() < k) {
    throw Error(ErrorKind::kTooFewExamples,
                std::to_string(labels.size()) + " examples cannot fill " + std::to_string(k) + " folds");
  }
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> groups;
  if (stratified) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
    groups = {std::move(pos), std::move(neg)};
  } else {
    groups.emplace_back(labels.size());
    std::iota(groups[0].begin(), groups[0].end(), std::size_t{0});
  }
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t next = 0;
  for (auto& g : groups) {
    rng.shuffle(g);
    for (std::size_t i : g) {
      folds[next].push_back(i);
      next = (next + 1) % k;
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

json CvResult::to_json() const {
  json f = json::array();
  for (const auto& r : folds) f.push_back(r.to_json());
  return json{{"folds", std::move(f)}, {"mean", mean.to_json()}};
}

namespace {

std::vector<int> pick(std::span<const int> y, std::span<const std::size_t> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(y[r]);
  return out;
}

}  // namespace

CvResult k_fold_cv(const FeatureMatrix& x, std::span<const int> y, std::size_t k, bool stratified,
                   std::uint64_t seed, const Trainer& trainer) {
  if (x.rows() != y.size()) throw Error(ErrorKind::kRowMismatch, "feature rows and labels differ in count");
  const auto folds = kfold_indices(y, k, stratified, seed);
  CvResult res;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::size_t> train;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(train.begin(), train.end());
    const auto model = trainer(x.select(train), pick(y, train), seed + f);
    res.folds.push_back(evaluate(*model, x.select(folds[f]), pick(y, folds[f])));
  }
  res.mean = MeanReport::of(res.folds);
  return res;
}

std::vector<LogoFold> logo_split_plan(std::span<const GroupedExample> examples, std::span<const std::string> modes,
                                      std::size_t test_negatives, std::uint64_t seed) {
  const std::set<std::string> known(modes.begin(), modes.end());
  std::vector<std::size_t> negatives;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& e = examples[i];
    if (e.label != 1 && e.label != -1) throw Error(ErrorKind::kInvalidArgument, "labels must be +1 or -1");
    for (const auto& m : e.modes) {
      if (!known.count(m)) throw Error(ErrorKind::kUnknownMode, "mode '" + m + "' is not in the configured set");
    }
    if (e.label == -1) negatives.push_back(i);
  }
  if (negatives.size() < test_negatives) {
    throw Error(ErrorKind::kInvalidArgument, "asked for " + std::to_string(test_negatives) + " test negatives but only " +
                                                 std::to_string(negatives.size()) + " negatives exist");
  }
  Rng rng(seed);
  rng.shuffle(negatives);
  std::vector<bool> held(examples.size(), false);
  for (std::size_t i = 0; i < test_negatives; ++i) held[negatives[i]] = true;

  std::vector<LogoFold> folds;
  for (const auto& mode : modes) {
    LogoFold f;
    f.hidden_mode = mode;
    for (std::size_t i = 0; i < examples.size(); ++i) {
      const auto& e = examples[i];
      if (e.label == 1) {
        if (std::find(e.modes.begin(), e.modes.end(), mode) != e.modes.end()) {
          f.test.push_back(i);
          ++f.test_positives;
        } else {
          f.train.push_back(i);
          ++f.train_positives;
        }
      } else if (held[i]) {
        f.test.push_back(i);
        ++f.test_negatives;
      } else {
        f.train.push_back(i);
        ++f.train_negatives;
      }
    }
    if (f.test_positives == 0) throw Error(ErrorKind::kEmptyGroup, "no positives mention mode '" + mode + "'");
    if (f.train_positives == 0) {
      throw Error(ErrorKind::kEmptyGroup, "hiding mode '" + mode + "' leaves no training positives");
    }
    folds.push_back(std::move(f));
  }
  return folds;
}

json LogoResult::to_json() const {
  json per = json::array();
  for (std::size_t i = 0; i < folds.size(); ++i) {
    json r = reports[i].to_json();
    r["hidden_mode"] = folds[i].hidden_mode;
    r["train_positives"] = folds[i].train_positives;
    r["train_negatives"] = folds[i].train_negatives;
    r["test_positives"] = folds[i].test_positives;
    r["test_negatives"] = folds[i].test_negatives;
    per.push_back(std::move(r));
  }
  return json{{"folds", std::move(per)}, {"mean", mean.to_json()}};
}

LogoResult leave_one_group_out(const FeatureMatrix& x, std::span<const GroupedExample> examples,
                               std::span<const std::string> modes, std::size_t test_negatives, std::uint64_t seed,
                               const Trainer& trainer) {
  if (x.rows() != examples.size()) throw Error(ErrorKind::kRowMismatch, "feature rows and examples differ in count");
  LogoResult res;
  res.folds = logo_split_plan(examples, modes, test_negatives, seed);
  std::vector<int> y(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) y[i] = examples[i].label;
  for (std::size_t i = 0; i < res.folds.size(); ++i) {
    const auto& f = res.folds[i];
    const auto model = trainer(x.select(f.train), pick(y, f.train), seed + i);
    res.reports.push_back(evaluate(*model, x.select(f.test), pick(y, f.test)));
  }
  res.mean = MeanReport::of(res.reports);
  return res;
}

std::string eval_csv_row(std::string_view model, std::string_view features, double precision, double recall,
                         double f1, double auc) {
  return csv_row({csv_field(model), csv_field(features), format_fixed(precision, 5), format_fixed(recall, 5),
                  format_fixed(f1, 5), format_fixed(auc, 5)});
}

// ---------------------------------------------------------------------------
// Candidate search

TravelTermTable TravelTermTable::parse(std::string_view tsv) {
  TravelTermTable t;
  std::istringstream in{std::string(tsv)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (std::size_t tab; (tab = line.find('\t', start)) != std::string::npos; start = tab + 1) {
      cols.push_back(line.substr(start, tab - start));
    }
    cols.push_back(line.substr(start));
    if (cols.size() != 3 || cols[0].empty() || cols[1].empty() || cols[2].empty()) {
      throw Error(ErrorKind::kFormatError, "travel term line " + std::to_string(lineno) + " needs lang, mode, term");
    }
    t.add(cols[0], cols[1], cols[2]);
  }
  return t;
}

const TravelTermTable& TravelTermTable::bundled() {
  static const TravelTermTable table = parse(bundled_data("travel_terms.tsv"));
  return table;
}

void TravelTermTable::add(const std::string& lang, const std::string& mode, const std::string& term) {
  auto& terms = entries_[lang][mode];
  const std::string lower = utf8::to_lower(term);
  if (std::find(terms.begin(), terms.end(), lower) == terms.end()) terms.push_back(lower);
}

std::vector<std::string> TravelTermTable::modes_of(std::string_view lang, const std::string& token) const {
  std::vector<std::string> out;
  const auto it = entries_.find(std::string(lang));
  if (it == entries_.end()) return out;
  for (const auto& [mode, terms] : it->second) {
    if (std::find(terms.begin(), terms.end(), token) != terms.end()) out.push_back(mode);
  }
  return out;
}

std::vector<std::string> TravelTermTable::modes(std::string_view lang) const {
  std::vector<std::string> out;
  const auto it = entries_.find(std::string(lang));
  if (it != entries_.end()) {
    for (const auto& [mode, terms] : it->second) out.push_back(mode);
  }
  return out;
}

std::vector<std::string> match_travel_terms(std::string_view text, std::string_view lang,
                                            const TravelTermTable& table) {
  std::set<std::string> found;
  for (const auto& tok : lowercase(tokenize(text))) {
    for (auto& m : table.modes_of(lang, tok.surface)) found.insert(std::move(m));
  }
  return {found.begin(), found.end()};
}

std::vector<TermMatch> travel_term_search(std::span<const TweetRecord> records, const TravelTermTable& table) {
  std::vector<TermMatch> out;
  for (const auto& r : records) {
    auto modes = match_travel_terms(r.text, r.lang, table);
    if (!modes.empty()) out.push_back({r.id, std::move(modes)});
  }
  return out;
}

}  // namespace citypulse
