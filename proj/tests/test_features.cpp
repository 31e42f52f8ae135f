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

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "citypulse/error.hpp"
#include "citypulse/features.hpp"
#include "citypulse/rng.hpp"
#include "doctest.h"

using namespace citypulse;

namespace {

std::vector<TokenDoc> split_docs(std::initializer_list<const char*> texts) {
  std::vector<TokenDoc> out;
  for (const char* t : texts) {
    std::istringstream in(t);
    TokenDoc d;
    std::string w;
    while (in >> w) d.push_back(w);
    out.push_back(d);
  }
  return out;
}

ErrorKind error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kIoError;
}

// Two interchangeable words "x" and "y" used in the same contexts, and two
// more "z" and "w" living in a disjoint context set.
std::vector<TokenDoc> two_cluster_corpus(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  const std::vector<std::string> ctx_a = {"a1", "a2", "a3", "a4"};
  const std::vector<std::string> ctx_b = {"b1", "b2", "b3", "b4"};
  std::vector<TokenDoc> docs;
  for (std::size_t i = 0; i < n; ++i) {
    const bool first = rng.bernoulli(0.5);
    const auto& ctx = first ? ctx_a : ctx_b;
    const std::string centre = first ? (rng.bernoulli(0.5) ? "x" : "y") : (rng.bernoulli(0.5) ? "z" : "w");
    TokenDoc d;
    for (int k = 0; k < 2; ++k) d.push_back(ctx[rng.below(ctx.size())]);
    d.push_back(centre);
    for (int k = 0; k < 2; ++k) d.push_back(ctx[rng.below(ctx.size())]);
    docs.push_back(std::move(d));
  }
  return docs;
}

SkipgramConfig small_config() {
  SkipgramConfig c;
  c.dim = 16;
  c.epochs = 10;
  c.seed = 7;
  return c;
}

}  // namespace

TEST_CASE("vocabulary thresholds") {
  const auto docs = split_docs({"a b", "b c", "b"});
  const Vocabulary v = build_vocabulary(docs, {1, 0.6, 10});
  CHECK(v.terms() == std::vector<std::string>{"a", "c"});
  CHECK(v.stats().above_max_df == 1);
  CHECK(v.find("b") == std::nullopt);

  const Vocabulary none = build_vocabulary(docs, {2, 0.6, 10});
  CHECK(none.empty());
  CHECK(none.stats().empty);

  CHECK(error_of([] { build_vocabulary(std::vector<TokenDoc>{}, {}); }) == ErrorKind::kEmptyCorpus);
  CHECK(error_of([&] { build_vocabulary(docs, {1, 0.0, 10}); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("vocabulary truncation keeps the most frequent terms") {
  Rng rng(3);
  std::vector<TokenDoc> docs;
  for (int d = 0; d < 400; ++d) {
    TokenDoc doc;
    for (int k = 0; k < 12; ++k) {
      // Zipf-like: rank r drawn with weight 1/r over 500 ranks.
      std::vector<double> w(500);
      for (std::size_t r = 0; r < w.size(); ++r) w[r] = 1.0 / static_cast<double>(r + 1);
      doc.push_back("t" + std::to_string(rng.categorical(w)));
    }
    docs.push_back(std::move(doc));
  }
  const Vocabulary v = build_vocabulary(docs, {1, 1.0, 100});
  REQUIRE(v.size() == 100);

  std::map<std::string, std::uint64_t> counts;
  for (const auto& d : docs) {
    for (const auto& t : d) ++counts[t];
  }
  std::vector<std::pair<std::uint64_t, std::string>> ranked;
  for (const auto& [t, c] : counts) ranked.emplace_back(c, t);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(v.term(i) == ranked[i].second);
    CHECK(v.count(i) == ranked[i].first);
  }
}

TEST_CASE("vocabulary is order-insensitive and respects its invariants") {
  Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<TokenDoc> docs;
    const auto n = 1 + rng.below(40);
    for (std::uint64_t d = 0; d < n; ++d) {
      TokenDoc doc;
      const auto len = rng.below(8);
      for (std::uint64_t k = 0; k < len; ++k) doc.push_back(std::string(1, static_cast<char>('a' + rng.below(12))));
      docs.push_back(std::move(doc));
    }
    const VocabularyParams p{1 + rng.below(3), 0.2 + 0.8 * rng.uniform(), 1 + rng.below(10)};
    const Vocabulary a = build_vocabulary(docs, p);
    rng.shuffle(docs);
    const Vocabulary b = build_vocabulary(docs, p);
    CHECK(a.terms() == b.terms());
    CHECK(a.size() <= p.max_size);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a.count(i) >= p.min_count);
      CHECK(static_cast<double>(a.doc_frequency(i)) / static_cast<double>(n) <= p.max_df_ratio);
      CHECK(a.find(a.term(i)) == static_cast<std::uint32_t>(i));
    }
    CHECK(Vocabulary::from_json(a.to_json()).terms() == a.terms());
  }
}

TEST_CASE("bow_vector") {
  const auto docs = split_docs({"a a c", "c"});
  const Vocabulary v = build_vocabulary(docs, {});
  REQUIRE(v.terms() == std::vector<std::string>{"a", "c"});
  const BowVector b = bow_vector({"a", "a", "c", "z"}, v);
  CHECK(b.entries == decltype(b.entries){{0, 2}, {1, 1}});
  CHECK(bow_vector({}, v).entries.empty());
  CHECK(bow_vector({"z", "q"}, v).entries.empty());

  Rng rng(13);
  for (int i = 0; i < 200; ++i) {
    TokenDoc d;
    const auto len = rng.below(10);
    std::uint64_t in_vocab = 0;
    for (std::uint64_t k = 0; k < len; ++k) {
      d.push_back(std::string(1, "acz"[rng.below(3)]));
      in_vocab += d.back() != "z";
    }
    const BowVector bv = bow_vector(d, v);
    CHECK(bv.total() == in_vocab);
    for (std::size_t k = 1; k < bv.entries.size(); ++k) CHECK(bv.entries[k - 1].first < bv.entries[k].first);
  }
}

TEST_CASE("cosine examples") {
  const std::vector<float> x{1, 0}, y{0, 1}, p{1, 1}, m{-1, -1}, zero{0, 0};
  CHECK(cosine(x, x) == doctest::Approx(1.0));
  CHECK(cosine(x, y) == doctest::Approx(0.0));
  CHECK(cosine(p, m) == doctest::Approx(-1.0));
  CHECK(cosine(x, zero) == 0.0);
}

TEST_CASE("negative-sampling gradient matches central differences") {
  Rng rng(17);
  const std::size_t V = 5, dim = 3;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(dim), u(V * dim);
    for (auto& x : v) x = rng.uniform(-1, 1);
    for (auto& x : u) x = rng.uniform(-1, 1);
    std::vector<std::uint32_t> order{0, 1, 2, 3, 4};
    rng.shuffle(order);
    const std::vector<std::uint32_t> targets(order.begin(), order.begin() + 4);

    // The step moves parameters by -lr * gradient; lr = 1 reads it off.
    std::vector<double> v2 = v, u2 = u, scratch(dim);
    sgns_pair_step<double>(v2, u2, targets, 1.0, scratch);

    auto loss = [&](const std::vector<double>& vv, const std::vector<double>& uu) {
      return sgns_pair_loss<double>(vv, uu, targets);
    };
    auto check = [&](double analytic, double numeric) {
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      CHECK(std::abs(analytic - numeric) / denom < 1e-5);
    };
    const double h = 1e-5;
    for (std::size_t d = 0; d < dim; ++d) {
      auto a = v, b = v;
      a[d] += h;
      b[d] -= h;
      check(v[d] - v2[d], (loss(a, u) - loss(b, u)) / (2 * h));
    }
    for (std::size_t k = 0; k < u.size(); ++k) {
      auto a = u, b = u;
      a[k] += h;
      b[k] -= h;
      check(u[k] - u2[k], (loss(v, a) - loss(v, b)) / (2 * h));
    }
  }
}

TEST_CASE("skip-gram separates words by context") {
  const auto docs = two_cluster_corpus(1, 600);
  const Vocabulary vocab = build_vocabulary(docs, {});
  const EmbeddingModel m = train_skipgram(docs, vocab, small_config());
  CHECK(m.all_finite());
  const double xy = cosine(m.vector("x"), m.vector("y"));
  for (const char* other : {"z", "w", "b1", "b2", "b3", "b4"}) {
    INFO(other);
    CHECK(xy > cosine(m.vector("x"), m.vector(other)));
  }
}

TEST_CASE("skip-gram errors and determinism") {
  const auto one = split_docs({"a a a"});
  CHECK(error_of([&] { train_skipgram(one, build_vocabulary(one, {}), small_config()); }) ==
        ErrorKind::kDegenerateVocabulary);
  const auto docs = split_docs({"a b", "b c"});
  const Vocabulary vocab = build_vocabulary(docs, {});
  const auto oov = split_docs({"q r"});
  CHECK(error_of([&] { train_skipgram(oov, vocab, small_config()); }) == ErrorKind::kEmptyCorpus);
  SkipgramConfig bad = small_config();
  bad.window = 0;
  CHECK(error_of([&] { train_skipgram(docs, vocab, bad); }) == ErrorKind::kConfigError);

  const auto corpus = two_cluster_corpus(2, 200);
  const Vocabulary v = build_vocabulary(corpus, {});
  const EmbeddingModel a = train_skipgram(corpus, v, small_config());
  const EmbeddingModel b = train_skipgram(corpus, v, small_config(), [](std::size_t, double) {});
  CHECK(a.input_table() == b.input_table());
  CHECK(a.output_table() == b.output_table());
}

TEST_CASE("skip-gram evaluation loss does not rise across epochs") {
  const auto docs = two_cluster_corpus(4, 800);
  const Vocabulary vocab = build_vocabulary(docs, {});
  std::vector<double> losses;
  train_skipgram(docs, vocab, small_config(), [&](std::size_t, double l) { losses.push_back(l); });
  REQUIRE(losses.size() == 10);
  for (std::size_t i = 1; i < losses.size(); ++i) CHECK(losses[i] <= losses[i - 1] * 1.05);
  CHECK(losses.back() < losses.front());
}

TEST_CASE("PV-DBOW document vectors") {
  auto docs = two_cluster_corpus(5, 300);
  docs.push_back({"a1", "a2", "x", "a3"});
  docs.push_back({"a1", "a2", "x", "a3"});
  docs.push_back({"b1", "b2", "z", "b3"});
  const Vocabulary vocab = build_vocabulary(docs, {});
  SkipgramConfig cfg = small_config();
  cfg.epochs = 20;
  const PvDbowResult r = train_pvdbow(docs, vocab, cfg);
  REQUIRE(r.docs.size() == docs.size());
  const auto& same1 = r.docs[300].values;
  const auto& same2 = r.docs[301].values;
  const auto& other = r.docs[302].values;
  CHECK(cosine(same1, same2) >= cosine(same1, other));
  CHECK(cosine(same1, same2) >= cosine(same2, other));
  CHECK(r.docs[0].doc_id == "0");

  const PvDbowResult again = train_pvdbow(docs, vocab, cfg);
  CHECK(again.docs[7].values == r.docs[7].values);
  CHECK(again.model.input_table() == r.model.input_table());

  const auto single = split_docs({"a b c"});
  const PvDbowResult s = train_pvdbow(single, build_vocabulary(single, {}), cfg);
  REQUIRE(s.docs.size() == 1);
  for (float x : s.docs[0].values) CHECK(std::isfinite(x));
}

TEST_CASE("inferred vectors track trained ones") {
  const auto docs = two_cluster_corpus(6, 300);
  const Vocabulary vocab = build_vocabulary(docs, {});
  SkipgramConfig cfg = small_config();
  cfg.epochs = 20;
  const PvDbowResult r = train_pvdbow(docs, vocab, cfg);
  double total = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    const DocEmbedding inferred = infer_doc_vector(r.model, docs[i], 50, i);
    total += cosine(inferred.values, r.docs[i].values);
  }
  CHECK(total / 50 > 0.5);

  const DocEmbedding a = infer_doc_vector(r.model, docs[3], 20, 11);
  const DocEmbedding b = infer_doc_vector(r.model, docs[3], 20, 11);
  CHECK(a.values == b.values);
  const DocEmbedding empty = infer_doc_vector(r.model, {}, 20, 1);
  CHECK(std::all_of(empty.values.begin(), empty.values.end(), [](float x) { return x == 0.0f; }));
  CHECK(empty.values.size() == cfg.dim);
}

TEST_CASE("concat_features") {
  FeatureMatrix bow(3, 0);
  bow.add_row("r0", {{0, 1.0f}});
  bow.add_row("r1", {{1, 2.0f}, {2, 1.0f}});
  FeatureMatrix boe(0, 2);
  boe.add_row("r0", {}, {1.0f, 5.0f});
  boe.add_row("r1", {}, {3.0f, 5.0f});
  const auto [m, s] = concat_features(bow, boe);
  CHECK(m.arity() == 5);
  CHECK(m.densify(0) == std::vector<float>{1, 0, 0, -1, 0});
  CHECK(m.densify(1) == std::vector<float>{0, 2, 1, 1, 0});
  CHECK(s.sigma()[1] == 1.0);

  FeatureMatrix swapped(0, 2);
  swapped.add_row("r1", {}, {1.0f, 5.0f});
  swapped.add_row("r0", {}, {3.0f, 5.0f});
  CHECK(error_of([&] { concat_features(bow, swapped); }) == ErrorKind::kRowMismatch);
  FeatureMatrix short_boe(0, 2);
  short_boe.add_row("r0", {}, {1.0f, 5.0f});
  CHECK(error_of([&] { concat_features(bow, short_boe); }) == ErrorKind::kRowMismatch);
  CHECK(error_of([&] { bow.add_row("r0", {}); }) == ErrorKind::kRowMismatch);
  CHECK(error_of([&] { bow.add_row("r9", {{3, 1.0f}}); }) == ErrorKind::kRowMismatch);
  CHECK(Standardizer::from_json(s.to_json()).mean() == s.mean());
}

TEST_CASE("embedding container round trip") {
  const auto docs = two_cluster_corpus(8, 50);
  const Vocabulary vocab = build_vocabulary(docs, {});
  const PvDbowResult r = train_pvdbow(docs, vocab, small_config());
  std::stringstream buf;
  write_embedding_model(buf, r.model, r.docs);
  const LoadedEmbedding back = read_embedding_model(buf);
  CHECK(back.model.input_table() == r.model.input_table());
  CHECK(back.model.output_table() == r.model.output_table());
  CHECK(back.model.config() == r.model.config());
  CHECK(back.model.vocabulary().terms() == vocab.terms());
  REQUIRE(back.docs.size() == r.docs.size());
  CHECK(back.docs[4].values == r.docs[4].values);

  std::stringstream bad("{\"magic\":\"NOPE\"}\n");
  CHECK(error_of([&] { read_embedding_model(bad); }) == ErrorKind::kFormatError);
  std::string truncated = buf.str().substr(0, buf.str().size() / 2);
  std::stringstream cut(truncated);
  CHECK(error_of([&] { read_embedding_model(cut); }) == ErrorKind::kFormatError);
}
