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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any
// fails. Tolerances and time budgets are pinned below.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "citypulse/aggregate.hpp"
#include "citypulse/classify.hpp"
#include "citypulse/cli.hpp"
#include "citypulse/config.hpp"
#include "citypulse/features.hpp"
#include "citypulse/geo.hpp"
#include "citypulse/rng.hpp"
#include "citypulse/store.hpp"
#include "citypulse/synth.hpp"
#include "citypulse/textprep.hpp"
#include "citypulse/topics.hpp"
#include "golden.hpp"
#include "oracles.hpp"

using namespace citypulse;
namespace fs = std::filesystem;

namespace {

constexpr double kAucTolerance = 1e-9;
// Published figures carry four decimals.
constexpr double kPublishedRounding = 1e-4;
constexpr double kBreakdownTolerance = 0.01;
constexpr double kTopicOverlapFloor = 0.7;
constexpr double kGradientTolerance = 1e-5;
constexpr double kRandomPairQuantile = 0.95;
constexpr double kLogoGapFloor = 0.15;
constexpr std::size_t kGoldenFloor = 60;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

TokenDoc split_words(const std::string& text) {
  TokenDoc d;
  std::istringstream in(text);
  std::string w;
  while (in >> w) d.push_back(w);
  return d;
}

std::vector<TokenDoc> preprocess_all(const std::vector<TweetRecord>& records, const std::string& preset) {
  const PipelineConfig cfg = PipelineConfig::preset(preset, "pt");
  std::vector<TokenDoc> docs;
  docs.reserve(records.size());
  for (const auto& r : records) docs.push_back(run_pipeline(r.text, cfg).tokens);
  return docs;
}

// 1 -------------------------------------------------------------------------

double pair_statistic(const std::vector<double>& s, const std::vector<int>& y) {
  double hits = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != -1) continue;
      pairs += 1;
      hits += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
    }
  }
  return hits / pairs;
}

Outcome metric_oracle() {
  Outcome o;
  Rng rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 2 + rng.below(199);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.bernoulli(0.4) ? 1 : -1;
      s[i] = trial % 3 == 0 ? static_cast<double>(rng.below(5)) : rng.normal() + (y[i] == 1 ? 0.7 : 0.0);
    }
    y[0] = 1;
    y[1] = -1;
    const RocResult r = roc_auc(s, y);
    const double truth = pair_statistic(s, y);
    worst = std::max({worst, std::abs(r.auc - truth), std::abs(trapezoid_area(r.points) - truth)});
  }
  o.require(worst <= kAucTolerance, "AUC off by " + std::to_string(worst));
  o.note("max AUC error " + fmt(worst * 1e9, 3) + "e-9");

  Rng crng(7);
  for (int trial = 0; trial < 500; ++trial) {
    ConfusionCounts c{crng.below(50) + 1, crng.below(50), crng.below(50), crng.below(50)};
    const Metrics m = metrics(c);
    const double p = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    const double r = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (m.precision != p || m.recall != r || m.f1 != 2 * p * r / (p + r)) {
      o.require(false, "P/R/F1 mismatch");
      break;
    }
  }
  const Metrics row = metrics(ConfusionCounts{7465, 0, 2535, 1000});
  o.require(row.precision == 1.0 && row.recall == 0.7465 && std::abs(row.f1 - 0.8548) < kPublishedRounding && row.f1 == 2 * row.precision * row.recall / (row.precision + row.recall),
            "spot row F1 " + fmt(row.f1));
  o.note("P=1.0 R=0.7465 -> F1 " + fmt(row.f1));
  return o;
}

// 2 -------------------------------------------------------------------------

Outcome geo_filter_oracle() {
  Outcome o;
  auto corpus = generate_topic_corpus(planted_topics(4, 10), 10000, 4, 21);
  GeoSpec spec;
  spec.inside_fraction = 0.75;
  spec.kind_mix = {0.3, 0.05, 0.65};
  generate_geo(corpus, spec, 22);
  std::map<GeoTagKind, double> kinds;
  std::size_t mismatches = 0, accepted = 0;
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    const LedgerEntry& e = corpus.ledger.entries[i];
    kinds[*e.geotag] += 1;
    for (PlaceMode mode : {PlaceMode::kContainment, PlaceMode::kCenterInside, PlaceMode::kOverlap}) {
      const bool acc = city_filter(corpus.records[i], spec.city, mode).accepted;
      mismatches += acc != *e.inside;
      accepted += acc && mode == PlaceMode::kContainment;
    }
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " filter decisions differ from the ledger");
  o.require(kinds.size() == 3, "not every geotag kind present");
  const GeotagBreakdown b = geotag_breakdown(corpus.records);
  const double n = static_cast<double>(corpus.records.size());
  const double worst = std::max({std::abs(b.precise.percentage - 100 * kinds[GeoTagKind::kPreciseCoordinate] / n),
                                 std::abs(b.degenerate.percentage - 100 * kinds[GeoTagKind::kDegeneratePlaceBox] / n),
                                 std::abs(b.variable.percentage - 100 * kinds[GeoTagKind::kVariablePlaceBox] / n)});
  o.require(worst < kBreakdownTolerance, "breakdown off by " + fmt(worst));
  o.note(std::to_string(accepted) + "/10000 accepted, max breakdown error " + fmt(worst, 6));
  return o;
}

// 3 -------------------------------------------------------------------------

Outcome lda_recovery() {
  Outcome o;
  const auto planted = planted_topics(5, 20);
  const auto corpus = generate_topic_corpus(planted, 500, 25, 11);
  std::vector<TokenDoc> docs;
  for (const auto& r : corpus.records) docs.push_back(split_words(r.text));
  const Vocabulary vocab = build_vocabulary(docs, {});
  std::vector<BowVector> bows;
  for (const auto& d : docs) bows.push_back(bow_vector(d, vocab));
  LdaConfig cfg;
  cfg.topics = 5;
  cfg.iterations = 200;
  cfg.seed = 3;
  bool consistent = true;
  std::size_t sweeps = 0;
  const LdaModel m = train_lda(bows, vocab, cfg, [&](std::size_t, const LdaModel& s) {
    consistent = consistent && s.consistent();
    ++sweeps;
  });
  const double overlap = testing::aligned_top_overlap(m, planted, 10);
  o.require(overlap >= kTopicOverlapFloor, "top-10 overlap " + fmt(overlap));
  o.require(consistent && sweeps == cfg.iterations, "count tables inconsistent");

  cfg.topics = 1;
  cfg.iterations = 5;
  const LdaModel one = train_lda(bows, vocab, cfg);
  bool all_zero = true;
  for (std::size_t d = 0; d < one.docs(); ++d) {
    for (auto z : one.assignments(d)) all_zero = all_zero && z == 0;
  }
  o.require(all_zero, "K=1 assigned a token outside topic 0");
  o.note("mean aligned top-10 overlap " + fmt(overlap, 3) + ", consistent over " + std::to_string(sweeps) + " sweeps");
  return o;
}

// 4 -------------------------------------------------------------------------

Outcome embedding_semantics() {
  Outcome o;
  const auto corpus = generate_embedding_corpus(default_modes(), default_negative_topics(), 6000, 31);
  const auto docs = preprocess_all(corpus.records, "travel");
  // word2vec's usual floor; words seen once or twice keep near-initial vectors.
  VocabularyParams vp;
  vp.min_count = 5;
  const Vocabulary vocab = build_vocabulary(docs, vp);
  SkipgramConfig cfg;
  cfg.dim = 50;
  cfg.window = 2;
  cfg.epochs = 10;
  cfg.seed = 5;
  const EmbeddingModel model = train_skipgram(docs, vocab, cfg);

  Rng rng(77);
  std::vector<double> random;
  for (int i = 0; i < 5000; ++i) {
    const std::size_t a = rng.below(vocab.size()), b = rng.below(vocab.size());
    if (a != b) random.push_back(cosine(model.input(a), model.input(b)));
  }
  std::sort(random.begin(), random.end());
  const double cut = random[static_cast<std::size_t>(kRandomPairQuantile * static_cast<double>(random.size()))];

  const PipelineConfig travel = PipelineConfig::preset("travel", "pt");
  auto norm = [&](const std::string& w) { return run_pipeline(w, travel).tokens.at(0); };
  double weakest = 1.0;
  std::string weakest_pair;
  for (const auto& mode : default_modes()) {
    const std::string core = norm(mode.core_terms[0]), syn = norm(mode.synonyms[0]);
    const auto a = model.vector(core), b = model.vector(syn);
    if (a.empty() || b.empty()) {
      o.require(false, "pair " + core + "/" + syn + " out of vocabulary");
      continue;
    }
    const double c = cosine(a, b);
    if (c < weakest) {
      weakest = c;
      weakest_pair = core + "/" + syn;
    }
  }
  o.require(weakest > cut, "synonym cosine " + fmt(weakest) + " <= random p95 " + fmt(cut));
  o.note("weakest synonym pair " + weakest_pair + " cosine " + fmt(weakest, 3) + " vs random p95 " + fmt(cut, 3));

  // Negative-sampling gradient against central differences on a 5-word model.
  Rng g(17);
  const std::size_t V = 5, dim = 3;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(dim), u(V * dim);
    for (auto& x : v) x = g.uniform(-1, 1);
    for (auto& x : u) x = g.uniform(-1, 1);
    std::vector<std::uint32_t> order{0, 1, 2, 3, 4};
    g.shuffle(order);
    const std::vector<std::uint32_t> targets(order.begin(), order.begin() + 4);
    std::vector<double> v2 = v, u2 = u, scratch(dim);
    sgns_pair_step<double>(v2, u2, targets, 1.0, scratch);
    auto loss = [&](const std::vector<double>& vv, const std::vector<double>& uu) {
      return sgns_pair_loss<double>(vv, uu, targets);
    };
    auto rel = [](double analytic, double numeric) {
      return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    };
    const double h = 1e-5;
    for (std::size_t d = 0; d < dim; ++d) {
      auto a = v, b = v;
      a[d] += h;
      b[d] -= h;
      worst = std::max(worst, rel(v[d] - v2[d], (loss(a, u) - loss(b, u)) / (2 * h)));
    }
    for (std::size_t k = 0; k < u.size(); ++k) {
      auto a = u, b = u;
      a[k] += h;
      b[k] -= h;
      worst = std::max(worst, rel(u[k] - u2[k], (loss(v, a) - loss(v, b)) / (2 * h)));
    }
  }
  o.require(worst < kGradientTolerance, "gradient relative error " + std::to_string(worst));
  o.note("max gradient relative error " + fmt(worst * 1e9, 2) + "e-9");
  return o;
}

// 5 -------------------------------------------------------------------------

struct TravelSetup {
  std::vector<std::string> ids;
  std::vector<int> labels;
  std::vector<GroupedExample> examples;
  std::vector<TokenDoc> docs;
  Vocabulary bow_vocab;
  EmbeddingModel embeddings;
};

TravelSetup travel_setup(double holdout, std::uint64_t seed) {
  const RunConfig rc = RunConfig::defaults();
  FixtureSpec spec;
  spec.classification.holdout_fraction = holdout;
  const SynthCorpus fixture = generate_fixture(spec, seed);
  const auto all_docs = preprocess_all(fixture.records, "travel");
  TravelSetup s;
  std::vector<TokenDoc> train_docs;
  for (std::size_t i = 0; i < fixture.records.size(); ++i) {
    const LedgerEntry& e = fixture.ledger.entries[i];
    if (!e.labeled()) continue;
    s.ids.push_back(e.id);
    s.labels.push_back(e.positive() ? 1 : -1);
    s.examples.push_back({e.positive() ? 1 : -1, e.modes});
    s.docs.push_back(all_docs[i]);
    if (e.split == "train") train_docs.push_back(all_docs[i]);
  }
  s.bow_vocab = build_vocabulary(train_docs, rc.vocabulary("bow"));
  SkipgramConfig sg = rc.skipgram();
  sg.seed = seed;
  s.embeddings = train_skipgram(all_docs, build_vocabulary(all_docs, rc.vocabulary("embed")), sg);
  return s;
}

FeatureMatrix features(const TravelSetup& s, bool bow, bool boe) {
  FeatureMatrix m(bow ? s.bow_vocab.size() : 0, boe ? s.embeddings.dim() : 0);
  for (std::size_t i = 0; i < s.docs.size(); ++i) {
    FeatureMatrix::SparseRow sparse;
    if (bow) {
      for (const auto& [k, c] : bow_vector(s.docs[i], s.bow_vocab).entries) sparse.emplace_back(k, static_cast<float>(c));
    }
    m.add_row(s.ids[i], std::move(sparse), boe ? mean_word_vector(s.embeddings, s.docs[i]) : std::vector<float>{});
  }
  return m;
}

Trainer svm() {
  const LinearConfig base = RunConfig::defaults().linear();
  return [base](const FeatureMatrix& x, std::span<const int> y, std::uint64_t seed) {
    LinearConfig c = base;
    c.seed = seed;
    return std::unique_ptr<Classifier>(new LinearModel(train_linear(x, y, c)));
  };
}

Outcome logo_direction() {
  Outcome o;
  std::vector<std::string> modes;
  for (const auto& m : default_modes()) modes.push_back(m.name);

  const TravelSetup held = travel_setup(0.2, 41);
  const LogoResult bow = leave_one_group_out(features(held, true, false), held.examples, modes, 300, 41, svm());
  const LogoResult boe = leave_one_group_out(features(held, false, true), held.examples, modes, 300, 41, svm());
  const double gap = boe.mean.f1 - bow.mean.f1;
  o.require(gap >= kLogoGapFloor, "LOGO F1 gap " + fmt(gap));

  const TravelSetup open = travel_setup(0.0, 43);
  const CvResult cv_bow = k_fold_cv(features(open, true, false), open.labels, 10, true, 43, svm());
  const CvResult cv_both = k_fold_cv(features(open, true, true), open.labels, 10, true, 43, svm());
  o.require(cv_both.mean.f1 >= cv_bow.mean.f1, "10-fold BoW+BoE F1 below BoW");
  o.note("LOGO mean F1 BoE " + fmt(boe.mean.f1) + " vs BoW " + fmt(bow.mean.f1) + "; 10-fold F1 BoW+BoE " +
         fmt(cv_both.mean.f1) + " vs BoW " + fmt(cv_bow.mean.f1));
  return o;
}

// 6 -------------------------------------------------------------------------

Outcome dataset_arithmetic() {
  Outcome o;
  const auto corpus = generate_classification_corpus(default_modes(), default_negative_topics(), ClassificationCounts{}, 3);
  std::vector<GroupedExample> examples;
  std::size_t positives = 0;
  for (const auto& e : corpus.ledger.entries) {
    examples.push_back({e.positive() ? 1 : -1, e.modes});
    positives += e.positive();
  }
  const std::vector<std::string> modes = {"bike", "bus", "car", "taxi", "train", "walk"};
  const auto plan = logo_split_plan(examples, modes, 300, 1);
  const auto taxi = std::find_if(plan.begin(), plan.end(), [](const LogoFold& f) { return f.hidden_mode == "taxi"; });
  o.require(positives == 1686, "positives " + std::to_string(positives));
  o.require(taxi != plan.end() && taxi->train_positives == 1372 && taxi->test_positives == 314,
            "taxi fold does not split 1372/314");
  if (taxi != plan.end()) {
    o.note("taxi fold: train positives " + std::to_string(taxi->train_positives) + ", test positives " +
           std::to_string(taxi->test_positives));
  }
  return o;
}

// 7 -------------------------------------------------------------------------

Outcome preprocessing_goldens() {
  Outcome o;
  const auto cases = testing::load_golden(CITYPULSE_FIXTURE_DIR "/preprocess_golden.tsv");
  std::size_t failed = 0;
  std::set<std::string> required;
  for (const auto& c : cases) {
    if (testing::run_golden(c) != c.expected) ++failed;
    if ((c.input == "loooool" && c.expected == "loool") || (c.input == "cars" && c.expected == "car")) {
      required.insert(c.input);
    }
  }
  o.require(cases.size() >= kGoldenFloor, std::to_string(cases.size()) + " golden cases");
  o.require(failed == 0, std::to_string(failed) + " golden cases differ");
  o.require(required.size() == 2, "golden file lacks the loooool or cars case");

  // Idempotence of every step over the golden inputs and a synth corpus.
  std::vector<std::string> texts;
  for (const auto& c : cases) texts.push_back(c.input);
  FixtureSpec spec;
  spec.counts = spec.counts.scaled(4);
  spec.embedding_docs = 1000;
  for (const auto& r : generate_fixture(spec, 9).records) texts.push_back(r.text);
  const PipelineConfig cfg = PipelineConfig::preset("topic", "pt");
  const std::vector<std::function<Tokens(Tokens)>> steps = {
      [](Tokens t) { return lowercase(std::move(t)); },
      [](Tokens t) { return squeeze_repeats(std::move(t)); },
      [](Tokens t) { return strip_punctuation(std::move(t)); },
      [](Tokens t) { return strip_entities_and_digits(std::move(t)); },
      [&](Tokens t) { return remove_stopwords_and_short(std::move(t), cfg); },
      [](Tokens t) { return lemmatize_plurals(std::move(t), PluralRules::bundled("en")); },
      [](Tokens t) { return lemmatize_plurals(std::move(t), PluralRules::bundled("pt")); },
  };
  std::size_t violations = 0;
  for (const auto& text : texts) {
    const Tokens tokens = tokenize(text);
    for (const auto& step : steps) {
      const Tokens once = step(tokens);
      violations += !(step(once) == once);
    }
  }
  o.require(violations == 0, std::to_string(violations) + " idempotence violations");
  o.note(std::to_string(cases.size()) + " golden cases, " + std::to_string(texts.size() * steps.size()) +
         " idempotence checks");
  return o;
}

// 8 -------------------------------------------------------------------------

Outcome aggregation_oracle() {
  Outcome o;
  Rng rng(3);
  std::size_t bad = 0;
  for (int trial = 0; trial < 5000; ++trial) {
    std::vector<double> v(1 + rng.below(80));
    for (auto& x : v) x = trial % 2 ? static_cast<double>(rng.below(10)) : rng.normal() * 100;
    const auto got = five_number_summary(v);
    const auto want = testing::sorted_summary(v);
    bad += !(got.min == want.min && got.q1 == want.q1 && got.median == want.median && got.q3 == want.q3 &&
             got.max == want.max && got.iqr == want.q3 - want.q1);
  }
  o.require(bad == 0, std::to_string(bad) + " summaries differ from the sort-based oracle");

  ActivitySpec spec;
  spec.days = 60;
  const auto corpus = generate_activity_corpus(spec, 4);
  const std::span<const TweetRecord> all(corpus.records);
  std::size_t merge_bad = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t shards = 2 + rng.below(4);
    std::vector<TemporalCounter> t(shards, TemporalCounter(spec.utc_offset_minutes));
    std::vector<UserActivityCounter> u(shards);
    std::vector<MetadataCounter> m(shards);
    TemporalCounter tw(spec.utc_offset_minutes);
    UserActivityCounter uw;
    MetadataCounter mw;
    for (const auto& r : all) {
      const std::size_t k = rng.below(shards);
      t[k].add(r);
      u[k].add(r);
      m[k].add(r);
      tw.add(r);
      uw.add(r);
      mw.add(r);
    }
    for (std::size_t k = 1; k < shards; ++k) {
      t[0].merge(t[k]);
      u[0].merge(u[k]);
      m[0].merge(m[k]);
    }
    const TemporalStats a = t[0].stats(), w = tw.stats();
    bool ok = t[0].cells() == tw.cells() && a.daily == w.daily && a.weekday == w.weekday && a.hour == w.hour &&
              u[0].result().histogram == uw.result().histogram &&
              u[0].result().posts_by_user == uw.result().posts_by_user;
    for (EntityKind k : kEntityKinds) ok = ok && m[0].result()[k].count == mw.result()[k].count;
    merge_bad += !ok;
  }
  o.require(merge_bad == 0, std::to_string(merge_bad) + " shard merges differ");
  o.note("5000 summaries and 20 shard merges over " + std::to_string(all.size()) + " records");
  return o;
}

// 9 -------------------------------------------------------------------------

std::map<std::string, std::string> run_pipeline_into(const fs::path& store) {
  const std::vector<std::string> common = {"--store", store.string(), "--seed", "11"};
  auto run = [&](std::vector<std::string> args) {
    args.insert(args.end(), common.begin(), common.end());
    std::ostringstream out, err;
    if (run_cli(args, out, err) != 0) throw std::runtime_error(args[0] + " failed: " + err.str());
    std::string dir = out.str();
    while (!dir.empty() && dir.back() == '\n') dir.pop_back();
    return fs::path(dir);
  };
  const fs::path synth = run({"synth"});
  const std::string corpus = (synth / "corpus.ndjson").string(), labels = (synth / "labels.csv").string();
  const fs::path filtered = run({"filter", "-i", corpus, "--candidates"});
  const std::string records = (filtered / "records.ndjson").string();
  const fs::path travel = run({"preprocess", "-i", records, "--preset", "travel"});
  const std::string tokens = (travel / "tokens.cptok").string();
  const fs::path vocab = run({"vocab", "-t", tokens, "--labels", labels});
  const fs::path emb = run({"train-embeddings", "-t", tokens});
  const std::vector<std::string> feats = {"-t", tokens, "--vocab", (vocab / "vocab.json").string(), "--embeddings",
                                          (emb / "embeddings.cpemb").string()};
  auto with = [&](std::vector<std::string> head) {
    head.insert(head.end(), feats.begin(), feats.end());
    return head;
  };
  const fs::path model = run(with({"train-classifier", "-l", labels}));
  const std::string cls = (model / "classifier.cplin").string();
  run(with({"evaluate", "-m", cls, "-l", labels, "--split", "all"}));
  run(with({"logo", "-l", labels}));
  run(with({"predict", "-m", cls}));
  const fs::path topic = run({"preprocess", "-i", records, "--preset", "topic"});
  const std::string ttokens = (topic / "tokens.cptok").string();
  const fs::path tvocab = run({"vocab", "-t", ttokens, "--profile", "lda"});
  const fs::path lda = run({"train-lda", "-t", ttokens, "--vocab", (tvocab / "vocab.json").string()});
  const std::string lmodel = (lda / "model.cplda").string();
  run({"topics", "-m", lmodel, "-t", ttokens, "-i", records});
  run({"aggregate", "-i", records});
  run({"report", "-i", records, "--topic-model", lmodel, "-t", ttokens});

  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(store)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), store).string()] = read_file_bytes(e.path());
  }
  return files;
}

Outcome end_to_end_determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / ("citypulse-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::map<std::string, std::string> a, b;
  try {
    a = run_pipeline_into(root / "a");
    b = run_pipeline_into(root / "b");
  } catch (const std::exception& e) {
    o.require(false, e.what());
  }
  fs::remove_all(root);
  std::size_t differing = 0;
  for (const auto& [name, bytes] : a) {
    const auto it = b.find(name);
    differing += it == b.end() || it->second != bytes;
  }
  o.require(!a.empty() && a.size() == b.size() && differing == 0,
            std::to_string(differing) + " of " + std::to_string(a.size()) + " files differ");
  if (o.pass) o.note(std::to_string(a.size()) + " artifact files byte-identical across two runs");
  for (const auto& [name, bytes] : a) {
    if (!o.pass && (!b.count(name) || b.at(name) != bytes)) o.note(name);
  }
  return o;
}

struct Criterion {
  int number;
  const char* name;
  double budget_seconds;
  Outcome (*run)();
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "metric oracle", 0, metric_oracle},
      {2, "geo-filter oracle", 5, geo_filter_oracle},
      {3, "LDA planted recovery", 60, lda_recovery},
      {4, "embedding semantics", 60, embedding_semantics},
      {5, "LOGO direction", 180, logo_direction},
      {6, "dataset arithmetic", 0, dataset_arithmetic},
      {7, "preprocessing goldens", 0, preprocessing_goldens},
      {8, "aggregation oracle", 0, aggregation_oracle},
      {9, "end-to-end determinism", 300, end_to_end_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.require(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0) o.require(secs < c.budget_seconds, "over the " + fmt(c.budget_seconds, 0) + " s budget");
    failures += !o.pass;
    std::cout << "criterion " << c.number << ": " << (o.pass ? "PASS" : "FAIL") << "  " << c.name << "  ("
              << o.detail << "; " << fmt(secs, 2) << " s)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
