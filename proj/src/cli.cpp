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

#include "citypulse/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "citypulse/aggregate.hpp"
#include "citypulse/classify.hpp"
#include "citypulse/config.hpp"
#include "citypulse/csv.hpp"
#include "citypulse/error.hpp"
#include "citypulse/ingest.hpp"
#include "citypulse/report.hpp"
#include "citypulse/store.hpp"
#include "citypulse/synth.hpp"
#include "citypulse/textprep.hpp"
#include "citypulse/topics.hpp"

namespace citypulse {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// File formats

void write_token_docs(std::ostream& out, const TokenDocsFile& f) {
  out << json{{"magic", "CPTOK1"}, {"version", 1}, {"preset", f.preset}}.dump() << '\n';
  for (std::size_t i = 0; i < f.docs.size(); ++i) {
    out << json{{"id", f.ids[i]}, {"lang", f.langs[i]}, {"tokens", f.docs[i]}}.dump() << '\n';
  }
}

TokenDocsFile read_token_docs(std::istream& in) {
  TokenDocsFile f;
  f.preset = read_header(in, "CPTOK1", 1).value("preset", "");
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    try {
      if (j.is_discarded()) throw std::runtime_error("not JSON");
      f.ids.push_back(j.at("id").get<std::string>());
      f.langs.push_back(j.at("lang").get<std::string>());
      f.docs.push_back(j.at("tokens").get<TokenDoc>());
    } catch (const std::exception& e) {
      throw Error(ErrorKind::kFormatError, "token docs line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return f;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  return out;
}

std::string join(const std::vector<std::string>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? std::string(1, sep) : std::string()) + v[i];
  return s;
}

}  // namespace

void write_labels(std::ostream& out, const std::map<std::string, LabelRow>& labels) {
  out << "id,label,split,modes\n";
  for (const auto& [id, r] : labels) out << csv_row({csv_field(id), std::to_string(r.label), r.split, join(r.modes, ';')});
}

std::map<std::string, LabelRow> read_labels(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("id,label,split,modes", 0) != 0) {
    throw Error(ErrorKind::kFormatError, "labels file must start with id,label,split,modes");
  }
  std::map<std::string, LabelRow> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    const std::string where = "labels line " + std::to_string(lineno) + ": ";
    if (f.size() != 4) throw Error(ErrorKind::kFormatError, where + "expected 4 fields");
    LabelRow r;
    if (f[1] == "1" || f[1] == "+1") {
      r.label = 1;
    } else if (f[1] == "-1" || f[1] == "0") {
      r.label = -1;
    } else {
      throw Error(ErrorKind::kFormatError, where + "label must be 1 or -1");
    }
    r.split = f[2];
    std::string m;
    std::istringstream ms(f[3]);
    while (std::getline(ms, m, ';')) {
      if (!m.empty()) r.modes.push_back(m);
    }
    if (!out.emplace(f[0], std::move(r)).second) throw Error(ErrorKind::kFormatError, where + "duplicate id " + f[0]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands

namespace {

struct Context {
  RunConfig config = RunConfig::defaults();
  std::ostream* out = nullptr;

  ArtifactStore store() const { return ArtifactStore(config.get_string("store.dir")); }
  /// Effective config as recorded in manifests. The store location is left
  /// out so the same run lands under the same name in any store.
  nlohmann::json recorded() const {
    nlohmann::json j = config.to_json();
    j.erase("store.dir");
    return j;
  }
  CityConfig city() const { return config.current_city(); }
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path);
  return in;
}

template <class Fn>
std::string render(Fn&& fn) {
  std::ostringstream s(std::ios::binary);
  fn(s);
  return s.str();
}

void finish(Context& ctx, ArtifactWriter& w) { *ctx.out << w.commit().string() << '\n'; }

std::string preprocess_lang(const std::string& record_lang, const CityConfig& city) {
  if (record_lang == "en" || record_lang == "pt") return record_lang;
  for (const auto& l : city.langs) {
    if (l == "en" || l == "pt") return l;
  }
  return "en";
}

Vocabulary load_vocabulary(const std::string& path) {
  auto in = open_in(path);
  const json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object() || j.value("magic", "") != "CPVOC1") {
    throw Error(ErrorKind::kFormatError, path + " is not a CPVOC1 vocabulary");
  }
  if (j.value("version", 0) != 1) throw Error(ErrorKind::kFormatError, path + ": unsupported vocabulary version");
  return Vocabulary::from_json(j.at("vocabulary"));
}

TokenDocsFile load_tokens(const std::string& path) {
  auto in = open_in(path);
  return read_token_docs(in);
}

std::map<std::string, LabelRow> load_labels(const std::string& path) {
  auto in = open_in(path);
  return read_labels(in);
}

std::vector<TweetRecord> load_records(const std::string& path) { return read_file(path, {}).records; }

// Feature assembly shared by training, evaluation, LOGO and prediction.
struct FeatureInputs {
  std::string kind;  // bow, boe or bow+boe
  std::string vocab_path;
  std::string embeddings_path;
};

struct Rows {
  std::vector<std::string> ids;
  std::vector<TokenDoc> docs;
  std::vector<int> labels;
  std::vector<GroupedExample> groups;
};

/// Docs of `tokens` that have a label, optionally restricted to one split.
Rows labeled_rows(const TokenDocsFile& tokens, const std::map<std::string, LabelRow>& labels,
                  const std::string& split) {
  Rows r;
  for (std::size_t i = 0; i < tokens.docs.size(); ++i) {
    const auto it = labels.find(tokens.ids[i]);
    if (it == labels.end()) continue;
    if (!split.empty() && split != "all" && it->second.split != split) continue;
    r.ids.push_back(tokens.ids[i]);
    r.docs.push_back(tokens.docs[i]);
    r.labels.push_back(it->second.label);
    r.groups.push_back({it->second.label, it->second.modes});
  }
  return r;
}

void check_feature_kind(const std::string& kind) {
  if (kind != "bow" && kind != "boe" && kind != "bow+boe") {
    throw Error(ErrorKind::kConfigError, "features must be bow, boe or bow+boe, not '" + kind + "'");
  }
}

FeatureMatrix build_features(const FeatureInputs& in, const std::vector<std::string>& ids,
                             const std::vector<TokenDoc>& docs, std::uint64_t seed) {
  check_feature_kind(in.kind);
  const bool bow = in.kind != "boe", boe = in.kind != "bow";
  Vocabulary vocab;
  if (bow) {
    if (in.vocab_path.empty()) throw Error(ErrorKind::kConfigError, "bag-of-words features need --vocab");
    vocab = load_vocabulary(in.vocab_path);
  }
  std::optional<LoadedEmbedding> emb;
  bool pvdbow = false;
  if (boe) {
    if (in.embeddings_path.empty()) throw Error(ErrorKind::kConfigError, "embedding features need --embeddings");
    auto s = open_in(in.embeddings_path);
    emb = read_embedding_model(s);
    pvdbow = !emb->docs.empty();
  }
  FeatureMatrix m(bow ? vocab.size() : 0, boe ? emb->model.dim() : 0);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    FeatureMatrix::SparseRow sparse;
    if (bow) {
      for (const auto& [k, c] : bow_vector(docs[i], vocab).entries) sparse.emplace_back(k, static_cast<float>(c));
    }
    std::vector<float> dense;
    if (boe) {
      dense = pvdbow ? infer_doc_vector(emb->model, docs[i], 0, seed).values : mean_word_vector(emb->model, docs[i]);
    }
    m.add_row(ids[i], std::move(sparse), std::move(dense));
  }
  return m;
}

std::vector<ArtifactInput> feature_inputs(const FeatureInputs& in) {
  std::vector<ArtifactInput> v;
  if (in.kind != "boe") v.push_back({"vocab", in.vocab_path});
  if (in.kind != "bow") v.push_back({"embeddings", in.embeddings_path});
  return v;
}

Trainer make_trainer(const RunConfig& cfg) {
  if (cfg.get_string("classifier.model") == "rf") {
    const ForestConfig base = cfg.forest();
    return [base](const FeatureMatrix& x, std::span<const int> y, std::uint64_t seed) {
      ForestConfig c = base;
      c.seed = seed;
      return std::unique_ptr<Classifier>(new ForestModel(train_random_forest(x, y, c)));
    };
  }
  const LinearConfig base = cfg.linear();
  return [base](const FeatureMatrix& x, std::span<const int> y, std::uint64_t seed) {
    LinearConfig c = base;
    c.seed = seed;
    return std::unique_ptr<Classifier>(new LinearModel(train_linear(x, y, c)));
  };
}

std::string summary_csv(const std::string& model, const std::string& features, const Metrics& m, double auc) {
  return std::string(kEvalCsvHeader) + "\n" + eval_csv_row(model, features, m.precision, m.recall, m.f1, auc);
}

std::string roc_csv(const RocResult& roc) {
  std::string s = "fpr,tpr\n";
  for (const auto& p : roc.points) s += csv_row({format_double(p.fpr), format_double(p.tpr)});
  return s;
}

/// Classifier plus the manifest of the artifact it came from, with its
/// feature inputs checked against the files supplied now.
struct LoadedClassifier {
  std::unique_ptr<Classifier> model;
  json manifest;
  FeatureInputs features;
};

LoadedClassifier load_classifier(const std::string& path, const std::string& vocab, const std::string& embeddings) {
  LoadedClassifier c;
  c.manifest = manifest_of(path);
  if (c.manifest.at("command") != "train-classifier") {
    throw Error(ErrorKind::kFormatError, path + " was not written by train-classifier");
  }
  c.features = {c.manifest.at("params").at("features").get<std::string>(), vocab, embeddings};
  for (const auto& in : feature_inputs(c.features)) {
    if (in.path.empty()) throw Error(ErrorKind::kConfigError, "this model needs --" + in.role);
    check_input(c.manifest, in.role, in.path);
  }
  auto s = open_in(path);
  c.model = read_classifier(s);
  return c;
}

// ---- synth ----------------------------------------------------------------

struct SynthOpts {
  std::string kind = "fixture";
  std::size_t topics = 5, docs = 500, doc_length = 25, terms = 10;
};

void cmd_synth(Context& ctx, const SynthOpts& o) {
  const auto& cfg = ctx.config;
  const CityConfig city = ctx.city();
  const std::uint64_t seed = cfg.seed();
  SynthCorpus corpus;
  if (o.kind == "fixture") {
    FixtureSpec spec;
    spec.counts = spec.counts.scaled(cfg.get_double("synth.shrink"));
    spec.classification.holdout_fraction = cfg.get_double("synth.holdout");
    spec.embedding_docs = cfg.get_size("synth.embedding_docs");
    spec.geo.city = city.box;
    spec.activity.utc_offset_minutes = city.utc_offset_minutes;
    corpus = generate_fixture(spec, seed);
  } else if (o.kind == "topics") {
    corpus = generate_topic_corpus(planted_topics(o.topics, o.terms), o.docs, o.doc_length, seed);
  } else if (o.kind == "activity") {
    ActivitySpec spec;
    spec.utc_offset_minutes = city.utc_offset_minutes;
    corpus = generate_activity_corpus(spec, seed);
    GeoSpec geo;
    geo.city = city.box;
    generate_geo(corpus, geo, seed + 1);
  } else {
    throw Error(ErrorKind::kConfigError, "unknown synth kind '" + o.kind + "' (fixture, topics, activity)");
  }
  std::map<std::string, LabelRow> labels;
  for (const auto& e : corpus.ledger.entries) {
    if (e.labeled()) labels[e.id] = {e.positive() ? 1 : -1, e.split, e.modes};
  }
  json params = {{"kind", o.kind}};
  if (o.kind == "topics") params.update({{"topics", o.topics}, {"docs", o.docs}, {"doc_length", o.doc_length}});
  ArtifactWriter w(ctx.store(), "synth", {}, ctx.recorded(), params);
  w.write("corpus.ndjson", render([&](std::ostream& s) { write_ndjson(s, corpus.records); }));
  w.write("ledger.json", corpus.ledger.to_json().dump(1) + "\n");
  w.write("labels.csv", render([&](std::ostream& s) { write_labels(s, labels); }));
  finish(ctx, w);
}

// ---- filter ---------------------------------------------------------------

struct FilterOpts {
  std::string input;
  bool candidates = false;
};

void cmd_filter(Context& ctx, const FilterOpts& o) {
  const CityConfig city = ctx.city();
  std::set<std::string> langs;
  if (ctx.config.get_bool("filter.native_only")) langs.insert(city.langs.begin(), city.langs.end());
  auto in = open_in(o.input);
  RecordReader reader(in, langs);
  std::map<std::string, std::uint64_t> reasons;
  for (FilterReason r : {FilterReason::kCoordinateInside, FilterReason::kPlaceMatched, FilterReason::kCoordinateOutside,
                         FilterReason::kPlaceUnmatched, FilterReason::kNoGeoInfo}) {
    reasons[std::string(filter_reason_name(r))] = 0;
  }
  std::ostringstream kept;
  std::vector<TweetRecord> accepted;
  GeotagTally tally;
  std::uint64_t n_accepted = 0, n_rejected = 0;
  while (auto r = reader.next()) {
    const FilterDecision d = city_filter(*r, city.box, city.place_mode);
    ++reasons[std::string(filter_reason_name(d.reason))];
    ++(d.accepted ? n_accepted : n_rejected);
    tally.add(*r);
    if (d.accepted) {
      kept << to_wire_json(*r) << '\n';
      if (o.candidates) accepted.push_back(std::move(*r));
    }
  }
  const IngestStats& is = reader.stats();
  const GeotagBreakdown g = tally.result();
  auto kind = [](const GeotagKindStats& k) {
    return json{{"distinct", k.distinct}, {"tweets", k.tweets}, {"percentage", k.percentage}};
  };
  const json stats = {
      {"city", city.key},
      {"place_mode", place_mode_name(city.place_mode)},
      {"ingest",
       {{"lines_read", is.lines_read}, {"parsed_ok", is.parsed_ok}, {"malformed", is.malformed},
        {"language_rejected", is.language_rejected}}},
      {"accepted", n_accepted},
      {"rejected", n_rejected},
      {"reasons", reasons},
      {"geotags",
       {{"precise", kind(g.precise)}, {"degenerate", kind(g.degenerate)}, {"variable", kind(g.variable)},
        {"untagged", g.untagged}}}};
  ArtifactWriter w(ctx.store(), "filter", {{"input", o.input}}, ctx.recorded(), {{"candidates", o.candidates}});
  w.write("records.ndjson", kept.str());
  w.write("filter_stats.json", stats.dump(2) + "\n");
  if (o.candidates) {
    std::string c = "id,modes\n";
    for (const auto& m : travel_term_search(accepted, TravelTermTable::bundled())) {
      c += csv_row({csv_field(m.id), join(m.modes, ';')});
    }
    w.write("candidates.csv", c);
  }
  finish(ctx, w);
}

// ---- preprocess -----------------------------------------------------------

void cmd_preprocess(Context& ctx, const std::string& input) {
  const std::string preset = ctx.config.get_string("preprocess.preset");
  const CityConfig city = ctx.city();
  PipelineConfig::preset(preset, "en");

  // Inputs are tweet NDJSON or an earlier token docs file, re-run on its
  // space-joined tokens.
  TokenDocsFile src;
  std::vector<std::string> texts;
  {
    auto in = open_in(input);
    std::string first;
    std::getline(in, first);
    const json h = json::parse(first, nullptr, false);
    in.clear();
    in.seekg(0);
    if (h.is_object() && h.value("magic", "") == "CPTOK1") {
      src = read_token_docs(in);
      for (const auto& d : src.docs) texts.push_back(join(d, ' '));
    } else {
      for (auto& r : read_stream(in, {}).records) {
        src.ids.push_back(r.id);
        src.langs.push_back(r.lang);
        texts.push_back(std::move(r.text));
      }
    }
  }

  TokenDocsFile out;
  out.preset = preset;
  std::map<std::string, PipelineConfig> pipelines;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const std::string lang = preprocess_lang(src.langs[i], city);
    auto it = pipelines.find(lang);
    if (it == pipelines.end()) it = pipelines.emplace(lang, PipelineConfig::preset(preset, lang)).first;
    out.ids.push_back(src.ids[i]);
    out.langs.push_back(src.langs[i]);
    out.docs.push_back(run_pipeline(texts[i], it->second).tokens);
  }
  ArtifactWriter w(ctx.store(), "preprocess", {{"input", input}}, ctx.recorded());
  w.write("tokens.cptok", render([&](std::ostream& s) { write_token_docs(s, out); }));
  finish(ctx, w);
}

// ---- vocab ----------------------------------------------------------------

struct VocabOpts {
  std::string tokens, profile = "bow", labels;
};

void cmd_vocab(Context& ctx, const VocabOpts& o) {
  const VocabularyParams params = ctx.config.vocabulary(o.profile);
  const TokenDocsFile t = load_tokens(o.tokens);
  std::vector<TokenDoc> docs;
  std::vector<ArtifactInput> inputs = {{"tokens", o.tokens}};
  if (o.labels.empty()) {
    docs = t.docs;
  } else {
    docs = labeled_rows(t, load_labels(o.labels), "train").docs;
    inputs.push_back({"labels", o.labels});
  }
  const Vocabulary v = build_vocabulary(docs, params);
  ArtifactWriter w(ctx.store(), "vocab", inputs, ctx.recorded(), {{"profile", o.profile}});
  w.write("vocab.json",
          json{{"magic", "CPVOC1"}, {"version", 1}, {"profile", o.profile}, {"vocabulary", v.to_json()}}.dump() + "\n");
  finish(ctx, w);
}

// ---- train-embeddings -----------------------------------------------------

struct EmbedOpts {
  std::string tokens, vocab;
};

void cmd_train_embeddings(Context& ctx, const EmbedOpts& o) {
  const SkipgramConfig sg = ctx.config.skipgram();
  const TokenDocsFile t = load_tokens(o.tokens);
  std::vector<ArtifactInput> inputs = {{"tokens", o.tokens}};
  Vocabulary vocab;
  if (o.vocab.empty()) {
    vocab = build_vocabulary(t.docs, ctx.config.vocabulary("embed"));
  } else {
    vocab = load_vocabulary(o.vocab);
    inputs.push_back({"vocab", o.vocab});
  }
  const std::string method = ctx.config.get_string("embed.method");
  std::string bytes;
  if (method == "pvdbow") {
    const PvDbowResult r = train_pvdbow(t.docs, vocab, sg, t.ids);
    bytes = render([&](std::ostream& s) { write_embedding_model(s, r.model, r.docs); });
  } else {
    const EmbeddingModel m = train_skipgram(t.docs, vocab, sg);
    bytes = render([&](std::ostream& s) { write_embedding_model(s, m); });
  }
  ArtifactWriter w(ctx.store(), "train-embeddings", inputs, ctx.recorded(), {{"method", method}});
  w.write("embeddings.cpemb", bytes);
  finish(ctx, w);
}

// ---- topics ---------------------------------------------------------------

struct LdaOpts {
  std::string tokens, vocab, model, input, map;
};

std::vector<BowVector> bow_docs(const TokenDocsFile& t, const Vocabulary& v) {
  std::vector<BowVector> out;
  for (const auto& d : t.docs) out.push_back(bow_vector(d, v));
  return out;
}

void cmd_train_lda(Context& ctx, const LdaOpts& o) {
  const LdaConfig cfg = ctx.config.lda();
  const TokenDocsFile t = load_tokens(o.tokens);
  const Vocabulary v = load_vocabulary(o.vocab);
  const LdaModel m = train_lda(bow_docs(t, v), v, cfg);
  ArtifactWriter w(ctx.store(), "train-lda", {{"tokens", o.tokens}, {"vocab", o.vocab}}, ctx.recorded());
  w.write("model.cplda", render([&](std::ostream& s) { write_lda_model(s, m); }));
  w.write("topics.csv", render([&](std::ostream& s) { write_topic_csv(s, m, ctx.config.get_size("lda.top_words")); }));
  finish(ctx, w);
}

LdaModel load_lda(const std::string& path) {
  auto s = open_in(path);
  return read_lda_model(s);
}

/// Dominant topic of every training document, checked against the tokens the
/// model was trained on.
std::vector<std::uint32_t> training_topics(const std::string& model_path, const LdaModel& m,
                                           const std::string& tokens_path, const TokenDocsFile& t) {
  check_input(manifest_of(model_path), "tokens", tokens_path);
  if (t.docs.size() != m.docs()) throw Error(ErrorKind::kRowMismatch, "token docs and LDA documents differ in count");
  std::vector<std::uint32_t> out;
  for (std::size_t d = 0; d < m.docs(); ++d) out.push_back(dominant_topic(m.theta(d)));
  return out;
}

constexpr const char* kWeekdayNames[] = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};

std::vector<WeekdayRow> weekday_matrix(const std::vector<std::uint32_t>& topics, const TokenDocsFile& t,
                                       const std::string& records_path, int offset, std::size_t k) {
  std::map<std::string, Timestamp> when;
  for (const auto& r : load_records(records_path)) when.emplace(r.id, r.created_at_utc);
  std::vector<std::uint32_t> kept;
  std::vector<LocalTime> times;
  for (std::size_t d = 0; d < topics.size(); ++d) {
    const auto it = when.find(t.ids[d]);
    if (it == when.end()) continue;
    kept.push_back(topics[d]);
    times.push_back(localize_timestamp(it->second, offset));
  }
  return topic_day_of_week(kept, times, k);
}

std::string weekday_csv(const std::vector<WeekdayRow>& rows) {
  std::string s = "topic,mon,tue,wed,thu,fri,sat,sun\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    std::vector<std::string> f = {std::to_string(k)};
    for (double v : rows[k]) f.push_back(format_fixed(v, 6));
    s += csv_row(f);
  }
  return s;
}

void cmd_topics(Context& ctx, const LdaOpts& o) {
  const LdaModel m = load_lda(o.model);
  std::vector<ArtifactInput> inputs = {{"model", o.model}};
  std::string doc_topics, weekday;
  if (!o.tokens.empty()) {
    const TokenDocsFile t = load_tokens(o.tokens);
    const auto topics = training_topics(o.model, m, o.tokens, t);
    inputs.push_back({"tokens", o.tokens});
    doc_topics = "id,topic\n";
    for (std::size_t d = 0; d < topics.size(); ++d) doc_topics += csv_row({csv_field(t.ids[d]), std::to_string(topics[d])});
    if (!o.input.empty()) {
      inputs.push_back({"input", o.input});
      weekday = weekday_csv(weekday_matrix(topics, t, o.input, ctx.city().utc_offset_minutes, m.topics()));
    }
  }
  ArtifactWriter w(ctx.store(), "topics", inputs, ctx.recorded());
  w.write("topics.csv", render([&](std::ostream& s) { write_topic_csv(s, m, ctx.config.get_size("lda.top_words")); }));
  if (!doc_topics.empty()) w.write("doc_topics.csv", doc_topics);
  if (!weekday.empty()) w.write("topic_weekday.csv", weekday);
  finish(ctx, w);
}

void cmd_label(Context& ctx, const LdaOpts& o) {
  const LdaModel m = load_lda(o.model);
  const TokenDocsFile t = load_tokens(o.tokens);
  const auto topics = training_topics(o.model, m, o.tokens, t);
  TopicLabelMap map;
  {
    auto in = open_in(o.map);
    const json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorKind::kMalformedJson, o.map + " is not JSON");
    map = TopicLabelMap::from_json(j);
  }
  std::vector<std::pair<std::string, std::uint32_t>> assignments;
  for (std::size_t d = 0; d < topics.size(); ++d) assignments.emplace_back(t.ids[d], topics[d]);
  std::string csv = "label,count,pct\n";
  for (const auto& s : apply_label_map(assignments, map)) {
    csv += csv_row({csv_field(s.label), std::to_string(s.count), format_fixed(s.percentage, 2)});
  }
  ArtifactWriter w(ctx.store(), "label", {{"model", o.model}, {"tokens", o.tokens}, {"map", o.map}},
                   ctx.recorded());
  w.write("label_shares.csv", csv);
  finish(ctx, w);
}

// ---- classification -------------------------------------------------------

struct ClassOpts {
  std::string tokens, labels, vocab, embeddings, model, scores, split;
  double threshold = 0.0;
  bool cv = false;
};

void cmd_train_classifier(Context& ctx, const ClassOpts& o) {
  const std::string kind = ctx.config.get_string("classifier.features");
  const std::string model_name = ctx.config.get_string("classifier.model");
  const FeatureInputs fi{kind, o.vocab, o.embeddings};
  const Rows rows = labeled_rows(load_tokens(o.tokens), load_labels(o.labels), o.split.empty() ? "train" : o.split);
  const FeatureMatrix x = build_features(fi, rows.ids, rows.docs, ctx.config.seed());
  const auto model = make_trainer(ctx.config)(x, rows.labels, ctx.config.seed());
  json train = evaluate(*model, x, rows.labels).to_json();
  train.erase("roc");
  if (const auto* f = dynamic_cast<const ForestModel*>(model.get())) {
    train["oob_error"] = std::isnan(f->oob_error()) ? json(nullptr) : json(f->oob_error());
  }
  std::vector<ArtifactInput> inputs = {{"tokens", o.tokens}, {"labels", o.labels}};
  for (auto& i : feature_inputs(fi)) inputs.push_back(std::move(i));
  ArtifactWriter w(ctx.store(), "train-classifier", inputs, ctx.recorded(),
                   {{"features", kind}, {"model", model_name}, {"rows", rows.ids.size()}});
  w.write(model_name == "rf" ? "classifier.cprf" : "classifier.cplin",
          render([&](std::ostream& s) { write_classifier(s, *model); }));
  w.write("train_report.json", train.dump(2) + "\n");
  finish(ctx, w);
}

void cmd_evaluate(Context& ctx, const ClassOpts& o) {
  const auto labels = load_labels(o.labels);
  if (!o.scores.empty()) {
    // Precomputed scores: CSV id,score.
    auto in = open_in(o.scores);
    std::string line;
    std::getline(in, line);
    std::vector<double> scores;
    std::vector<int> truth;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split_csv_line(line);
      if (f.size() < 2) throw Error(ErrorKind::kFormatError, "scores rows are id,score");
      const auto it = labels.find(f[0]);
      if (it == labels.end()) continue;
      try {
        scores.push_back(std::stod(f[1]));
      } catch (const std::exception&) {
        throw Error(ErrorKind::kFormatError, "bad score '" + f[1] + "'");
      }
      truth.push_back(it->second.label);
    }
    const EvalReport r = evaluate_scores(scores, truth, o.threshold);
    ArtifactWriter w(ctx.store(), "evaluate", {{"scores", o.scores}, {"labels", o.labels}}, ctx.recorded(),
                     {{"threshold", o.threshold}});
    w.write("report.json", r.to_json().dump(2) + "\n");
    w.write("summary.csv", summary_csv("scores", "-", r.metrics, r.roc.auc));
    w.write("roc.csv", roc_csv(r.roc));
    finish(ctx, w);
    return;
  }

  const TokenDocsFile tokens = load_tokens(o.tokens);
  if (o.cv) {
    const std::string kind = ctx.config.get_string("classifier.features");
    const FeatureInputs fi{kind, o.vocab, o.embeddings};
    const Rows rows = labeled_rows(tokens, labels, o.split.empty() ? "all" : o.split);
    const FeatureMatrix x = build_features(fi, rows.ids, rows.docs, ctx.config.seed());
    const CvResult cv = k_fold_cv(x, rows.labels, ctx.config.get_size("eval.folds"),
                                  ctx.config.get_bool("eval.stratified"), ctx.config.seed(), make_trainer(ctx.config));
    std::string csv = std::string(kEvalCsvHeader) + "\n";
    const std::string model = ctx.config.get_string("classifier.model");
    csv += eval_csv_row(model, kind, cv.mean.precision, cv.mean.recall, cv.mean.f1, cv.mean.auc);
    std::vector<ArtifactInput> inputs = {{"tokens", o.tokens}, {"labels", o.labels}};
    for (auto& i : feature_inputs(fi)) inputs.push_back(std::move(i));
    ArtifactWriter w(ctx.store(), "evaluate", inputs, ctx.recorded(), {{"mode", "cv"}, {"features", kind}});
    w.write("cv.json", cv.to_json().dump(2) + "\n");
    w.write("summary.csv", csv);
    finish(ctx, w);
    return;
  }

  if (o.model.empty()) throw Error(ErrorKind::kConfigError, "evaluate needs --model, --scores or --cv");
  const LoadedClassifier c = load_classifier(o.model, o.vocab, o.embeddings);
  const Rows rows = labeled_rows(tokens, labels, o.split.empty() ? "test" : o.split);
  const FeatureMatrix x = build_features(c.features, rows.ids, rows.docs, ctx.config.seed());
  if (x.arity() != c.model->arity()) throw Error(ErrorKind::kRowMismatch, "feature arity differs from the model");
  const EvalReport r = evaluate(*c.model, x, rows.labels);
  std::vector<ArtifactInput> inputs = {{"model", o.model}, {"tokens", o.tokens}, {"labels", o.labels}};
  for (auto& i : feature_inputs(c.features)) inputs.push_back(std::move(i));
  ArtifactWriter w(ctx.store(), "evaluate", inputs, ctx.recorded(), {{"split", o.split}});
  w.write("report.json", r.to_json().dump(2) + "\n");
  w.write("summary.csv", summary_csv(c.manifest.at("params").at("model").get<std::string>(), c.features.kind,
                                     r.metrics, r.roc.auc));
  w.write("roc.csv", roc_csv(r.roc));
  finish(ctx, w);
}

void cmd_logo(Context& ctx, const ClassOpts& o) {
  const std::string kind = ctx.config.get_string("classifier.features");
  const FeatureInputs fi{kind, o.vocab, o.embeddings};
  const Rows rows = labeled_rows(load_tokens(o.tokens), load_labels(o.labels), o.split.empty() ? "all" : o.split);
  std::set<std::string> mode_set;
  for (const auto& g : rows.groups) mode_set.insert(g.modes.begin(), g.modes.end());
  const std::vector<std::string> modes(mode_set.begin(), mode_set.end());
  const FeatureMatrix x = build_features(fi, rows.ids, rows.docs, ctx.config.seed());
  const LogoResult r = leave_one_group_out(x, rows.groups, modes, ctx.config.get_size("logo.test_negatives"),
                                           ctx.config.seed(), make_trainer(ctx.config));
  std::string csv =
      "hidden_mode,train_positives,test_positives,train_negatives,test_negatives,precision,recall,f1,auc\n";
  auto f5 = [](double v) { return format_fixed(v, 5); };
  for (std::size_t i = 0; i < r.folds.size(); ++i) {
    const auto& f = r.folds[i];
    const auto& m = r.reports[i].metrics;
    csv += csv_row({f.hidden_mode, std::to_string(f.train_positives), std::to_string(f.test_positives),
                    std::to_string(f.train_negatives), std::to_string(f.test_negatives), f5(m.precision),
                    f5(m.recall), f5(m.f1), f5(r.reports[i].roc.auc)});
  }
  csv += csv_row({"mean", "", "", "", "", f5(r.mean.precision), f5(r.mean.recall), f5(r.mean.f1), f5(r.mean.auc)});
  const std::string model = ctx.config.get_string("classifier.model");
  std::vector<ArtifactInput> inputs = {{"tokens", o.tokens}, {"labels", o.labels}};
  for (auto& i : feature_inputs(fi)) inputs.push_back(std::move(i));
  ArtifactWriter w(ctx.store(), "logo", inputs, ctx.recorded(), {{"features", kind}});
  w.write("logo.csv", csv);
  w.write("logo.json", r.to_json().dump(2) + "\n");
  w.write("summary.csv", std::string(kEvalCsvHeader) + "\n" +
                             eval_csv_row(model, kind, r.mean.precision, r.mean.recall, r.mean.f1, r.mean.auc));
  finish(ctx, w);
}

void cmd_predict(Context& ctx, const ClassOpts& o) {
  const LoadedClassifier c = load_classifier(o.model, o.vocab, o.embeddings);
  const TokenDocsFile t = load_tokens(o.tokens);
  const FeatureMatrix x = build_features(c.features, t.ids, t.docs, ctx.config.seed());
  if (x.arity() != c.model->arity()) throw Error(ErrorKind::kRowMismatch, "feature arity differs from the model");
  std::string csv = "id,score,label\n";
  for (std::size_t i = 0; i < x.rows(); ++i) {
    csv += csv_row({csv_field(t.ids[i]), format_double(c.model->score(x, i)), std::to_string(c.model->predict(x, i))});
  }
  std::vector<ArtifactInput> inputs = {{"model", o.model}, {"tokens", o.tokens}};
  for (auto& i : feature_inputs(c.features)) inputs.push_back(std::move(i));
  ArtifactWriter w(ctx.store(), "predict", inputs, ctx.recorded());
  w.write("predictions.csv", csv);
  finish(ctx, w);
}

// ---- aggregate / report ---------------------------------------------------

struct AggregateOpts {
  std::string input, topic_model, tokens;
};

struct Aggregates {
  TemporalStats temporal;
  UserActivity users;
  MetadataComposition metadata;
  GeotagBreakdown geotags;
};

Aggregates aggregate_file(const std::string& path, int offset) {
  auto in = open_in(path);
  RecordReader reader(in, {});
  TemporalCounter t(offset);
  UserActivityCounter u;
  MetadataCounter m;
  GeotagTally g;
  while (auto r = reader.next()) {
    t.add(*r);
    u.add(*r);
    m.add(*r);
    g.add(*r);
  }
  return {t.stats(), u.result(), m.result(), g.result()};
}

void write_aggregate_csvs(ArtifactWriter& w, const Aggregates& a) {
  w.write("daily.csv", render([&](std::ostream& s) { write_daily_csv(s, a.temporal); }));
  w.write("weekday.csv", render([&](std::ostream& s) { write_weekday_summary_csv(s, a.temporal); }));
  w.write("hour.csv", render([&](std::ostream& s) { write_hour_summary_csv(s, a.temporal); }));
  w.write("users.csv", render([&](std::ostream& s) { write_user_activity_csv(s, a.users); }));
  w.write("metadata.csv", render([&](std::ostream& s) { write_metadata_csv(s, a.metadata); }));
  std::string g = "kind,distinct,tweets,pct\n";
  for (GeoTagKind k : {GeoTagKind::kPreciseCoordinate, GeoTagKind::kDegeneratePlaceBox, GeoTagKind::kVariablePlaceBox}) {
    const auto& s = a.geotags[k];
    g += csv_row({std::string(geotag_kind_name(k)), std::to_string(s.distinct), std::to_string(s.tweets),
                  format_fixed(s.percentage, 2)});
  }
  w.write("geotags.csv", g);
}

void cmd_aggregate(Context& ctx, const AggregateOpts& o) {
  const Aggregates a = aggregate_file(o.input, ctx.city().utc_offset_minutes);
  ArtifactWriter w(ctx.store(), "aggregate", {{"input", o.input}}, ctx.recorded());
  write_aggregate_csvs(w, a);
  finish(ctx, w);
}

void cmd_report(Context& ctx, const AggregateOpts& o) {
  const CityConfig city = ctx.city();
  const Aggregates a = aggregate_file(o.input, city.utc_offset_minutes);
  std::vector<ArtifactInput> inputs = {{"input", o.input}};
  std::vector<WeekdayRow> heat;
  if (!o.topic_model.empty()) {
    if (o.tokens.empty()) throw Error(ErrorKind::kConfigError, "--topic-model needs --tokens");
    const LdaModel m = load_lda(o.topic_model);
    const TokenDocsFile t = load_tokens(o.tokens);
    heat = weekday_matrix(training_topics(o.topic_model, m, o.tokens, t), t, o.input, city.utc_offset_minutes,
                          m.topics());
    inputs.push_back({"topic_model", o.topic_model});
    inputs.push_back({"tokens", o.tokens});
  }
  ArtifactWriter w(ctx.store(), "report", inputs, ctx.recorded());
  write_aggregate_csvs(w, a);

  std::vector<std::string> dates;
  std::vector<double> counts;
  for (const auto& d : a.temporal.daily) {
    dates.push_back(format_date(d.date));
    counts.push_back(static_cast<double>(d.count));
  }
  w.write("daily.svg", line_chart_svg("Tweets per day (" + city.key + ")", dates, counts));
  std::vector<std::string> wd(std::begin(kWeekdayNames), std::end(kWeekdayNames));
  w.write("weekday.svg", box_plot_svg("Tweets per day by weekday", wd,
                                      std::vector<FiveNumberSummary>(a.temporal.weekday.begin(), a.temporal.weekday.end())));
  std::vector<std::string> hours;
  for (int h = 0; h < 24; ++h) hours.push_back(std::to_string(h));
  w.write("hour.svg", box_plot_svg("Tweets per hour of day", hours,
                                   std::vector<FiveNumberSummary>(a.temporal.hour.begin(), a.temporal.hour.end())));
  w.write("users.svg", scatter_svg("Users by number of tweets", "log10 tweets per user", "log10 users", a.users.log_log));
  if (!o.topic_model.empty()) {
    std::vector<std::string> rows;
    std::vector<std::vector<double>> values;
    for (std::size_t k = 0; k < heat.size(); ++k) {
      rows.push_back("topic " + std::to_string(k));
      values.emplace_back(heat[k].begin(), heat[k].end());
    }
    w.write("topic_weekday.csv", weekday_csv(heat));
    w.write("topics.svg", heatmap_svg("Topic share by weekday", rows, wd, values));
  }
  finish(ctx, w);
}

// ---------------------------------------------------------------------------

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string city, store;
  std::vector<std::string> sets;
};

void build_config(Context& ctx, const Globals& g, const std::vector<std::pair<std::string, json>>& overrides) {
  if (!g.config.empty()) ctx.config.merge_file(g.config);
  if (const char* env = std::getenv(kStoreEnv); env && *env) ctx.config.set_json("store.dir", env);
  for (const auto& s : g.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::kConfigError, "--set expects key=value, got '" + s + "'");
    ctx.config.set(s.substr(0, eq), std::string_view(s).substr(eq + 1));
  }
  if (g.seed) ctx.config.set_json("seed", *g.seed);
  if (!g.city.empty()) ctx.config.set_json("city", g.city);
  if (!g.store.empty()) ctx.config.set_json("store.dir", g.store);
  for (const auto& [k, v] : overrides) ctx.config.set_json(k, v);
  ctx.config.validate();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"citypulse: geo-located tweet mining pipeline", "citypulse"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "key = value config file");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--city", g.city, "city key (rio, sao_paulo, new_york, london, melbourne or one from --config)");
  app.add_option("--store", g.store, std::string("artifact root (default: $") + kStoreEnv + " or store.dir)");
  app.add_option("--set", g.sets, "override one config key, key=value")->take_all();

  // Per-command flags that shadow config keys.
  std::vector<std::pair<std::string, json>> overrides;
  auto shadow_str = [&](CLI::App* sc, const std::string& flag, const std::string& key, const std::string& help) {
    sc->add_option_function<std::string>(flag, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); },
                                         help + " (" + key + ")");
  };
  auto shadow_size = [&](CLI::App* sc, const std::string& flag, const std::string& key, const std::string& help) {
    sc->add_option_function<std::uint64_t>(
        flag, [&overrides, key](const std::uint64_t& v) { overrides.emplace_back(key, v); }, help + " (" + key + ")");
  };

  SynthOpts synth;
  auto* c_synth = app.add_subcommand("synth", "generate a ledgered synthetic corpus");
  c_synth->add_option("--kind", synth.kind, "fixture, topics or activity")->capture_default_str();
  c_synth->add_option("--topics", synth.topics, "planted topics (kind=topics)")->capture_default_str();
  c_synth->add_option("--docs", synth.docs, "documents (kind=topics)")->capture_default_str();
  c_synth->add_option("--doc-length", synth.doc_length, "tokens per document (kind=topics)")->capture_default_str();
  c_synth->add_option_function<double>(
      "--shrink", [&](const double& v) { overrides.emplace_back("synth.shrink", v); },
      "divide the classification counts by this factor (synth.shrink)");

  FilterOpts filter;
  auto* c_filter = app.add_subcommand("filter", "keep records inside the city box");
  c_filter->add_option("--input,-i", filter.input, "tweet NDJSON, - for stdin")->required();
  c_filter->add_flag("--candidates", filter.candidates, "also list travel-term matches of accepted records");

  std::string pre_input;
  auto* c_pre = app.add_subcommand("preprocess", "tokenize and normalize tweet text");
  c_pre->add_option("--input,-i", pre_input, "tweet NDJSON or token docs")->required();
  shadow_str(c_pre, "--preset", "preprocess.preset", "topic or travel");

  VocabOpts vocab;
  auto* c_vocab = app.add_subcommand("vocab", "build a vocabulary from token docs");
  c_vocab->add_option("--tokens,-t", vocab.tokens, "token docs")->required();
  c_vocab->add_option("--profile", vocab.profile, "bow, lda or embed")->capture_default_str();
  c_vocab->add_option("--labels", vocab.labels, "restrict to labeled training documents");

  EmbedOpts embed;
  auto* c_embed = app.add_subcommand("train-embeddings", "train skip-gram or PV-DBOW embeddings");
  c_embed->add_option("--tokens,-t", embed.tokens, "token docs")->required();
  c_embed->add_option("--vocab", embed.vocab, "vocabulary (default: built with vocab.embed.*)");
  shadow_str(c_embed, "--method", "embed.method", "skipgram or pvdbow");
  shadow_size(c_embed, "--dim", "embed.dim", "vector size");
  shadow_size(c_embed, "--epochs", "embed.epochs", "training epochs");

  LdaOpts lda;
  auto* c_lda = app.add_subcommand("train-lda", "train an LDA topic model");
  c_lda->add_option("--tokens,-t", lda.tokens, "token docs")->required();
  c_lda->add_option("--vocab", lda.vocab, "vocabulary")->required();
  shadow_size(c_lda, "--topics", "lda.topics", "number of topics");
  shadow_size(c_lda, "--iterations", "lda.iterations", "Gibbs sweeps");

  auto* c_topics = app.add_subcommand("topics", "top words, document topics and weekday activity");
  c_topics->add_option("--model,-m", lda.model, "model.cplda")->required();
  c_topics->add_option("--tokens,-t", lda.tokens, "token docs the model was trained on");
  c_topics->add_option("--input,-i", lda.input, "tweet NDJSON for weekday activity");
  shadow_size(c_topics, "--top", "lda.top_words", "words per topic");

  auto* c_label = app.add_subcommand("label", "aggregate documents by topic label");
  c_label->add_option("--model,-m", lda.model, "model.cplda")->required();
  c_label->add_option("--tokens,-t", lda.tokens, "token docs the model was trained on")->required();
  c_label->add_option("--map", lda.map, "label map JSON")->required();

  ClassOpts cls;
  auto add_features = [&](CLI::App* sc) {
    sc->add_option("--tokens,-t", cls.tokens, "token docs")->required();
    sc->add_option("--vocab", cls.vocab, "bag-of-words vocabulary");
    sc->add_option("--embeddings", cls.embeddings, "embeddings.cpemb");
  };
  auto* c_train = app.add_subcommand("train-classifier", "train a travel-message classifier");
  add_features(c_train);
  c_train->add_option("--labels,-l", cls.labels, "labels CSV")->required();
  c_train->add_option("--split", cls.split, "rows to train on: train (default), test or all");
  shadow_str(c_train, "--features", "classifier.features", "bow, boe or bow+boe");
  shadow_str(c_train, "--model-type", "classifier.model", "svm, lr or rf");

  auto* c_eval = app.add_subcommand("evaluate", "score a model, a score file, or run k-fold CV");
  c_eval->add_option("--tokens,-t", cls.tokens, "token docs");
  c_eval->add_option("--vocab", cls.vocab, "bag-of-words vocabulary");
  c_eval->add_option("--embeddings", cls.embeddings, "embeddings.cpemb");
  c_eval->add_option("--labels,-l", cls.labels, "labels CSV")->required();
  c_eval->add_option("--model,-m", cls.model, "classifier file from train-classifier");
  c_eval->add_option("--scores", cls.scores, "CSV id,score to evaluate directly");
  c_eval->add_option("--threshold", cls.threshold, "positive iff score > threshold (with --scores)");
  c_eval->add_flag("--cv", cls.cv, "k-fold cross-validation over labeled rows");
  c_eval->add_option("--split", cls.split, "rows to evaluate: test (default with --model), train or all");
  shadow_str(c_eval, "--features", "classifier.features", "bow, boe or bow+boe (with --cv)");
  shadow_str(c_eval, "--model-type", "classifier.model", "svm, lr or rf (with --cv)");
  shadow_size(c_eval, "--folds", "eval.folds", "folds (with --cv)");

  auto* c_logo = app.add_subcommand("logo", "leave-one-group-out over travel modes");
  add_features(c_logo);
  c_logo->add_option("--labels,-l", cls.labels, "labels CSV")->required();
  c_logo->add_option("--split", cls.split, "rows to use (default all)");
  shadow_str(c_logo, "--features", "classifier.features", "bow, boe or bow+boe");
  shadow_str(c_logo, "--model-type", "classifier.model", "svm, lr or rf");
  shadow_size(c_logo, "--test-negatives", "logo.test_negatives", "negatives held out for every fold");

  auto* c_predict = app.add_subcommand("predict", "score token docs with a stored classifier");
  add_features(c_predict);
  c_predict->add_option("--model,-m", cls.model, "classifier file")->required();

  AggregateOpts agg;
  auto* c_agg = app.add_subcommand("aggregate", "temporal, user and metadata statistics");
  c_agg->add_option("--input,-i", agg.input, "tweet NDJSON")->required();

  auto* c_report = app.add_subcommand("report", "aggregate CSVs plus SVG charts");
  c_report->add_option("--input,-i", agg.input, "tweet NDJSON")->required();
  c_report->add_option("--topic-model", agg.topic_model, "model.cplda for the topic heatmap");
  c_report->add_option("--tokens,-t", agg.tokens, "token docs the topic model was trained on");

  std::vector<const char*> argv = {"citypulse"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (auto& ch : msg) ch = ch == '\n' ? ' ' : ch;
    err << "error: InvalidArgument: " << msg << '\n';
    return 2;
  }

  Context ctx;
  ctx.out = &out;
  try {
    build_config(ctx, g, overrides);
    if (*c_synth) cmd_synth(ctx, synth);
    else if (*c_filter) cmd_filter(ctx, filter);
    else if (*c_pre) cmd_preprocess(ctx, pre_input);
    else if (*c_vocab) cmd_vocab(ctx, vocab);
    else if (*c_embed) cmd_train_embeddings(ctx, embed);
    else if (*c_lda) cmd_train_lda(ctx, lda);
    else if (*c_topics) cmd_topics(ctx, lda);
    else if (*c_label) cmd_label(ctx, lda);
    else if (*c_train) cmd_train_classifier(ctx, cls);
    else if (*c_eval) cmd_evaluate(ctx, cls);
    else if (*c_logo) cmd_logo(ctx, cls);
    else if (*c_predict) cmd_predict(ctx, cls);
    else if (*c_agg) cmd_aggregate(ctx, agg);
    else if (*c_report) cmd_report(ctx, agg);
  } catch (const Error& e) {
    err << "error: " << e.kind_name() << ": " << e.what() << '\n';
    return 1;
  } catch (const json::exception& e) {
    err << "error: MalformedJson: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: IoError: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: Internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace citypulse
