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

#include "citypulse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "citypulse/error.hpp"
#include "citypulse/rng.hpp"

namespace citypulse {

using nlohmann::json;
using namespace std::chrono;

namespace {

constexpr std::string_view kConsonants = "bdfgklmnprtvz";
constexpr std::string_view kVowels = "aeiou";

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t stream) { return Rng(seed).split(stream).next(); }

std::string join(const std::vector<std::string>& tokens) {
  std::string s;
  for (const auto& t : tokens) {
    if (!s.empty()) s += ' ';
    s += t;
  }
  return s;
}

template <class T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[rng.below(v.size())];
}

// `n` distinct entries of `pool` (all of them if n >= size), in draw order.
std::vector<std::string> pick_distinct(const std::vector<std::string>& pool, std::size_t n, Rng& rng) {
  std::vector<std::string> copy = pool;
  rng.shuffle(copy);
  copy.resize(std::min(n, copy.size()));
  return copy;
}

// Cumulative weights for repeated categorical draws.
class Sampler {
 public:
  explicit Sampler(std::span<const double> weights) {
    double acc = 0.0;
    for (double w : weights) cdf_.push_back(acc += w);
  }
  std::size_t draw(Rng& rng) const {
    const double u = rng.uniform() * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<std::size_t>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
};

TweetRecord base_record(std::uint64_t id, std::string text, const std::string& lang, std::size_t index) {
  TweetRecord r;
  r.id = std::to_string(id);
  r.text = std::move(text);
  r.lang = lang;
  r.created_at_utc = sys_days{year{2018} / 10 / 1} + hours{12} + seconds{static_cast<std::int64_t>(index)};
  r.user_id = "u0";
  return r;
}

std::string base62(std::uint64_t x, std::size_t len) {
  static constexpr std::string_view digits = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";
  std::string s;
  for (std::size_t i = 0; i < len; ++i) {
    s += digits[x % 62];
    x /= 62;
  }
  return s;
}

// Draws entity counts and appends matching surface tokens to the text.
EntityCounts draw_entities(const std::array<double, 4>& rates, std::size_t users, Rng& rng, std::string& text) {
  EntityCounts e;
  auto count = [&](double p) { return rng.bernoulli(p) ? static_cast<std::uint32_t>(1 + rng.below(2)) : 0u; };
  e.hashtags = count(rates[0]);
  e.user_mentions = count(rates[1]);
  e.urls = count(rates[2]);
  e.media = count(rates[3]);
  for (std::uint32_t i = 0; i < e.hashtags; ++i) text += " #" + pseudo_word(rng.below(50));
  for (std::uint32_t i = 0; i < e.user_mentions; ++i) text += " @user" + std::to_string(rng.below(users));
  for (std::uint32_t i = 0; i < e.urls; ++i) text += " https://t.co/" + base62(rng.next(), 10);
  return e;
}

int iso_weekday(sys_days d) { return static_cast<int>(weekday(d).iso_encoding()) - 1; }

std::vector<double> zipf_weights(std::size_t n, double s) {
  std::vector<double> w(n);
  for (std::size_t r = 0; r < n; ++r) w[r] = std::pow(static_cast<double>(r + 1), -s);
  return w;
}

GeoPoint inside_point(const GeoBox& box, Rng& rng) {
  return GeoPoint(rng.uniform(box.sw().lat(), box.ne().lat()), rng.uniform(box.sw().lon(), box.ne().lon()));
}

// A point in the frame one box-size wide around the box, never inside it.
GeoPoint outside_point(const GeoBox& box, Rng& rng) {
  const double h = std::max(box.ne().lat() - box.sw().lat(), 0.01);
  const double w = std::max(box.ne().lon() - box.sw().lon(), 0.01);
  const double lat0 = std::max(-90.0, box.sw().lat() - h), lat1 = std::min(90.0, box.ne().lat() + h);
  const double lon0 = std::max(-180.0, box.sw().lon() - w), lon1 = std::min(180.0, box.ne().lon() + w);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const GeoPoint p(rng.uniform(lat0, lat1), rng.uniform(lon0, lon1));
    if (!contains(box, p)) return p;
  }
  throw Error(ErrorKind::kInvalidArgument, "city box leaves no room for outside records");
}

GeoBox inside_box(const GeoBox& city, Rng& rng) {
  const GeoPoint a = inside_point(city, rng), b = inside_point(city, rng);
  return GeoBox(GeoPoint(std::min(a.lat(), b.lat()), std::min(a.lon(), b.lon())),
                GeoPoint(std::max(a.lat(), b.lat()), std::max(a.lon(), b.lon())));
}

GeoBox outside_box(const GeoBox& city, Rng& rng) {
  const double h = city.ne().lat() - city.sw().lat();
  const double w = city.ne().lon() - city.sw().lon();
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const GeoPoint p = outside_point(city, rng);
    const double lat1 = std::min(90.0, p.lat() + h * rng.uniform(0.02, 0.1));
    const double lon1 = std::min(180.0, p.lon() + w * rng.uniform(0.02, 0.1));
    const GeoBox b(p, GeoPoint(lat1, lon1));
    if (!overlaps(b, city)) return b;
  }
  throw Error(ErrorKind::kInvalidArgument, "city box leaves no room for outside places");
}

std::string format_local(Timestamp t) {
  const auto day = floor<days>(t);
  const hh_mm_ss hms(t - day);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02d", format_date(day).c_str(), static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()), static_cast<int>(hms.seconds().count()));
  return buf;
}

Timestamp parse_local(const std::string& s) {
  int y, mo, d, h, mi, se;
  char tail;
  if (std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%d%c", &y, &mo, &d, &h, &mi, &se, &tail) != 6) {
    throw Error(ErrorKind::kFormatError, "bad ledger local_time '" + s + "'");
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw Error(ErrorKind::kFormatError, "bad ledger date '" + s + "'");
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{se};
}

GeoTagKind parse_geotag(const std::string& name) {
  for (GeoTagKind k : {GeoTagKind::kPreciseCoordinate, GeoTagKind::kDegeneratePlaceBox, GeoTagKind::kVariablePlaceBox,
                       GeoTagKind::kUntagged}) {
    if (geotag_kind_name(k) == name) return k;
  }
  throw Error(ErrorKind::kFormatError, "unknown geotag kind '" + name + "'");
}

}  // namespace

std::string pseudo_word(std::size_t index) {
  const std::size_t per = kConsonants.size() * kVowels.size();
  std::string s;
  std::size_t x = index;
  std::array<std::size_t, 3> syl{};
  for (auto& v : syl) {
    v = x % per;
    x /= per;
  }
  for (std::size_t i = 3; i-- > 0;) {
    s += kConsonants[syl[i] / kVowels.size()];
    s += kVowels[syl[i] % kVowels.size()];
  }
  return s;
}

std::vector<PlantedTopicSpec> planted_topics(std::size_t topics, std::size_t terms_per_topic, double decay) {
  std::vector<PlantedTopicSpec> out;
  for (std::size_t k = 0; k < topics; ++k) {
    PlantedTopicSpec s;
    s.id = static_cast<std::uint32_t>(k);
    double total = 0.0;
    for (std::size_t r = 0; r < terms_per_topic; ++r) {
      // Spread indices so neighbouring topics do not share syllable patterns.
      s.terms.push_back(pseudo_word(1000 + 7919 * (k * terms_per_topic + r) % 200000));
      s.weights.push_back(std::pow(static_cast<double>(r + 1), -decay));
      total += s.weights.back();
    }
    for (auto& w : s.weights) w /= total;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<PlantedModeSpec> default_modes() {
  return {
      {"bike", {"bicicleta", "bike"}, {"bici"}, {"ciclovia", "pedal", "capacete", "selim", "corrente"}},
      {"bus", {"onibus", "ônibus"}, {"busao"}, {"motorista", "catraca", "cobrador", "linha", "parada"}},
      {"car", {"carro"}, {"automovel"}, {"estacionamento", "gasolina", "volante", "garagem", "pneu"}},
      {"taxi", {"taxi", "táxi"}, {"uber"}, {"corrida", "taximetro", "bandeirada", "taxista", "aplicativo"}},
      {"train", {"metro", "metrô", "trem"}, {"vlt"}, {"estação", "plataforma", "vagão", "trilho", "baldeação"}},
      {"walk", {"caminhar"}, {"andando"}, {"calçada", "pedestre", "passos", "faixa", "tênis"}},
  };
}

std::vector<std::vector<std::string>> default_negative_topics() {
  return {
      {"futebol", "jogo", "gol", "time", "torcida", "campeonato", "juiz", "estádio"},
      {"comida", "pizza", "almoço", "jantar", "fome", "hamburguer", "sobremesa", "churrasco"},
      {"música", "show", "banda", "cantar", "álbum", "festival", "guitarra", "playlist"},
      {"chuva", "calor", "sol", "frio", "temperatura", "nublado", "verão", "praia"},
      {"escola", "prova", "aula", "estudar", "professor", "faculdade", "matéria", "férias"},
      {"filme", "série", "netflix", "episódio", "cinema", "temporada", "ator", "novela"},
      {"amor", "saudade", "namorada", "beijo", "coração", "paixão", "abraço", "amigos"},
  };
}

std::vector<std::string> default_shared_travel_words() {
  return {"atrasado", "lotado", "trânsito", "engarrafamento", "demora", "esperando", "parado", "indo", "voltando",
          "caminho", "trajeto", "viagem"};
}

std::vector<std::string> default_filler_words() {
  return {"hoje", "dia", "gente", "cara", "vida", "semana", "manhã", "noite", "tarde", "cedo", "sempre", "demais",
          "rua", "cidade", "centro", "casa"};
}

// ---------------------------------------------------------------------------
// Ledger

const LedgerEntry* SynthLedger::find(const std::string& id) const {
  for (const auto& e : entries) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

json SynthLedger::to_json() const {
  json arr = json::array();
  for (const auto& e : entries) {
    json j{{"id", e.id}};
    if (e.topic) j["topic"] = *e.topic;
    if (!e.modes.empty()) j["modes"] = e.modes;
    if (!e.split.empty()) j["split"] = e.split;
    if (e.geotag) j["geotag"] = geotag_kind_name(*e.geotag);
    if (e.inside) j["inside"] = *e.inside;
    if (!e.user_id.empty()) j["user"] = e.user_id;
    if (e.local_time) j["local_time"] = format_local(*e.local_time);
    j["entities"] = json::array({e.entities.hashtags, e.entities.user_mentions, e.entities.urls, e.entities.media});
    arr.push_back(std::move(j));
  }
  return json{{"format", "citypulse-ledger-1"}, {"records", std::move(arr)}};
}

SynthLedger SynthLedger::from_json(const json& j) {
  SynthLedger l;
  try {
    for (const auto& r : j.at("records")) {
      LedgerEntry e;
      e.id = r.at("id").get<std::string>();
      if (r.contains("topic")) e.topic = r.at("topic").get<std::uint32_t>();
      if (r.contains("modes")) e.modes = r.at("modes").get<std::vector<std::string>>();
      e.split = r.value("split", "");
      if (r.contains("geotag")) e.geotag = parse_geotag(r.at("geotag").get<std::string>());
      if (r.contains("inside")) e.inside = r.at("inside").get<bool>();
      e.user_id = r.value("user", "");
      if (r.contains("local_time")) e.local_time = parse_local(r.at("local_time").get<std::string>());
      const auto ent = r.at("entities").get<std::array<std::uint32_t, 4>>();
      e.entities = {ent[0], ent[1], ent[2], ent[3]};
      l.entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormatError, std::string("bad ledger: ") + e.what());
  }
  return l;
}

void SynthCorpus::append(SynthCorpus other) {
  std::move(other.records.begin(), other.records.end(), std::back_inserter(records));
  std::move(other.ledger.entries.begin(), other.ledger.entries.end(), std::back_inserter(ledger.entries));
}

// ---------------------------------------------------------------------------
// Topic corpus

SynthCorpus generate_topic_corpus(const std::vector<PlantedTopicSpec>& specs, std::size_t docs, std::size_t doc_length,
                                  std::uint64_t seed, const TopicCorpusOptions& options) {
  SynthCorpus out;
  if (docs == 0) return out;
  if (specs.empty()) throw Error(ErrorKind::kInvalidArgument, "topic corpus needs at least one topic");
  Rng rng(seed);
  std::vector<Sampler> samplers;
  for (const auto& s : specs) {
    if (s.terms.empty() || s.terms.size() != s.weights.size()) {
      throw Error(ErrorKind::kInvalidArgument, "topic spec terms and weights differ");
    }
    samplers.emplace_back(s.weights);
  }
  const std::vector<double> alpha(specs.size(), options.mixture_alpha);
  for (std::size_t d = 0; d < docs; ++d) {
    std::vector<double> theta(specs.size(), 0.0);
    if (options.mixture) {
      theta = rng.dirichlet(alpha);
    } else {
      theta[rng.below(specs.size())] = 1.0;
    }
    const Sampler mix(theta);
    const auto top = static_cast<std::size_t>(std::max_element(theta.begin(), theta.end()) - theta.begin());
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < doc_length; ++i) {
      const std::size_t k = options.mixture ? mix.draw(rng) : top;
      tokens.push_back(specs[k].terms[samplers[k].draw(rng)]);
    }
    TweetRecord r = base_record(options.id_base + d, join(tokens), options.lang, d);
    LedgerEntry e;
    e.id = r.id;
    e.topic = specs[top].id;
    e.user_id = r.user_id;
    out.records.push_back(std::move(r));
    out.ledger.entries.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classification corpus

ClassificationCounts ClassificationCounts::scaled(double factor) const {
  ClassificationCounts c;
  auto scale = [&](std::size_t n) { return static_cast<std::size_t>(std::llround(static_cast<double>(n) / factor)); };
  c.per_mode.clear();
  std::size_t sum = 0;
  for (const auto& [m, n] : per_mode) {
    c.per_mode.emplace_back(m, std::max<std::size_t>(1, scale(n)));
    sum += c.per_mode.back().second;
  }
  c.positives = std::clamp(scale(positives), (sum + 1) / 2, sum);
  c.negatives = scale(negatives);
  c.test_negatives = scale(test_negatives);
  return c;
}

namespace {

/// Half the negatives talk about one of the everyday topics, the other half
/// only in rare words.
std::vector<std::string> negative_words(const std::vector<std::vector<std::string>>& topics, std::size_t pool,
                                        Rng& rng) {
  const std::size_t n = 2 + rng.below(3);
  if (pool == 0 || rng.bernoulli(0.5)) return pick_distinct(pick(topics, rng), n, rng);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(pseudo_word(kTailWordBase + rng.below(pool)));
  return out;
}

}  // namespace

SynthCorpus generate_classification_corpus(const std::vector<PlantedModeSpec>& modes,
                                           const std::vector<std::vector<std::string>>& negative_topics,
                                           const ClassificationCounts& counts, std::uint64_t seed,
                                           const ClassificationOptions& options) {
  Rng rng(seed);
  std::vector<double> remaining;
  std::vector<const PlantedModeSpec*> specs;
  std::size_t sum = 0;
  for (const auto& [name, n] : counts.per_mode) {
    auto it = std::find_if(modes.begin(), modes.end(), [&](const PlantedModeSpec& m) { return m.name == name; });
    if (it == modes.end()) throw Error(ErrorKind::kUnknownMode, "no spec for travel mode '" + name + "'");
    if (it->core_terms.empty()) throw Error(ErrorKind::kInvalidArgument, "mode '" + name + "' has no core terms");
    specs.push_back(&*it);
    remaining.push_back(static_cast<double>(n));
    sum += n;
  }
  if (sum < counts.positives || sum > 2 * counts.positives) {
    throw Error(ErrorKind::kInvalidArgument, "per-mode counts (sum " + std::to_string(sum) +
                                                 ") cannot be spread over " + std::to_string(counts.positives) +
                                                 " positives with at most two modes each");
  }
  if (!negative_topics.empty() && std::any_of(negative_topics.begin(), negative_topics.end(),
                                              [](const auto& t) { return t.empty(); })) {
    throw Error(ErrorKind::kInvalidArgument, "empty negative topic");
  }
  if (negative_topics.empty() && counts.negatives + counts.test_negatives > 0) {
    throw Error(ErrorKind::kInvalidArgument, "negatives requested without negative topics");
  }

  // Two-mode documents first, drawn in proportion to what each mode has left.
  std::vector<std::vector<std::size_t>> plans;
  for (std::size_t i = 0; i < sum - counts.positives; ++i) {
    const std::size_t a = rng.categorical(remaining);
    remaining[a] -= 1.0;
    std::vector<double> others = remaining;
    others[a] = 0.0;
    if (std::accumulate(others.begin(), others.end(), 0.0) <= 0.0) {
      throw Error(ErrorKind::kInvalidArgument, "per-mode counts leave no partner mode for a two-mode document");
    }
    const std::size_t b = rng.categorical(others);
    remaining[b] -= 1.0;
    plans.push_back({std::min(a, b), std::max(a, b)});
  }
  for (std::size_t m = 0; m < remaining.size(); ++m) {
    for (std::size_t i = 0; i < static_cast<std::size_t>(remaining[m]); ++i) plans.push_back({m});
  }
  rng.shuffle(plans);
  const auto n_test = static_cast<std::size_t>(std::llround(options.holdout_fraction * static_cast<double>(plans.size())));

  struct Doc {
    std::vector<std::string> tokens;
    std::vector<std::string> modes;
    std::string split;
  };
  std::vector<Doc> docs;
  const auto fillers = default_filler_words();
  for (std::size_t p = 0; p < plans.size(); ++p) {
    Doc doc;
    doc.split = p < n_test ? "test" : "train";
    for (std::size_t m : plans[p]) {
      const PlantedModeSpec& spec = *specs[m];
      bool synonym = false;
      if (!spec.synonyms.empty()) {
        synonym = options.holdout_fraction > 0.0 ? doc.split == "test" : rng.bernoulli(options.synonym_rate);
      }
      doc.tokens.push_back(synonym ? pick(spec.synonyms, rng) : pick(spec.core_terms, rng));
      for (auto& c : pick_distinct(spec.contexts, 1 + rng.below(2), rng)) doc.tokens.push_back(std::move(c));
      doc.modes.push_back(spec.name);
    }
    for (std::uint64_t i = rng.below(3); i > 0; --i) doc.tokens.push_back(pick(fillers, rng));
    rng.shuffle(doc.tokens);
    docs.push_back(std::move(doc));
  }
  for (std::size_t n = 0; n < counts.negatives + counts.test_negatives; ++n) {
    Doc doc;
    doc.split = n < counts.negatives ? "train" : "test";
    doc.tokens = negative_words(negative_topics, options.negative_tail_words, rng);
    for (std::uint64_t i = rng.below(3); i > 0; --i) doc.tokens.push_back(pick(fillers, rng));
    if (!specs.empty() && rng.bernoulli(options.hard_negative_rate)) {
      doc.tokens.push_back(pick(specs[rng.below(specs.size())]->core_terms, rng));
    }
    rng.shuffle(doc.tokens);
    docs.push_back(std::move(doc));
  }
  rng.shuffle(docs);

  SynthCorpus out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    TweetRecord r = base_record(options.id_base + i, join(docs[i].tokens), options.lang, i);
    LedgerEntry e;
    e.id = r.id;
    e.modes = std::move(docs[i].modes);
    e.split = std::move(docs[i].split);
    e.user_id = r.user_id;
    out.records.push_back(std::move(r));
    out.ledger.entries.push_back(std::move(e));
  }
  return out;
}

SynthCorpus generate_embedding_corpus(const std::vector<PlantedModeSpec>& modes,
                                      const std::vector<std::vector<std::string>>& negative_topics, std::size_t docs,
                                      std::uint64_t seed, const EmbeddingCorpusOptions& options) {
  Rng rng(seed);
  const auto shared = default_shared_travel_words();
  const auto fillers = default_filler_words();
  SynthCorpus out;
  for (std::size_t d = 0; d < docs; ++d) {
    std::vector<std::string> tokens;
    LedgerEntry e;
    const bool travel = !modes.empty() && (negative_topics.empty() || rng.bernoulli(options.travel_fraction));
    if (travel) {
      const PlantedModeSpec& m = pick(modes, rng);
      const bool synonym = !m.synonyms.empty() && rng.bernoulli(0.5);
      tokens.push_back(synonym ? pick(m.synonyms, rng) : pick(m.core_terms, rng));
      for (auto& c : pick_distinct(m.contexts, 1 + rng.below(2), rng)) tokens.push_back(std::move(c));
      for (auto& c : pick_distinct(shared, 2, rng)) tokens.push_back(std::move(c));
      if (rng.bernoulli(0.5)) tokens.push_back(pick(fillers, rng));
      e.modes = {m.name};
    } else if (!negative_topics.empty()) {
      tokens = negative_words(negative_topics, options.negative_tail_words, rng);
      for (std::uint64_t i = rng.below(3); i > 0; --i) tokens.push_back(pick(fillers, rng));
    }
    rng.shuffle(tokens);
    TweetRecord r = base_record(options.id_base + d, join(tokens), options.lang, d);
    e.id = r.id;
    e.split = "unlabeled";
    e.user_id = r.user_id;
    out.records.push_back(std::move(r));
    out.ledger.entries.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Geo, time, users

void generate_geo(SynthCorpus& corpus, const GeoSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  if (spec.variable_places == 0 || spec.venues == 0) {
    throw Error(ErrorKind::kInvalidArgument, "place pools must be non-empty");
  }
  std::vector<PlaceTag> inside_places, outside_places, inside_venues, outside_venues;
  for (std::size_t i = 0; i < spec.variable_places; ++i) {
    inside_places.push_back({"Bairro " + std::to_string(i), inside_box(spec.city, rng)});
    outside_places.push_back({"Municipio " + std::to_string(i), outside_box(spec.city, rng)});
  }
  for (std::size_t i = 0; i < spec.venues; ++i) {
    const GeoPoint a = inside_point(spec.city, rng), b = outside_point(spec.city, rng);
    inside_venues.push_back({"Venue " + std::to_string(i), GeoBox(a, a)});
    outside_venues.push_back({"Venue " + std::to_string(spec.venues + i), GeoBox(b, b)});
  }
  const Sampler kinds(spec.kind_mix);
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    TweetRecord& r = corpus.records[i];
    LedgerEntry& e = corpus.ledger.entries[i];
    r.coordinate.reset();
    r.place.reset();
    const bool inside = rng.bernoulli(spec.inside_fraction);
    switch (kinds.draw(rng)) {
      case 0:
        r.coordinate = inside ? inside_point(spec.city, rng) : outside_point(spec.city, rng);
        e.geotag = GeoTagKind::kPreciseCoordinate;
        break;
      case 1:
        r.place = pick(inside ? inside_venues : outside_venues, rng);
        e.geotag = GeoTagKind::kDegeneratePlaceBox;
        break;
      default:
        r.place = pick(inside ? inside_places : outside_places, rng);
        e.geotag = GeoTagKind::kVariablePlaceBox;
    }
    e.inside = inside;
  }
}

namespace {

void stamp(TweetRecord& r, LedgerEntry& e, sys_days day, const ActivitySpec& spec, const Sampler& hours_of_day,
           const Sampler& users, Rng& rng) {
  const auto local = Timestamp{day} + hours{static_cast<int>(hours_of_day.draw(rng))} +
                     minutes{static_cast<int>(rng.below(60))} + seconds{static_cast<int>(rng.below(60))};
  r.created_at_utc = local - minutes{spec.utc_offset_minutes};
  r.user_id = "u" + std::to_string(users.draw(rng));
  r.entities = draw_entities(spec.entity_rates, spec.users, rng, r.text);
  e.local_time = local;
  e.user_id = r.user_id;
  e.entities = r.entities;
}

void check_activity(const ActivitySpec& spec) {
  if (spec.days == 0 || spec.users == 0) throw Error(ErrorKind::kInvalidArgument, "activity needs days and users");
}

}  // namespace

SynthCorpus generate_activity_corpus(const ActivitySpec& spec, std::uint64_t seed) {
  check_activity(spec);
  Rng rng(seed);
  const Sampler hours_of_day(spec.hour_weights);
  const auto zipf = zipf_weights(spec.users, spec.zipf_exponent);
  const Sampler users(zipf);
  const auto fillers = default_filler_words();
  SynthCorpus out;
  for (std::size_t d = 0; d < spec.days; ++d) {
    const sys_days day = spec.start + days{d};
    const std::uint64_t n = rng.poisson(spec.weekday_rates[iso_weekday(day)]);
    for (std::uint64_t j = 0; j < n; ++j) {
      std::vector<std::string> tokens;
      for (std::uint64_t k = 2 + rng.below(4); k > 0; --k) {
        tokens.push_back(rng.bernoulli(0.5) ? pick(fillers, rng) : pseudo_word(rng.below(300)));
      }
      const std::size_t index = out.records.size();
      TweetRecord r = base_record(400000 + index, join(tokens), "pt", index);
      LedgerEntry e;
      e.id = r.id;
      stamp(r, e, day, spec, hours_of_day, users, rng);
      out.records.push_back(std::move(r));
      out.ledger.entries.push_back(std::move(e));
    }
  }
  return out;
}

void assign_activity(SynthCorpus& corpus, const ActivitySpec& spec, std::uint64_t seed) {
  check_activity(spec);
  Rng rng(seed);
  const Sampler hours_of_day(spec.hour_weights);
  const auto zipf = zipf_weights(spec.users, spec.zipf_exponent);
  const Sampler users(zipf);
  std::vector<double> day_weights;
  for (std::size_t d = 0; d < spec.days; ++d) day_weights.push_back(spec.weekday_rates[iso_weekday(spec.start + days{d})]);
  const Sampler day_of(day_weights);
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    stamp(corpus.records[i], corpus.ledger.entries[i], spec.start + days{day_of.draw(rng)}, spec, hours_of_day, users,
          rng);
  }
}

SynthCorpus generate_fixture(const FixtureSpec& spec, std::uint64_t seed) {
  const auto modes = default_modes();
  const auto negatives = default_negative_topics();
  SynthCorpus corpus =
      generate_classification_corpus(modes, negatives, spec.counts, sub_seed(seed, 1), spec.classification);
  corpus.append(generate_embedding_corpus(modes, negatives, spec.embedding_docs, sub_seed(seed, 2)));
  generate_geo(corpus, spec.geo, sub_seed(seed, 3));
  assign_activity(corpus, spec.activity, sub_seed(seed, 4));
  return corpus;
}

void write_ndjson(std::ostream& out, const std::vector<TweetRecord>& records) {
  for (const auto& r : records) out << to_wire_json(r) << '\n';
  if (!out) throw Error(ErrorKind::kIoError, "failed writing NDJSON");
}

}  // namespace citypulse
