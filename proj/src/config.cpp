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

#include "citypulse/config.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "citypulse/error.hpp"
#include "citypulse/textprep.hpp"

namespace citypulse {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& m) { throw Error(ErrorKind::kConfigError, m); }

const std::set<std::string> kCityFields = {"sw", "ne", "utc_offset", "langs", "place_mode"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

json parse_value(std::string_view raw) {
  const std::string v = trim(raw);
  json j = json::parse(v, nullptr, false);
  if (j.is_discarded()) return json(v);
  return j;
}

struct BundledCity {
  const char* key;
  double sw_lat, sw_lon, ne_lat, ne_lon;
  int offset;
  const char* lang;
};

// Twitter default place boxes of the five study cities. Offsets are standard
// time; override utc_offset for a summer-time collection window.
constexpr BundledCity kBundledCities[] = {
    {"rio", -23.08302, -43.795449, -22.739823, -43.087707, -180, "pt"},
    {"sao_paulo", -24.008814, -46.826039, -23.356792, -46.365052, -180, "pt"},
    {"new_york", 40.495865, -74.255641, 40.91533, -73.699793, -300, "en"},
    {"london", 51.286702, -0.510365, 51.691824, 0.334043, 0, "en"},
    {"melbourne", -38.433859, 144.593742, -37.511274, 145.512529, 600, "en"},
};

std::string city_key(const std::string& key) {
  // city.<name>.<field>
  const auto first = key.find('.');
  const auto last = key.rfind('.');
  if (key.compare(0, 5, "city.") != 0 || first == last) return {};
  const std::string field = key.substr(last + 1);
  if (!kCityFields.count(field)) return {};
  return key.substr(first + 1, last - first - 1);
}

}  // namespace

GeoPoint parse_lat_lon(const json& j, std::string_view key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    config_error(std::string(key) + " must be [lat, lon]");
  }
  try {
    return GeoPoint(j[0].get<double>(), j[1].get<double>());
  } catch (const Error& e) {
    config_error(std::string(key) + ": " + e.what());
  }
}

RunConfig RunConfig::defaults() {
  RunConfig c;
  auto& v = c.values_;
  v["seed"] = 1;
  v["city"] = "rio";
  v["store.dir"] = "citypulse-store";
  v["filter.native_only"] = false;
  v["preprocess.preset"] = "topic";
  v["vocab.bow.min_count"] = 1;
  v["vocab.bow.max_df"] = 0.6;
  v["vocab.bow.max_size"] = 3000;
  v["vocab.lda.min_count"] = 10;
  v["vocab.lda.max_df"] = 0.4;
  v["vocab.lda.max_size"] = 10000;
  v["vocab.embed.min_count"] = 1;
  v["vocab.embed.max_df"] = 1.0;
  v["vocab.embed.max_size"] = 0;
  v["embed.method"] = "skipgram";
  v["embed.dim"] = 100;
  v["embed.window"] = 2;
  v["embed.epochs"] = 10;
  v["embed.negatives"] = 5;
  v["embed.learning_rate"] = 0.025;
  v["embed.subsample"] = false;
  v["lda.topics"] = 50;
  v["lda.iterations"] = 20;
  v["lda.alpha"] = nullptr;
  v["lda.beta"] = 0.01;
  v["lda.top_words"] = 10;
  v["classifier.model"] = "svm";
  v["classifier.features"] = "bow+boe";
  v["classifier.lambda"] = 1e-4;
  v["classifier.epochs"] = 50;
  v["classifier.eta0"] = 0.5;
  v["classifier.standardize"] = true;
  v["classifier.average"] = true;
  v["forest.trees"] = 100;
  v["forest.max_features"] = 0;
  v["forest.min_leaf"] = 1;
  v["forest.bootstrap"] = true;
  v["eval.folds"] = 10;
  v["eval.stratified"] = true;
  v["logo.test_negatives"] = 300;
  v["synth.shrink"] = 1.0;
  v["synth.holdout"] = 0.0;
  v["synth.embedding_docs"] = 6000;
  for (const auto& b : kBundledCities) {
    const std::string p = std::string("city.") + b.key + ".";
    v[p + "sw"] = json::array({b.sw_lat, b.sw_lon});
    v[p + "ne"] = json::array({b.ne_lat, b.ne_lon});
    v[p + "utc_offset"] = b.offset;
    v[p + "langs"] = json::array({b.lang});
    v[p + "place_mode"] = "containment";
  }
  return c;
}

void RunConfig::check_key(const std::string& key) const {
  if (values_.count(key) || !city_key(key).empty()) return;
  config_error("unknown config key '" + key + "'");
}

void RunConfig::set_json(const std::string& key, json value) {
  check_key(key);
  values_[key] = std::move(value);
}

void RunConfig::set(const std::string& key, std::string_view raw) { set_json(key, parse_value(raw)); }

void RunConfig::merge_text(std::string_view text, std::string_view origin) {
  std::istringstream in{std::string(text)};
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::string where = std::string(origin) + ":" + std::to_string(lineno) + ": ";
    if (t.front() == '[') {
      if (t.back() != ']') config_error(where + "unterminated section header");
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) config_error(where + "expected key = value");
    std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) config_error(where + "empty key");
    if (!section.empty()) key = section + "." + key;
    try {
      set(key, std::string_view(t).substr(eq + 1));
    } catch (const Error& e) {
      config_error(where + e.what());
    }
  }
}

void RunConfig::merge_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, "cannot read config file " + path);
  std::ostringstream s;
  s << in.rdbuf();
  merge_text(s.str(), path);
}

const json& RunConfig::at(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) config_error("missing config key '" + key + "'");
  return it->second;
}

std::string RunConfig::get_string(const std::string& key) const {
  const json& j = at(key);
  if (!j.is_string()) config_error(key + " must be a string");
  return j.get<std::string>();
}

double RunConfig::get_double(const std::string& key) const {
  const json& j = at(key);
  if (!j.is_number()) config_error(key + " must be a number");
  return j.get<double>();
}

std::int64_t RunConfig::get_int(const std::string& key) const {
  const json& j = at(key);
  if (!j.is_number_integer()) config_error(key + " must be an integer");
  return j.get<std::int64_t>();
}

std::uint64_t RunConfig::get_size(const std::string& key) const {
  const json& j = at(key);
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0) config_error(key + " must be a non-negative integer");
  return j.get<std::uint64_t>();
}

bool RunConfig::get_bool(const std::string& key) const {
  const json& j = at(key);
  if (!j.is_boolean()) config_error(key + " must be true or false");
  return j.get<bool>();
}

std::vector<std::string> RunConfig::cities() const {
  std::set<std::string> names;
  for (const auto& [k, v] : values_) {
    const std::string c = city_key(k);
    if (!c.empty()) names.insert(c);
  }
  return {names.begin(), names.end()};
}

CityConfig RunConfig::city(std::string_view key) const {
  const std::string p = "city." + std::string(key) + ".";
  if (!has(p + "sw") || !has(p + "ne")) config_error("unknown city '" + std::string(key) + "'");
  const GeoPoint sw = parse_lat_lon(at(p + "sw"), p + "sw");
  const GeoPoint ne = parse_lat_lon(at(p + "ne"), p + "ne");
  std::optional<GeoBox> box;
  try {
    box.emplace(sw, ne);
  } catch (const Error& e) {
    config_error(p + "sw/ne: " + e.what());
  }
  CityConfig c{std::string(key), *box, 0, {}, PlaceMode::kContainment};
  if (has(p + "utc_offset")) {
    const std::int64_t off = get_int(p + "utc_offset");
    if (off < -14 * 60 || off > 14 * 60) config_error(p + "utc_offset must lie in [-840, 840] minutes");
    c.utc_offset_minutes = static_cast<int>(off);
  }
  if (has(p + "langs")) {
    const json& l = at(p + "langs");
    if (!l.is_array()) config_error(p + "langs must be a list of language codes");
    for (const auto& x : l) {
      if (!x.is_string()) config_error(p + "langs must be a list of language codes");
      c.langs.push_back(x.get<std::string>());
    }
  }
  if (has(p + "place_mode")) {
    try {
      c.place_mode = parse_place_mode(get_string(p + "place_mode"));
    } catch (const Error& e) {
      config_error(p + "place_mode: " + e.what());
    }
  }
  return c;
}

VocabularyParams RunConfig::vocabulary(std::string_view profile) const {
  if (profile != "bow" && profile != "lda" && profile != "embed") {
    config_error("unknown vocabulary profile '" + std::string(profile) + "'");
  }
  const std::string p = "vocab." + std::string(profile) + ".";
  VocabularyParams v;
  v.min_count = get_size(p + "min_count");
  v.max_df_ratio = get_double(p + "max_df");
  if (!(v.max_df_ratio > 0.0 && v.max_df_ratio <= 1.0)) config_error(p + "max_df must lie in (0, 1]");
  const std::uint64_t size = get_size(p + "max_size");
  v.max_size = size == 0 ? std::numeric_limits<std::size_t>::max() : size;
  return v;
}

SkipgramConfig RunConfig::skipgram() const {
  SkipgramConfig s;
  s.dim = get_size("embed.dim");
  s.window = get_size("embed.window");
  s.epochs = get_size("embed.epochs");
  s.negatives = get_size("embed.negatives");
  s.learning_rate = get_double("embed.learning_rate");
  s.subsample = get_bool("embed.subsample");
  s.seed = seed();
  const std::string method = get_string("embed.method");
  if (method != "skipgram" && method != "pvdbow") config_error("embed.method must be skipgram or pvdbow");
  s.validate();
  return s;
}

LdaConfig RunConfig::lda() const {
  LdaConfig l;
  l.topics = get_size("lda.topics");
  l.iterations = get_size("lda.iterations");
  if (!at("lda.alpha").is_null()) l.alpha = get_double("lda.alpha");
  l.beta = get_double("lda.beta");
  l.seed = seed();
  l.validate();
  return l;
}

LinearConfig RunConfig::linear() const {
  LinearConfig l;
  const std::string model = get_string("classifier.model");
  l.loss = parse_loss_kind(model == "rf" ? "svm" : model);
  l.lambda = get_double("classifier.lambda");
  l.epochs = get_size("classifier.epochs");
  l.eta0 = get_double("classifier.eta0");
  l.standardize_dense = get_bool("classifier.standardize");
  l.average = get_bool("classifier.average");
  l.seed = seed();
  l.validate();
  return l;
}

ForestConfig RunConfig::forest() const {
  ForestConfig f;
  f.trees = get_size("forest.trees");
  f.max_features = get_size("forest.max_features");
  f.min_leaf = get_size("forest.min_leaf");
  f.bootstrap = get_bool("forest.bootstrap");
  f.seed = seed();
  f.validate();
  return f;
}

void RunConfig::validate() const {
  for (const auto& c : cities()) city(c);
  current_city();
  get_size("seed");
  get_string("store.dir");
  get_bool("filter.native_only");
  PipelineConfig::preset(get_string("preprocess.preset"), "en");
  for (const char* p : {"bow", "lda", "embed"}) vocabulary(p);
  skipgram();
  lda();
  get_size("lda.top_words");
  linear();
  forest();
  const std::string features = get_string("classifier.features");
  if (features != "bow" && features != "boe" && features != "bow+boe") {
    config_error("classifier.features must be bow, boe or bow+boe");
  }
  if (get_size("eval.folds") < 2) config_error("eval.folds must be >= 2");
  get_bool("eval.stratified");
  get_size("logo.test_negatives");
  if (!(get_double("synth.shrink") >= 1.0)) config_error("synth.shrink must be >= 1");
  const double h = get_double("synth.holdout");
  if (!(h >= 0.0 && h < 1.0)) config_error("synth.holdout must lie in [0, 1)");
  get_size("synth.embedding_docs");
}

json RunConfig::to_json() const {
  json j = json::object();
  for (const auto& [k, v] : values_) j[k] = v;
  return j;
}

}  // namespace citypulse
