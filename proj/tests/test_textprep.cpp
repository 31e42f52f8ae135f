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

#include <functional>
#include <set>

#include "citypulse/error.hpp"
#include "citypulse/rng.hpp"
#include "citypulse/textprep.hpp"
#include "doctest.h"
#include "golden.hpp"

using namespace citypulse;

namespace {

std::vector<std::string> surfaces(const Tokens& ts) {
  std::vector<std::string> out;
  for (const auto& t : ts) out.push_back(t.surface);
  return out;
}

Tokens words(std::initializer_list<const char*> ws) {
  Tokens out;
  for (const char* w : ws) out.push_back({w, TokenKind::kWord});
  return out;
}

const std::vector<std::string> kPieces = {
    "a",  "b",  "o",    "s",     "e",   "L",   "O",   "é",   "ã",    "õ",   "ç",  "Ô",     "1",       "2",  "x",
    "z",  "ch", "es",   "ies",   "ões", "ais", "ns",  "res", "!",    "?",   ".",  "...",   ":)",      ":-(", "XD",
    "<3", "@",  "@ana", "#rio",  "#",   "'",   "-",   " ",   " ",    " ",   "  ", "https://t.co/Ab", "😀", "kkk",
    "aff", "lol", "ss", "us",   "the", "os",  "de",  "😀",  "\t",   "=D",  "oooo"};

std::string random_text(Rng& rng) {
  std::string s;
  const auto n = rng.below(25);
  for (std::uint64_t i = 0; i < n; ++i) s += kPieces[rng.below(kPieces.size())];
  return s;
}

std::string strip_ws(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c != ' ' && c != '\t' && c != '\n') out.push_back(c);
  }
  return out;
}

}  // namespace

TEST_CASE("tokenize examples") {
  const Tokens a = tokenize("ride the bus :-)");
  REQUIRE(a.size() == 4);
  CHECK(a[3] == Token{":-)", TokenKind::kEmoticon});
  const Tokens b = tokenize("@joao #rio https://t.co/x");
  CHECK(b == Tokens{{"@joao", TokenKind::kMention}, {"#rio", TokenKind::kHashtag}, {"https://t.co/x", TokenKind::kUrl}});
  const Tokens c = tokenize("wow...!!");
  CHECK(c == Tokens{{"wow", TokenKind::kWord}, {"...", TokenKind::kPunct}, {"!!", TokenKind::kPunct}});
}

TEST_CASE("bundled emoticon grammar is sizeable") { CHECK(EmoticonGrammar::bundled().size() >= 70); }

TEST_CASE("single steps") {
  CHECK(surfaces(lowercase(words({"London"}))) == std::vector<std::string>{"london"});
  CHECK(surfaces(lowercase(words({"é"}))) == std::vector<std::string>{"é"});
  CHECK(surfaces(squeeze_repeats(lowercase(words({"LOOOOL"})))) == std::vector<std::string>{"loool"});
  CHECK(surfaces(lowercase(Tokens{{"https://T.co/X", TokenKind::kUrl}})) == std::vector<std::string>{"https://T.co/X"});
  CHECK(squeeze_repeats(std::string_view("loooool")) == "loool");
  CHECK(squeeze_repeats(std::string_view("aaa")) == "aaa");
  CHECK(squeeze_repeats(std::string_view("loooolooool")) == "loooloool");

  CHECK(surfaces(strip_punctuation({{"wow", TokenKind::kWord}, {"!!", TokenKind::kPunct}, {":-)", TokenKind::kEmoticon}})) ==
        std::vector<std::string>{"wow"});
  CHECK(surfaces(strip_punctuation(tokenize("don't"))) == std::vector<std::string>{"don't"});
  CHECK(strip_punctuation(tokenize("...")).empty());

  CHECK(surfaces(strip_entities_and_digits(tokenize("@joao check https://t.co/x #rio 123"))) ==
        std::vector<std::string>{"check"});
  CHECK(strip_entities_and_digits(tokenize("bus2work")).empty());
  CHECK(surfaces(strip_entities_and_digits(tokenize("bus"))) == std::vector<std::string>{"bus"});
}

TEST_CASE("stopword and short word removal") {
  PipelineConfig cfg;
  cfg.stopwords = {"o", "é"};
  CHECK(surfaces(remove_stopwords_and_short(words({"o", "carro", "é", "bom"}), cfg)) ==
        std::vector<std::string>{"carro", "bom"});
  cfg.stopwords.clear();
  cfg.short_words = {"kkk", "aff"};
  CHECK(surfaces(remove_stopwords_and_short(words({"kkk", "top"}), cfg)) == std::vector<std::string>{"top"});
  CHECK(surfaces(remove_stopwords_and_short(words({"KKK", "Aff"}), cfg)).empty());
  CHECK(remove_stopwords_and_short({}, cfg).empty());
}

TEST_CASE("plural lemmatization") {
  const PluralRules& en = PluralRules::bundled("en");
  const PluralRules& pt = PluralRules::bundled("pt");
  CHECK(en.singular("cars") == "car");
  CHECK(en.singular("bus") == "bus");
  CHECK(pt.singular("estações") == "estação");
  CHECK(pt.singular("ônibus") == "ônibus");
  CHECK(PluralRules::bundled("fr").singular("voitures") == "voitures");
}

TEST_CASE("presets on the documented examples") {
  PipelineConfig topic = PipelineConfig::preset("topic", "pt");
  topic.stopwords = {"os"};
  topic.short_words.clear();
  CHECK(run_pipeline("Os carros!!! loooool @x", topic).tokens == std::vector<std::string>{"carro", "loool"});

  PipelineConfig travel = PipelineConfig::preset("travel", "en");
  travel.stopwords = {"my", "is"};
  CHECK(run_pipeline("My bus is delayed.", travel).tokens == std::vector<std::string>{"bus", "delayed"});

  CHECK(run_pipeline("", topic).tokens.empty());
}

TEST_CASE("unknown steps and presets are rejected") {
  CHECK_THROWS_AS(parse_step("stem"), Error);
  try {
    PipelineConfig::preset("sentiment", "en");
    FAIL("expected UnknownStep");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kUnknownStep);
  }
  PipelineConfig bad = PipelineConfig::preset("topic", "en");
  bad.steps = {Step::kStripPunctuation, Step::kTokenize};
  CHECK_THROWS_AS(run_pipeline("x", bad), Error);
}

TEST_CASE("golden fixture") {
  const auto cases = testing::load_golden(CITYPULSE_FIXTURE_DIR "/preprocess_golden.tsv");
  REQUIRE(cases.size() >= 60);
  for (const auto& c : cases) {
    INFO("line " << c.line << ": " << c.input);
    CHECK(testing::run_golden(c) == c.expected);
  }
}

TEST_CASE("tokenize keeps every non-whitespace character") {
  Rng rng(41);
  for (int i = 0; i < 2000; ++i) {
    const std::string text = random_text(rng);
    std::string joined;
    for (const auto& t : tokenize(text)) {
      CHECK_FALSE(t.surface.empty());
      joined += t.surface;
      joined += ' ';
    }
    CHECK(strip_ws(joined) == strip_ws(text));
  }
}

TEST_CASE("every step is idempotent") {
  Rng rng(43);
  const PipelineConfig cfg = PipelineConfig::preset("topic", "pt");
  const PluralRules& en = PluralRules::bundled("en");
  const PluralRules& pt = PluralRules::bundled("pt");
  const std::vector<std::pair<const char*, std::function<Tokens(Tokens)>>> steps = {
      {"lowercase", [](Tokens t) { return lowercase(std::move(t)); }},
      {"squeeze", [](Tokens t) { return squeeze_repeats(std::move(t)); }},
      {"punct", [](Tokens t) { return strip_punctuation(std::move(t)); }},
      {"entities", [](Tokens t) { return strip_entities_and_digits(std::move(t)); }},
      {"stop", [&](Tokens t) { return remove_stopwords_and_short(std::move(t), cfg); }},
      {"plural-en", [&](Tokens t) { return lemmatize_plurals(std::move(t), en); }},
      {"plural-pt", [&](Tokens t) { return lemmatize_plurals(std::move(t), pt); }},
  };
  for (int i = 0; i < 1500; ++i) {
    const Tokens tokens = tokenize(random_text(rng));
    for (const auto& [name, fn] : steps) {
      INFO(name);
      const Tokens once = fn(tokens);
      CHECK(fn(once) == once);
    }
  }
}

TEST_CASE("pipeline output is a fixed point of its steps") {
  Rng rng(47);
  for (const char* preset : {"topic", "travel"}) {
    const PipelineConfig cfg = PipelineConfig::preset(preset, "pt");
    for (int i = 0; i < 500; ++i) {
      const Tokens out = run_pipeline_tokens(random_text(rng), cfg);
      CHECK(lowercase(out) == out);
      CHECK(squeeze_repeats(out) == out);
      CHECK(strip_entities_and_digits(out) == out);
      CHECK(remove_stopwords_and_short(out, cfg) == out);
      if (std::string_view(preset) == "topic") {
        CHECK(strip_punctuation(out) == out);
        CHECK(lemmatize_plurals(out, *cfg.plurals) == out);
      }
    }
  }
}

TEST_CASE("squeeze never grows and keeps the character set") {
  Rng rng(53);
  for (int i = 0; i < 1000; ++i) {
    const std::string s = random_text(rng);
    const std::string q = squeeze_repeats(std::string_view(s));
    CHECK(q.size() <= s.size());
    std::set<char> a(s.begin(), s.end()), b(q.begin(), q.end());
    CHECK(a == b);
  }
}

TEST_CASE("localize_timestamp") {
  using namespace std::chrono;
  const Timestamp t = sys_days{year{2018} / 10 / 10} + hours{14} + minutes{2};
  const LocalTime rio = localize_timestamp(t, -180);
  CHECK(rio.hour() == 11);
  CHECK(rio.minute() == 2);
  CHECK(localize_timestamp(t, 0).wall == t);
  // 2018-10-08 was a Monday.
  const Timestamp monday_1am = sys_days{year{2018} / 10 / 8} + hours{1};
  const LocalTime prev = localize_timestamp(monday_1am, -120);
  CHECK(prev.hour() == 23);
  CHECK(prev.weekday() == 6);
  CHECK(localize_timestamp(monday_1am, 0).weekday() == 0);
}
