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

#include "citypulse/textprep.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "citypulse/bundled_data.hpp"
#include "citypulse/error.hpp"
#include "citypulse/utf8.hpp"

namespace citypulse {
namespace {

struct Span {
  std::size_t begin;
  std::size_t end;
  TokenKind kind;
};

char32_t cp_at(std::string_view s, std::size_t pos, std::size_t& len) {
  if (pos >= s.size()) {
    len = 0;
    return 0;
  }
  return utf8::decode(s, pos, len);
}

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > s.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char c = s[pos + i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
    if (c != prefix[i]) return false;
  }
  return true;
}

bool is_ascii_alnum(char32_t cp) {
  return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9');
}

std::size_t match_url(std::string_view s, std::size_t pos) {
  std::size_t prefix = 0;
  if (starts_with_ci(s, pos, "https://")) {
    prefix = 8;
  } else if (starts_with_ci(s, pos, "http://")) {
    prefix = 7;
  } else if (starts_with_ci(s, pos, "www.")) {
    prefix = 4;
  } else {
    return 0;
  }
  std::size_t end = pos;
  while (end < s.size()) {
    std::size_t len;
    const char32_t cp = utf8::decode(s, end, len);
    if (utf8::is_space(cp)) break;
    end += len;
  }
  static constexpr std::string_view kTrailing = ".,!?;:'\")]";
  while (end > pos + prefix && kTrailing.find(s[end - 1]) != std::string_view::npos) --end;
  // A bare scheme with nothing after it is not a URL.
  return end > pos + prefix ? end - pos : 0;
}

std::size_t match_word_run(std::string_view s, std::size_t pos) {
  std::size_t end = pos;
  while (end < s.size()) {
    std::size_t len;
    const char32_t cp = utf8::decode(s, end, len);
    if (utf8::is_word(cp)) {
      end += len;
      continue;
    }
    // Single inner apostrophe or hyphen joining two word characters.
    if (end > pos && (cp == '\'' || cp == 0x2019 || cp == '-')) {
      std::size_t nlen;
      const char32_t next = cp_at(s, end + len, nlen);
      if (nlen > 0 && utf8::is_word(next)) {
        end += len;
        continue;
      }
    }
    break;
  }
  return end - pos;
}

std::size_t match_number(std::string_view s, std::size_t pos) {
  std::size_t end = pos;
  auto digits = [&](std::size_t at) {
    std::size_t e = at;
    while (e < s.size() && s[e] >= '0' && s[e] <= '9') ++e;
    return e;
  };
  end = digits(pos);
  if (end == pos) return 0;
  while (end + 1 < s.size() && (s[end] == '.' || s[end] == ',' || s[end] == ':') && s[end + 1] >= '0' &&
         s[end + 1] <= '9') {
    end = digits(end + 1);
  }
  std::size_t len;
  const char32_t next = cp_at(s, end, len);
  if (len > 0 && utf8::is_word(next)) return 0;
  return end - pos;
}

std::vector<Span> tokenize_spans(std::string_view s, const EmoticonGrammar& grammar) {
  std::vector<Span> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t len;
    const char32_t cp = utf8::decode(s, pos, len);
    if (utf8::is_space(cp)) {
      pos += len;
      continue;
    }
    if (std::size_t n = match_url(s, pos); n > 0) {
      out.push_back({pos, pos + n, TokenKind::kUrl});
      pos += n;
      continue;
    }
    if (std::size_t n = grammar.match(s, pos); n > 0) {
      std::size_t nlen;
      const char32_t next = cp_at(s, pos + n, nlen);
      if (nlen == 0 || !is_ascii_alnum(next)) {
        out.push_back({pos, pos + n, TokenKind::kEmoticon});
        pos += n;
        continue;
      }
    }
    if (cp == '@') {
      std::size_t end = pos + 1;
      while (end < s.size() && (is_ascii_alnum(static_cast<unsigned char>(s[end])) || s[end] == '_')) ++end;
      if (end > pos + 1) {
        out.push_back({pos, end, TokenKind::kMention});
        pos = end;
        continue;
      }
    }
    if (cp == '#') {
      std::size_t end = pos + 1;
      while (end < s.size()) {
        std::size_t l;
        if (!utf8::is_word(utf8::decode(s, end, l))) break;
        end += l;
      }
      if (end > pos + 1) {
        out.push_back({pos, end, TokenKind::kHashtag});
        pos = end;
        continue;
      }
    }
    if (utf8::is_digit(cp)) {
      if (std::size_t n = match_number(s, pos); n > 0) {
        out.push_back({pos, pos + n, TokenKind::kNumber});
        pos += n;
        continue;
      }
    }
    if (utf8::is_word(cp)) {
      const std::size_t n = match_word_run(s, pos);
      out.push_back({pos, pos + n, TokenKind::kWord});
      pos += n;
      continue;
    }
    std::size_t end = pos + len;
    while (end < s.size()) {
      std::size_t l;
      const char32_t next = utf8::decode(s, end, l);
      if (next != cp || l != len) break;
      end += l;
    }
    out.push_back({pos, end, TokenKind::kPunct});
    pos = end;
  }
  return out;
}

std::string lower_surface(const std::string& s) { return utf8::to_lower(s); }

bool casefolds(TokenKind kind) {
  return kind == TokenKind::kWord || kind == TokenKind::kHashtag || kind == TokenKind::kMention;
}

bool has_digit(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string replace_suffix(std::string_view s, std::size_t drop, std::string_view add) {
  std::string out(s.substr(0, s.size() - drop));
  out += add;
  return out;
}

// Text-level variant of a token transform: rewrites every non-URL span and
// keeps the original whitespace between spans.
template <class Fn>
std::string rewrite_text(std::string_view text, const EmoticonGrammar& grammar, Fn fn) {
  std::string out;
  out.reserve(text.size());
  std::size_t cursor = 0;
  for (const Span& sp : tokenize_spans(text, grammar)) {
    out.append(text.substr(cursor, sp.begin - cursor));
    const std::string_view piece = text.substr(sp.begin, sp.end - sp.begin);
    if (sp.kind == TokenKind::kUrl) {
      out.append(piece);
    } else {
      out.append(fn(piece));
    }
    cursor = sp.end;
  }
  out.append(text.substr(cursor));
  return out;
}

}  // namespace

std::string_view token_kind_name(TokenKind kind) {
  switch (kind) {
    case TokenKind::kWord: return "Word";
    case TokenKind::kHashtag: return "Hashtag";
    case TokenKind::kMention: return "Mention";
    case TokenKind::kUrl: return "Url";
    case TokenKind::kEmoticon: return "Emoticon";
    case TokenKind::kNumber: return "Number";
    case TokenKind::kPunct: return "Punct";
  }
  return "Word";
}

EmoticonGrammar::EmoticonGrammar(std::vector<std::string> patterns) : patterns_(std::move(patterns)) {
  patterns_.erase(std::remove(patterns_.begin(), patterns_.end(), std::string()), patterns_.end());
  std::stable_sort(patterns_.begin(), patterns_.end(),
                   [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
}

namespace {
std::vector<std::string> grammar_lines(std::string_view content) {
  std::vector<std::string> out;
  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    out.push_back(line);
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

const EmoticonGrammar& EmoticonGrammar::bundled() {
  static const EmoticonGrammar grammar(grammar_lines(bundled_data("emoticons.txt")));
  return grammar;
}

EmoticonGrammar EmoticonGrammar::from_file(const std::string& path) {
  return EmoticonGrammar(grammar_lines(read_text_file(path)));
}

std::size_t EmoticonGrammar::match(std::string_view text, std::size_t pos) const {
  for (const auto& p : patterns_) {
    if (text.compare(pos, p.size(), p) == 0) return p.size();
  }
  return 0;
}

Tokens tokenize(std::string_view text, const EmoticonGrammar& grammar) {
  Tokens out;
  for (const Span& sp : tokenize_spans(text, grammar)) {
    out.push_back({std::string(text.substr(sp.begin, sp.end - sp.begin)), sp.kind});
  }
  return out;
}

std::unordered_set<std::string> parse_word_list(std::string_view content) {
  std::unordered_set<std::string> out;
  for (auto& line : grammar_lines(content)) {
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.pop_back();
    if (!line.empty()) out.insert(utf8::to_lower(line));
  }
  return out;
}

std::unordered_set<std::string> load_word_list(const std::string& path) {
  return parse_word_list(read_text_file(path));
}

PluralRules::PluralRules(std::string lang, std::string_view exceptions) : lang_(std::move(lang)) {
  for (const auto& line : grammar_lines(exceptions)) {
    std::istringstream fields(line);
    std::string word, lemma;
    fields >> word >> lemma;
    if (word.empty()) continue;
    word = utf8::to_lower(word);
    if (lemma.empty()) {
      keep_.insert(word);
    } else {
      irregular_[word] = utf8::to_lower(lemma);
    }
  }
}

const PluralRules& PluralRules::bundled(std::string_view lang) {
  static const PluralRules en("en", bundled_data("plural_exceptions_en.txt"));
  static const PluralRules pt("pt", bundled_data("plural_exceptions_pt.txt"));
  static const PluralRules none;
  if (lang == "en") return en;
  if (lang == "pt") return pt;
  return none;
}

std::string PluralRules::singular(const std::string& word) const {
  if (keep_.count(word)) return word;
  if (auto it = irregular_.find(word); it != irregular_.end()) return it->second;
  if (utf8::length(word) < 4) return word;
  if (lang_ == "en") {
    if (ends_with(word, "ies") && utf8::length(word) > 4) return replace_suffix(word, 3, "y");
    for (std::string_view suf : {"sses", "xes", "zzes", "ches", "shes"}) {
      if (ends_with(word, suf)) return replace_suffix(word, 2, "");
    }
    if (ends_with(word, "ss") || ends_with(word, "us") || ends_with(word, "is")) return word;
    if (ends_with(word, "s")) return replace_suffix(word, 1, "");
    return word;
  }
  if (lang_ == "pt") {
    if (ends_with(word, "ões") || ends_with(word, "ães")) return replace_suffix(word, std::string_view("ões").size(), "ão");
    if (ends_with(word, "ais")) return replace_suffix(word, 3, "al");
    if (ends_with(word, "éis")) return replace_suffix(word, std::string_view("éis").size(), "el");
    if (ends_with(word, "óis")) return replace_suffix(word, std::string_view("óis").size(), "ol");
    if (ends_with(word, "ns")) return replace_suffix(word, 2, "m");
    if (ends_with(word, "res") || ends_with(word, "zes")) return replace_suffix(word, 2, "");
    if (ends_with(word, "ss")) return word;
    if (ends_with(word, "s")) {
      std::string stem = word.substr(0, word.size() - 1);
      // Last code point of the stem must be a vowel.
      std::size_t start = stem.size();
      while (start > 0 && (static_cast<unsigned char>(stem[start - 1]) & 0xC0) == 0x80) --start;
      if (start > 0) --start;
      std::size_t len;
      const char32_t last = utf8::decode(stem, start, len);
      static constexpr std::u32string_view kVowels = U"aeiouáéíóúâêôãõà";
      if (kVowels.find(last) != std::u32string_view::npos) return stem;
    }
    return word;
  }
  return word;
}

Tokens lowercase(Tokens tokens) {
  for (auto& t : tokens) {
    if (casefolds(t.kind)) t.surface = lower_surface(t.surface);
  }
  return tokens;
}

std::string squeeze_repeats(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  char32_t prev = 0;
  int run = 0;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t len;
    const char32_t cp = utf8::decode(s, i, len);
    run = (i > 0 && cp == prev) ? run + 1 : 1;
    prev = cp;
    if (run <= 3) out.append(s.substr(i, len));
    i += len;
  }
  return out;
}

Tokens squeeze_repeats(Tokens tokens) {
  for (auto& t : tokens) {
    if (t.kind != TokenKind::kUrl) t.surface = squeeze_repeats(t.surface);
  }
  return tokens;
}

Tokens strip_punctuation(Tokens tokens) {
  std::erase_if(tokens, [](const Token& t) { return t.kind == TokenKind::kPunct || t.kind == TokenKind::kEmoticon; });
  return tokens;
}

Tokens strip_entities_and_digits(Tokens tokens) {
  std::erase_if(tokens, [](const Token& t) {
    switch (t.kind) {
      case TokenKind::kUrl:
      case TokenKind::kMention:
      case TokenKind::kHashtag:
      case TokenKind::kNumber: return true;
      case TokenKind::kWord: return has_digit(t.surface);
      default: return false;
    }
  });
  return tokens;
}

Tokens remove_stopwords_and_short(Tokens tokens, const PipelineConfig& config) {
  std::erase_if(tokens, [&](const Token& t) {
    if (utf8::length(t.surface) < config.min_token_length) return true;
    const std::string folded = lower_surface(t.surface);
    return config.stopwords.count(folded) > 0 || config.short_words.count(folded) > 0;
  });
  return tokens;
}

Tokens lemmatize_plurals(Tokens tokens, const PluralRules& rules) {
  for (auto& t : tokens) {
    if (t.kind == TokenKind::kWord) t.surface = rules.singular(t.surface);
  }
  return tokens;
}

std::string_view step_name(Step step) {
  switch (step) {
    case Step::kLowercase: return "lowercase";
    case Step::kSqueezeRepeats: return "squeeze_repeats";
    case Step::kTokenize: return "tokenize";
    case Step::kStripPunctuation: return "strip_punctuation";
    case Step::kStripEntitiesAndDigits: return "strip_entities_and_digits";
    case Step::kRemoveStopwordsAndShort: return "remove_stopwords_and_short";
    case Step::kLemmatizePlurals: return "lemmatize_plurals";
  }
  return "tokenize";
}

Step parse_step(std::string_view name) {
  for (Step s : {Step::kLowercase, Step::kSqueezeRepeats, Step::kTokenize, Step::kStripPunctuation,
                 Step::kStripEntitiesAndDigits, Step::kRemoveStopwordsAndShort, Step::kLemmatizePlurals}) {
    if (step_name(s) == name) return s;
  }
  throw Error(ErrorKind::kUnknownStep, "unknown preprocessing step '" + std::string(name) + "'");
}

PipelineConfig PipelineConfig::preset(std::string_view name, std::string_view lang) {
  PipelineConfig c;
  if (name == "topic") {
    c.steps = {Step::kLowercase,         Step::kSqueezeRepeats,         Step::kTokenize,
               Step::kStripPunctuation,  Step::kStripEntitiesAndDigits, Step::kRemoveStopwordsAndShort,
               Step::kLemmatizePlurals};
  } else if (name == "travel") {
    c.steps = {Step::kLowercase, Step::kSqueezeRepeats, Step::kTokenize, Step::kStripEntitiesAndDigits,
               Step::kRemoveStopwordsAndShort};
  } else {
    throw Error(ErrorKind::kUnknownStep, "unknown preprocessing preset '" + std::string(name) + "'");
  }
  c.lang = std::string(lang);
  if (lang == "en" || lang == "pt") {
    c.stopwords = parse_word_list(bundled_data("stopwords_" + std::string(lang) + ".txt"));
  }
  c.short_words = parse_word_list(bundled_data("shortwords.txt"));
  c.plurals = std::make_shared<PluralRules>(PluralRules::bundled(lang));
  return c;
}

void PipelineConfig::validate() const {
  const auto n_tok = std::count(steps.begin(), steps.end(), Step::kTokenize);
  if (n_tok != 1) throw Error(ErrorKind::kConfigError, "pipeline needs exactly one tokenize step");
  for (Step s : steps) {
    if (s == Step::kTokenize) break;
    if (s != Step::kLowercase && s != Step::kSqueezeRepeats) {
      throw Error(ErrorKind::kConfigError,
                  "step '" + std::string(step_name(s)) + "' needs tokens and cannot precede tokenize");
    }
  }
}

Tokens run_pipeline_tokens(std::string_view text, const PipelineConfig& config) {
  config.validate();
  const EmoticonGrammar& grammar = EmoticonGrammar::bundled();
  std::string raw(text);
  Tokens tokens;
  bool tokenized = false;
  for (Step step : config.steps) {
    if (!tokenized) {
      switch (step) {
        case Step::kLowercase:
          raw = rewrite_text(raw, grammar, [](std::string_view s) { return utf8::to_lower(s); });
          break;
        case Step::kSqueezeRepeats:
          raw = rewrite_text(raw, grammar, [](std::string_view s) { return squeeze_repeats(s); });
          break;
        case Step::kTokenize:
          tokens = tokenize(raw, grammar);
          tokenized = true;
          break;
        default: break;  // rejected by validate()
      }
      continue;
    }
    switch (step) {
      case Step::kLowercase: tokens = lowercase(std::move(tokens)); break;
      case Step::kSqueezeRepeats: tokens = squeeze_repeats(std::move(tokens)); break;
      case Step::kTokenize: break;
      case Step::kStripPunctuation: tokens = strip_punctuation(std::move(tokens)); break;
      case Step::kStripEntitiesAndDigits: tokens = strip_entities_and_digits(std::move(tokens)); break;
      case Step::kRemoveStopwordsAndShort: tokens = remove_stopwords_and_short(std::move(tokens), config); break;
      case Step::kLemmatizePlurals:
        tokens = lemmatize_plurals(std::move(tokens), config.plurals ? *config.plurals : PluralRules::bundled(config.lang));
        break;
    }
  }
  return tokens;
}

PreprocessedDoc run_pipeline(std::string_view text, const PipelineConfig& config, std::string source_id) {
  PreprocessedDoc doc;
  doc.source_id = std::move(source_id);
  for (auto& t : run_pipeline_tokens(text, config)) doc.tokens.push_back(std::move(t.surface));
  return doc;
}

}  // namespace citypulse
