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

#ifndef CITYPULSE_TEXTPREP_HPP_
#define CITYPULSE_TEXTPREP_HPP_

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "citypulse/timeutil.hpp"

namespace citypulse {

enum class TokenKind { kWord, kHashtag, kMention, kUrl, kEmoticon, kNumber, kPunct };

std::string_view token_kind_name(TokenKind kind);

struct Token {
  std::string surface;
  TokenKind kind;

  friend bool operator==(const Token&, const Token&) = default;
};

using Tokens = std::vector<Token>;

/// Set of literal emoticon patterns matched longest-first.
class EmoticonGrammar {
 public:
  explicit EmoticonGrammar(std::vector<std::string> patterns);
  /// The bundled grammar from data/emoticons.txt.
  static const EmoticonGrammar& bundled();
  static EmoticonGrammar from_file(const std::string& path);

  /// Byte length of the longest pattern starting at `pos`, or 0.
  std::size_t match(std::string_view text, std::size_t pos) const;
  std::size_t size() const { return patterns_.size(); }

 private:
  std::vector<std::string> patterns_;  // sorted by length, longest first
};

/// Rule cascade, first match wins at each token start:
///   1. URL: "http://", "https://" or "www." then non-space characters, with
///      trailing . , ! ? ; : ' " ) ] split off
///   2. emoticon from the grammar, not followed by a letter or digit
///   3. mention "@" + [A-Za-z0-9_]+, hashtag "#" + word characters
///   4. number: digits with optional [.,:]digit groups, not followed by a
///      word character
///   5. word: word characters, allowing a single inner ' ’ or - between them
///   6. punctuation: a maximal run of one repeated non-word character
/// Whitespace separates tokens and is the only thing dropped.
Tokens tokenize(std::string_view text, const EmoticonGrammar& grammar = EmoticonGrammar::bundled());

/// Token list file format: one token per line, UTF-8, lines starting with '#'
/// are comments. Entries are lowercased on load.
std::unordered_set<std::string> parse_word_list(std::string_view content);
std::unordered_set<std::string> load_word_list(const std::string& path);

/// Plural rules plus exceptions for one language. Exception lines hold either
/// a bare word (never singularized) or "word lemma" for irregular forms.
class PluralRules {
 public:
  PluralRules() = default;
  PluralRules(std::string lang, std::string_view exceptions);
  static const PluralRules& bundled(std::string_view lang);

  std::string singular(const std::string& word) const;
  const std::string& lang() const { return lang_; }

 private:
  std::string lang_;
  std::unordered_set<std::string> keep_;
  std::unordered_map<std::string, std::string> irregular_;
};

Tokens lowercase(Tokens tokens);
Tokens squeeze_repeats(Tokens tokens);
Tokens strip_punctuation(Tokens tokens);
Tokens strip_entities_and_digits(Tokens tokens);

/// Truncates every run of one character longer than three to exactly three.
std::string squeeze_repeats(std::string_view s);

enum class Step {
  kLowercase,
  kSqueezeRepeats,
  kTokenize,
  kStripPunctuation,
  kStripEntitiesAndDigits,
  kRemoveStopwordsAndShort,
  kLemmatizePlurals,
};

std::string_view step_name(Step step);
/// Throws Error(UnknownStep).
Step parse_step(std::string_view name);

struct PipelineConfig {
  std::vector<Step> steps;
  std::unordered_set<std::string> stopwords;
  std::unordered_set<std::string> short_words;
  std::size_t min_token_length = 2;
  std::string lang;
  std::shared_ptr<const PluralRules> plurals;

  /// "topic" or "travel", with the bundled word lists for `lang` ("en" or
  /// "pt"). Throws Error(UnknownStep) for other preset names.
  static PipelineConfig preset(std::string_view name, std::string_view lang);
  /// Rejects configs whose steps cannot run in order: "tokenize" must occur
  /// exactly once and only lowercase / squeeze_repeats may precede it.
  void validate() const;
};

Tokens remove_stopwords_and_short(Tokens tokens, const PipelineConfig& config);
Tokens lemmatize_plurals(Tokens tokens, const PluralRules& rules);

struct PreprocessedDoc {
  std::string source_id;
  std::vector<std::string> tokens;

  friend bool operator==(const PreprocessedDoc&, const PreprocessedDoc&) = default;
};

/// Applies the configured steps in order. Steps ahead of "tokenize" act on the
/// raw text (URL spans are left untouched); later steps act on tokens.
PreprocessedDoc run_pipeline(std::string_view text, const PipelineConfig& config, std::string source_id = {});
/// Same, but returns the typed tokens.
Tokens run_pipeline_tokens(std::string_view text, const PipelineConfig& config);

}  // namespace citypulse

#endif  // CITYPULSE_TEXTPREP_HPP_
