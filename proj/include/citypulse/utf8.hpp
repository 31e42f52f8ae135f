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

#ifndef CITYPULSE_UTF8_HPP_
#define CITYPULSE_UTF8_HPP_

#include <cstddef>
#include <string>
#include <string_view>

namespace citypulse::utf8 {

/// Decodes the code point starting at `pos`, writing its byte length to
/// `len`. Invalid sequences decode as U+FFFD with length 1.
char32_t decode(std::string_view s, std::size_t pos, std::size_t& len);
void append(std::string& out, char32_t cp);
std::size_t length(std::string_view s);

bool is_space(char32_t cp);
/// Letters, digits, underscore, combining marks and non-symbol scripts.
bool is_word(char32_t cp);
bool is_digit(char32_t cp);

/// Simple (1:1) lowercase mapping covering ASCII, Latin-1, Latin Extended-A,
/// basic Greek and Cyrillic. Other code points map to themselves.
char32_t to_lower(char32_t cp);
std::string to_lower(std::string_view s);

}  // namespace citypulse::utf8

#endif  // CITYPULSE_UTF8_HPP_
