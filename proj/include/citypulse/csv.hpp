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

#ifndef CITYPULSE_CSV_HPP_
#define CITYPULSE_CSV_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace citypulse {

/// RFC 4180 quoting: fields holding a comma, quote, CR or LF are wrapped in
/// quotes with inner quotes doubled.
std::string csv_field(std::string_view s);

/// Joins already-formatted fields with commas and a trailing newline.
std::string csv_row(const std::vector<std::string>& fields);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double x);

/// Fixed-point with `digits` decimals.
std::string format_fixed(double x, int digits);

}  // namespace citypulse

#endif  // CITYPULSE_CSV_HPP_
