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

#ifndef CITYPULSE_TIMEUTIL_HPP_
#define CITYPULSE_TIMEUTIL_HPP_

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace citypulse {

using Timestamp = std::chrono::sys_seconds;

/// Parses Twitter's `created_at` layout "EEE MMM dd HH:mm:ss Z yyyy", e.g.
/// "Wed Oct 10 20:19:24 +0000 2018". Strict: fixed field widths, valid
/// calendar date, and a weekday name that agrees with the date. Returns the
/// instant in UTC.
std::optional<Timestamp> parse_twitter_date(std::string_view text);

/// Inverse of parse_twitter_date, always with a "+0000" zone.
std::string format_twitter_date(Timestamp utc);

/// A wall-clock instant in some fixed-offset zone. Stored as the shifted
/// seconds count so calendar fields can be read directly.
struct LocalTime {
  std::chrono::sys_seconds wall;

  std::chrono::sys_days date() const { return std::chrono::floor<std::chrono::days>(wall); }
  /// ISO numbering with Monday = 0.
  int weekday() const;
  int hour() const;
  int minute() const;

  friend bool operator==(const LocalTime&, const LocalTime&) = default;
};

/// Shifts a UTC instant by a fixed offset (no DST).
LocalTime localize_timestamp(Timestamp utc, int offset_minutes);

/// "YYYY-MM-DD".
std::string format_date(std::chrono::sys_days day);

}  // namespace citypulse

#endif  // CITYPULSE_TIMEUTIL_HPP_
