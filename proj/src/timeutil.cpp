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

#include "citypulse/timeutil.hpp"

#include <array>
#include <cstdio>

namespace citypulse {
namespace {

constexpr std::array<std::string_view, 7> kWeekdayNames = {"Mon", "Tue", "Wed", "Thu",
                                                           "Fri", "Sat", "Sun"};
constexpr std::array<std::string_view, 12> kMonthNames = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                          "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

bool read_digits(std::string_view s, std::size_t pos, std::size_t n, int& out) {
  if (pos + n > s.size()) return false;
  int v = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

int iso_weekday(std::chrono::sys_days day) {
  return static_cast<int>(std::chrono::weekday{day}.iso_encoding()) - 1;
}

}  // namespace

std::optional<Timestamp> parse_twitter_date(std::string_view s) {
  // 0         1         2
  // 0123456789012345678901234567890
  // Wed Oct 10 20:19:24 +0000 2018
  if (s.size() != 30) return std::nullopt;
  if (s[3] != ' ' || s[7] != ' ' || s[10] != ' ' || s[13] != ':' || s[16] != ':' ||
      s[19] != ' ' || s[25] != ' ') {
    return std::nullopt;
  }
  int weekday = -1;
  for (std::size_t i = 0; i < kWeekdayNames.size(); ++i) {
    if (s.substr(0, 3) == kWeekdayNames[i]) weekday = static_cast<int>(i);
  }
  int month = -1;
  for (std::size_t i = 0; i < kMonthNames.size(); ++i) {
    if (s.substr(4, 3) == kMonthNames[i]) month = static_cast<int>(i) + 1;
  }
  if (weekday < 0 || month < 0) return std::nullopt;

  int day, hh, mm, ss, zh, zm, year;
  if (!read_digits(s, 8, 2, day) || !read_digits(s, 11, 2, hh) || !read_digits(s, 14, 2, mm) ||
      !read_digits(s, 17, 2, ss) || !read_digits(s, 21, 2, zh) || !read_digits(s, 23, 2, zm) ||
      !read_digits(s, 26, 4, year)) {
    return std::nullopt;
  }
  const char sign = s[20];
  if (sign != '+' && sign != '-') return std::nullopt;
  if (hh > 23 || mm > 59 || ss > 59 || zh > 23 || zm > 59) return std::nullopt;

  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok()) return std::nullopt;
  const sys_days d{ymd};
  if (iso_weekday(d) != weekday) return std::nullopt;

  const int zone = (sign == '+' ? 1 : -1) * (zh * 60 + zm);
  return Timestamp{d} + hours{hh} + minutes{mm} + seconds{ss} - minutes{zone};
}

std::string format_twitter_date(Timestamp utc) {
  using namespace std::chrono;
  const auto day = floor<days>(utc);
  const year_month_day ymd{day};
  const auto tod = utc - day;
  const auto h = duration_cast<hours>(tod);
  const auto m = duration_cast<minutes>(tod - h);
  const auto s = tod - h - m;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%s %s %02u %02d:%02d:%02d +0000 %04d",
                kWeekdayNames[static_cast<std::size_t>(iso_weekday(day))].data(),
                kMonthNames[static_cast<unsigned>(ymd.month()) - 1].data(),
                static_cast<unsigned>(ymd.day()), static_cast<int>(h.count()),
                static_cast<int>(m.count()), static_cast<int>(s.count()),
                static_cast<int>(ymd.year()));
  return buf;
}

int LocalTime::weekday() const { return iso_weekday(date()); }

int LocalTime::hour() const {
  return static_cast<int>(std::chrono::duration_cast<std::chrono::hours>(wall - date()).count());
}

int LocalTime::minute() const {
  const auto tod = wall - date();
  return static_cast<int>(
      std::chrono::duration_cast<std::chrono::minutes>(tod - std::chrono::duration_cast<std::chrono::hours>(tod))
          .count());
}

LocalTime localize_timestamp(Timestamp utc, int offset_minutes) {
  return LocalTime{utc + std::chrono::minutes{offset_minutes}};
}

std::string format_date(std::chrono::sys_days day) {
  const std::chrono::year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace citypulse
