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

#include "citypulse/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "citypulse/csv.hpp"
#include "citypulse/error.hpp"

namespace citypulse {

namespace {

double median_range(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  const std::size_t n = hi - lo;
  const std::size_t mid = lo + n / 2;
  return n % 2 ? v[mid] : (v[mid - 1] + v[mid]) / 2.0;
}

constexpr const char* kQuartileNote = "# quartiles: Tukey hinges, median excluded from both halves for odd n";

void write_summary_row(std::ostream& out, const std::string& key, const FiveNumberSummary& s) {
  out << csv_row({key, format_double(s.min), format_double(s.q1), format_double(s.median), format_double(s.q3),
                  format_double(s.max), format_double(s.iqr)});
}

}  // namespace

FiveNumberSummary five_number_summary(std::vector<double> v) {
  FiveNumberSummary s;
  s.n = v.size();
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  s.min = v.front();
  s.max = v.back();
  s.median = median_range(v, 0, n);
  if (n == 1) {
    s.q1 = s.q3 = v[0];
  } else {
    s.q1 = median_range(v, 0, n / 2);
    s.q3 = median_range(v, (n + 1) / 2, n);
  }
  s.iqr = s.q3 - s.q1;
  return s;
}

std::uint64_t TemporalStats::total() const {
  std::uint64_t t = 0;
  for (const auto& d : daily) t += d.count;
  return t;
}

void TemporalCounter::add(Timestamp utc) {
  const LocalTime t = localize_timestamp(utc, offset_);
  auto& row = cells_[t.date()];
  ++row[static_cast<std::size_t>(t.hour())];
}

void TemporalCounter::merge(const TemporalCounter& other) {
  if (other.offset_ != offset_) throw Error(ErrorKind::kInvalidArgument, "cannot merge counters with different offsets");
  for (const auto& [day, row] : other.cells_) {
    auto& mine = cells_[day];
    for (std::size_t h = 0; h < 24; ++h) mine[h] += row[h];
  }
}

TemporalStats TemporalCounter::stats() const {
  TemporalStats s;
  std::array<std::vector<double>, 7> by_weekday;
  std::array<std::vector<double>, 24> by_hour;
  if (!cells_.empty()) {
    const auto first = cells_.begin()->first, last = cells_.rbegin()->first;
    static const std::array<std::uint64_t, 24> kEmpty{};
    for (auto day = first; day <= last; day += std::chrono::days{1}) {
      const auto it = cells_.find(day);
      const auto& row = it == cells_.end() ? kEmpty : it->second;
      std::uint64_t total = 0;
      for (std::size_t h = 0; h < 24; ++h) {
        total += row[h];
        by_hour[h].push_back(static_cast<double>(row[h]));
      }
      s.daily.push_back({day, total});
      const int wd = LocalTime{day}.weekday();
      by_weekday[static_cast<std::size_t>(wd)].push_back(static_cast<double>(total));
    }
  }
  for (std::size_t d = 0; d < 7; ++d) s.weekday[d] = five_number_summary(std::move(by_weekday[d]));
  for (std::size_t h = 0; h < 24; ++h) s.hour[h] = five_number_summary(std::move(by_hour[h]));
  return s;
}

TemporalStats temporal_stats(std::span<const TweetRecord> records, int utc_offset_minutes) {
  TemporalCounter c(utc_offset_minutes);
  for (const auto& r : records) c.add(r);
  return c.stats();
}

void UserActivityCounter::merge(const UserActivityCounter& other) {
  for (const auto& [u, n] : other.posts_) posts_[u] += n;
}

UserActivity UserActivityCounter::result() const {
  UserActivity a;
  a.posts_by_user = posts_;
  for (const auto& [u, n] : posts_) ++a.histogram[n];
  const double users = static_cast<double>(posts_.size());
  std::uint64_t running = 0;
  for (const auto& [n, k] : a.histogram) {
    running += k;
    a.cumulative.emplace_back(n, static_cast<double>(running) / users);
    if (n > 0) a.log_log.emplace_back(std::log10(static_cast<double>(n)), std::log10(static_cast<double>(k)));
  }
  return a;
}

UserActivity user_activity(std::span<const TweetRecord> records) {
  UserActivityCounter c;
  for (const auto& r : records) c.add(r);
  return c.result();
}

std::string_view entity_kind_name(EntityKind kind) {
  switch (kind) {
    case EntityKind::kHashtags:
      return "hashtags";
    case EntityKind::kUserMentions:
      return "user_mentions";
    case EntityKind::kUrls:
      return "urls";
    case EntityKind::kMedia:
      return "media";
  }
  return "unknown";
}

void MetadataCounter::add(const TweetRecord& r) {
  ++total_;
  with_[0] += r.entities.hashtags > 0;
  with_[1] += r.entities.user_mentions > 0;
  with_[2] += r.entities.urls > 0;
  with_[3] += r.entities.media > 0;
}

void MetadataCounter::merge(const MetadataCounter& other) {
  total_ += other.total_;
  for (std::size_t k = 0; k < 4; ++k) with_[k] += other.with_[k];
}

MetadataComposition MetadataCounter::result() const {
  MetadataComposition m;
  m.total = total_;
  for (std::size_t k = 0; k < 4; ++k) {
    m.kinds[k].count = with_[k];
    m.kinds[k].percentage = total_ ? 100.0 * static_cast<double>(with_[k]) / static_cast<double>(total_) : 0.0;
  }
  return m;
}

MetadataComposition metadata_composition(std::span<const TweetRecord> records) {
  MetadataCounter c;
  for (const auto& r : records) c.add(r);
  return c.result();
}

void write_daily_csv(std::ostream& out, const TemporalStats& s) {
  out << "date,count\n";
  for (const auto& d : s.daily) out << csv_row({format_date(d.date), std::to_string(d.count)});
}

void write_weekday_summary_csv(std::ostream& out, const TemporalStats& s) {
  out << kQuartileNote << '\n' << "weekday,min,q1,median,q3,max,iqr\n";
  for (std::size_t d = 0; d < 7; ++d) write_summary_row(out, std::to_string(d), s.weekday[d]);
}

void write_hour_summary_csv(std::ostream& out, const TemporalStats& s) {
  out << kQuartileNote << '\n' << "hour,min,q1,median,q3,max,iqr\n";
  for (std::size_t h = 0; h < 24; ++h) write_summary_row(out, std::to_string(h), s.hour[h]);
}

void write_user_activity_csv(std::ostream& out, const UserActivity& a) {
  out << "posts,users\n";
  for (const auto& [n, k] : a.histogram) out << csv_row({std::to_string(n), std::to_string(k)});
}

void write_metadata_csv(std::ostream& out, const MetadataComposition& m) {
  out << "kind,count,pct\n";
  for (EntityKind k : kEntityKinds) {
    out << csv_row({std::string(entity_kind_name(k)), std::to_string(m[k].count), format_fixed(m[k].percentage, 2)});
  }
}

}  // namespace citypulse
