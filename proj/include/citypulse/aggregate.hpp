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

#ifndef CITYPULSE_AGGREGATE_HPP_
#define CITYPULSE_AGGREGATE_HPP_

#include <array>
#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "citypulse/ingest.hpp"
#include "citypulse/timeutil.hpp"

namespace citypulse {

/// Tukey quartiles: for odd n the median is excluded from both halves, and
/// q1 / q3 are the medians of the lower / upper halves. n = 1 gives q1 = q3 =
/// the value; n = 0 leaves every field zero.
struct FiveNumberSummary {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, iqr = 0;
  std::size_t n = 0;

  friend bool operator==(const FiveNumberSummary&, const FiveNumberSummary&) = default;
};

FiveNumberSummary five_number_summary(std::vector<double> values);

struct DailyCount {
  std::chrono::sys_days date;
  std::uint64_t count = 0;

  friend bool operator==(const DailyCount&, const DailyCount&) = default;
};

struct TemporalStats {
  /// Every local date from the first to the last active one, zeros included.
  std::vector<DailyCount> daily;
  /// Over the daily counts of each weekday (Monday = 0).
  std::array<FiveNumberSummary, 7> weekday;
  /// Over the per-date counts of each local hour.
  std::array<FiveNumberSummary, 24> hour;

  std::uint64_t total() const;
};

/// Fold of local-date x hour counts. merge() is exact, so shards can be
/// counted separately and combined.
class TemporalCounter {
 public:
  explicit TemporalCounter(int utc_offset_minutes = 0) : offset_(utc_offset_minutes) {}

  void add(const TweetRecord& r) { add(r.created_at_utc); }
  void add(Timestamp utc);
  /// Throws Error(InvalidArgument) when the offsets differ.
  void merge(const TemporalCounter& other);

  int utc_offset_minutes() const { return offset_; }
  const std::map<std::chrono::sys_days, std::array<std::uint64_t, 24>>& cells() const { return cells_; }
  TemporalStats stats() const;

 private:
  int offset_;
  std::map<std::chrono::sys_days, std::array<std::uint64_t, 24>> cells_;
};

TemporalStats temporal_stats(std::span<const TweetRecord> records, int utc_offset_minutes);

struct UserActivity {
  std::map<std::string, std::uint64_t> posts_by_user;
  /// posts n -> users with exactly n posts.
  std::map<std::uint64_t, std::uint64_t> histogram;
  /// (n, fraction of users with <= n posts), ascending n.
  std::vector<std::pair<std::uint64_t, double>> cumulative;
  /// (log10 n, log10 users-with-n) for every nonzero histogram cell.
  std::vector<std::pair<double, double>> log_log;

  std::uint64_t users() const { return posts_by_user.size(); }
};

class UserActivityCounter {
 public:
  void add(const TweetRecord& r) { ++posts_[r.user_id]; }
  void merge(const UserActivityCounter& other);
  UserActivity result() const;

 private:
  std::map<std::string, std::uint64_t> posts_;
};

UserActivity user_activity(std::span<const TweetRecord> records);

enum class EntityKind { kHashtags, kUserMentions, kUrls, kMedia };

inline constexpr std::array<EntityKind, 4> kEntityKinds = {EntityKind::kHashtags, EntityKind::kUserMentions,
                                                           EntityKind::kUrls, EntityKind::kMedia};

std::string_view entity_kind_name(EntityKind kind);

struct EntityShare {
  std::uint64_t count = 0;
  double percentage = 0.0;
};

struct MetadataComposition {
  std::uint64_t total = 0;
  std::array<EntityShare, 4> kinds;

  const EntityShare& operator[](EntityKind k) const { return kinds[static_cast<std::size_t>(k)]; }
};

class MetadataCounter {
 public:
  void add(const TweetRecord& r);
  void merge(const MetadataCounter& other);
  MetadataComposition result() const;

 private:
  std::uint64_t total_ = 0;
  std::array<std::uint64_t, 4> with_{};
};

MetadataComposition metadata_composition(std::span<const TweetRecord> records);

/// CSV writers. Summaries carry the quartile convention in a leading comment
/// line starting with '#'.
void write_daily_csv(std::ostream& out, const TemporalStats& s);
void write_weekday_summary_csv(std::ostream& out, const TemporalStats& s);
void write_hour_summary_csv(std::ostream& out, const TemporalStats& s);
void write_user_activity_csv(std::ostream& out, const UserActivity& a);
void write_metadata_csv(std::ostream& out, const MetadataComposition& m);

}  // namespace citypulse

#endif  // CITYPULSE_AGGREGATE_HPP_
