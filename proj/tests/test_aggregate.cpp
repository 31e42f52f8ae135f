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

#include <cmath>
#include <sstream>

#include "citypulse/aggregate.hpp"
#include "citypulse/error.hpp"
#include "citypulse/rng.hpp"
#include "citypulse/synth.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace citypulse;
using namespace std::chrono;

namespace {

TweetRecord at(Timestamp t, std::string user = "u", EntityCounts e = {}) {
  static int next = 0;
  TweetRecord r;
  r.id = std::to_string(++next);
  r.created_at_utc = t;
  r.user_id = std::move(user);
  r.entities = e;
  return r;
}

const sys_days kMonday = year{2018} / 10 / 8;

}  // namespace

TEST_CASE("five-number summary examples") {
  const auto s = five_number_summary({1, 2, 3, 4, 5});
  CHECK(s == FiveNumberSummary{1, 1.5, 3, 4.5, 5, 3, 5});
  CHECK(five_number_summary({7}) == FiveNumberSummary{7, 7, 7, 7, 7, 0, 1});
  CHECK(five_number_summary({}).n == 0);
  const auto even = five_number_summary({4, 1, 3, 2});
  CHECK(even.q1 == 1.5);
  CHECK(even.median == 2.5);
  CHECK(even.q3 == 3.5);
}

TEST_CASE("five-number summary equals the sort-based oracle") {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(1 + rng.below(60));
    for (auto& x : v) x = trial % 2 ? static_cast<double>(rng.below(10)) : rng.normal() * 100;
    const auto got = five_number_summary(v);
    const auto want = testing::sorted_summary(v);
    CHECK(got.min == want.min);
    CHECK(got.q1 == want.q1);
    CHECK(got.median == want.median);
    CHECK(got.q3 == want.q3);
    CHECK(got.max == want.max);
    CHECK(got.iqr == want.q3 - want.q1);
    CHECK(got.min <= got.q1);
    CHECK(got.q1 <= got.median);
    CHECK(got.median <= got.q3);
    CHECK(got.q3 <= got.max);
  }
}

TEST_CASE("temporal stats") {
  // Five Mondays with 1..5 records.
  std::vector<TweetRecord> recs;
  for (int w = 0; w < 5; ++w) {
    for (int k = 0; k <= w; ++k) recs.push_back(at(kMonday + weeks{w} + hours{12}));
  }
  const TemporalStats s = temporal_stats(recs, 0);
  CHECK(s.daily.size() == 29);
  CHECK(s.total() == recs.size());
  CHECK(s.weekday[0] == FiveNumberSummary{1, 1.5, 3, 4.5, 5, 3, 5});
  CHECK(s.weekday[1].max == 0);
  CHECK(s.hour[12].max == 5);

  // All at local 23:xx, offset -180: UTC 02:xx on the next day.
  std::vector<TweetRecord> late;
  for (int d = 0; d < 4; ++d) late.push_back(at(kMonday + days{d + 1} + hours{2} + minutes{15}));
  const TemporalStats l = temporal_stats(late, -180);
  CHECK(l.daily.front().date == kMonday);
  CHECK(l.hour[23].min == 1);
  for (int h = 0; h < 23; ++h) CHECK(l.hour[static_cast<std::size_t>(h)].max == 0);

  CHECK(temporal_stats({}, 0).daily.empty());
}

TEST_CASE("shard merges equal whole-set folds") {
  ActivitySpec spec;
  spec.days = 30;
  const auto corpus = generate_activity_corpus(spec, 4);
  const std::span<const TweetRecord> all(corpus.records);
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t cut = rng.below(all.size() + 1);
    TemporalCounter a(spec.utc_offset_minutes), b(spec.utc_offset_minutes), whole(spec.utc_offset_minutes);
    UserActivityCounter ua, ub, uw;
    MetadataCounter ma, mb, mw;
    for (std::size_t i = 0; i < all.size(); ++i) {
      (i < cut ? a : b).add(all[i]);
      (i < cut ? ua : ub).add(all[i]);
      (i < cut ? ma : mb).add(all[i]);
      whole.add(all[i]);
      uw.add(all[i]);
      mw.add(all[i]);
    }
    a.merge(b);
    ua.merge(ub);
    ma.merge(mb);
    CHECK(a.cells() == whole.cells());
    const TemporalStats sa = a.stats(), sw = whole.stats();
    CHECK(sa.daily == sw.daily);
    CHECK(sa.weekday == sw.weekday);
    CHECK(sa.hour == sw.hour);
    CHECK(ua.result().histogram == uw.result().histogram);
    CHECK(ua.result().posts_by_user == uw.result().posts_by_user);
    for (EntityKind k : kEntityKinds) CHECK(ma.result()[k].count == mw.result()[k].count);
  }
  TemporalCounter x(0), y(60);
  CHECK_THROWS_AS(x.merge(y), Error);
}

TEST_CASE("planted weekday rates are recovered") {
  ActivitySpec spec;
  const auto corpus = generate_activity_corpus(spec, 21);
  const TemporalStats s = temporal_stats(corpus.records, spec.utc_offset_minutes);
  CHECK(s.total() == corpus.records.size());
  for (std::size_t d = 0; d < 7; ++d) {
    CHECK(std::abs(s.weekday[d].median - spec.weekday_rates[d]) <= 0.15 * spec.weekday_rates[d]);
  }
}

TEST_CASE("user activity") {
  const std::vector<TweetRecord> recs = {at(sys_days{kMonday}, "a"), at(sys_days{kMonday}, "b"),
                                         at(sys_days{kMonday}, "c"), at(sys_days{kMonday}, "c")};
  const UserActivity a = user_activity(recs);
  CHECK(a.histogram == std::map<std::uint64_t, std::uint64_t>{{1, 2}, {2, 1}});
  REQUIRE(a.cumulative.size() == 2);
  CHECK(a.cumulative[0].second == doctest::Approx(2.0 / 3.0));
  CHECK(a.cumulative[1].second == 1.0);

  ActivitySpec spec;
  spec.users = 2000;
  spec.days = 60;
  const auto corpus = generate_activity_corpus(spec, 6);
  const UserActivity z = user_activity(corpus.records);
  std::uint64_t users = 0;
  for (const auto& [n, k] : z.histogram) users += k;
  CHECK(users == z.users());
  for (std::size_t i = 1; i < z.cumulative.size(); ++i) CHECK(z.cumulative[i].second >= z.cumulative[i - 1].second);
  // Least-squares slope of the log-log points.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(z.log_log.size());
  for (const auto& [x, y] : z.log_log) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  CHECK((n * sxy - sx * sy) / (n * sxx - sx * sx) < 0.0);
}

TEST_CASE("metadata composition") {
  const std::vector<TweetRecord> recs = {at(sys_days{kMonday}, "a", {2, 0, 0, 0}), at(sys_days{kMonday}, "a", {1, 1, 0, 0}),
                                         at(sys_days{kMonday}), at(sys_days{kMonday})};
  const auto m = metadata_composition(recs);
  CHECK(m[EntityKind::kHashtags].percentage == 50.0);
  CHECK(m[EntityKind::kUserMentions].count == 1);
  CHECK(m[EntityKind::kMedia].percentage == 0.0);

  const auto corpus = generate_activity_corpus(ActivitySpec{}, 2);
  std::array<std::uint64_t, 4> ledger{};
  for (const auto& e : corpus.ledger.entries) {
    ledger[0] += e.entities.hashtags > 0;
    ledger[1] += e.entities.user_mentions > 0;
    ledger[2] += e.entities.urls > 0;
    ledger[3] += e.entities.media > 0;
  }
  const auto got = metadata_composition(corpus.records);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(got.kinds[k].count == ledger[k]);
    CHECK(std::abs(got.kinds[k].percentage - 100.0 * ledger[k] / got.total) < 0.01);
  }
}

TEST_CASE("aggregate CSV layouts") {
  std::vector<TweetRecord> recs = {at(kMonday + hours{1}), at(kMonday + days{2} + hours{1})};
  const TemporalStats s = temporal_stats(recs, 0);
  std::ostringstream daily, weekday, hour, users, meta;
  write_daily_csv(daily, s);
  CHECK(daily.str() == "date,count\n2018-10-08,1\n2018-10-09,0\n2018-10-10,1\n");
  write_weekday_summary_csv(weekday, s);
  CHECK(weekday.str().find("weekday,min,q1,median,q3,max,iqr\n0,1,1,1,1,1,0\n") != std::string::npos);
  write_hour_summary_csv(hour, s);
  CHECK(hour.str().find("\n1,0,0,1,1,1,1\n") != std::string::npos);
  write_user_activity_csv(users, user_activity(recs));
  CHECK(users.str() == "posts,users\n2,1\n");
  write_metadata_csv(meta, metadata_composition(recs));
  CHECK(meta.str() == "kind,count,pct\nhashtags,0,0.00\nuser_mentions,0,0.00\nurls,0,0.00\nmedia,0,0.00\n");
}
