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

#ifndef CITYPULSE_GEO_HPP_
#define CITYPULSE_GEO_HPP_

#include <array>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>

namespace citypulse {

struct TweetRecord;

/// A WGS84 position in degrees. Construction validates range and finiteness.
class GeoPoint {
 public:
  GeoPoint(double lat, double lon);

  double lat() const { return lat_; }
  double lon() const { return lon_; }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
  friend auto operator<=>(const GeoPoint&, const GeoPoint&) = default;

 private:
  double lat_;
  double lon_;
};

/// Axis-aligned lat/lon rectangle given by its south-west and north-east
/// corners. sw == ne is a legal point-like box. Boxes that would cross the
/// antimeridian (sw.lon > ne.lon) are rejected.
class GeoBox {
 public:
  GeoBox(GeoPoint sw, GeoPoint ne);

  const GeoPoint& sw() const { return sw_; }
  const GeoPoint& ne() const { return ne_; }
  bool degenerate() const { return sw_ == ne_; }
  GeoPoint center() const;

  friend bool operator==(const GeoBox&, const GeoBox&) = default;
  friend auto operator<=>(const GeoBox&, const GeoBox&) = default;

 private:
  GeoPoint sw_;
  GeoPoint ne_;
};

struct PlaceTag {
  std::string name;
  GeoBox box;

  friend bool operator==(const PlaceTag&, const PlaceTag&) = default;
};

enum class GeoTagKind { kPreciseCoordinate, kDegeneratePlaceBox, kVariablePlaceBox, kUntagged };

enum class PlaceMode { kContainment, kCenterInside, kOverlap };

enum class FilterReason { kCoordinateInside, kPlaceMatched, kCoordinateOutside, kPlaceUnmatched, kNoGeoInfo };

struct FilterDecision {
  bool accepted = false;
  FilterReason reason = FilterReason::kNoGeoInfo;

  friend bool operator==(const FilterDecision&, const FilterDecision&) = default;
};

std::string_view geotag_kind_name(GeoTagKind kind);
std::string_view filter_reason_name(FilterReason reason);
std::string_view place_mode_name(PlaceMode mode);
/// Accepts "containment", "center" and "overlap".
PlaceMode parse_place_mode(std::string_view name);

/// Closed-box point test.
bool contains(const GeoBox& box, const GeoPoint& p);
/// True when `inner` lies entirely inside `outer` (shared edges allowed).
bool contains(const GeoBox& outer, const GeoBox& inner);
/// Closed intersection on both axes; touching edges count.
bool overlaps(const GeoBox& a, const GeoBox& b);

GeoTagKind classify_geotag(const TweetRecord& r);

/// A precise coordinate always decides on its own; the place is only
/// consulted when no coordinate is present.
FilterDecision city_filter(const TweetRecord& r, const GeoBox& city, PlaceMode mode = PlaceMode::kContainment);

struct GeotagKindStats {
  std::uint64_t distinct = 0;
  std::uint64_t tweets = 0;
  double percentage = 0.0;
};

struct GeotagBreakdown {
  GeotagKindStats precise;
  GeotagKindStats degenerate;
  GeotagKindStats variable;
  std::uint64_t untagged = 0;

  const GeotagKindStats& operator[](GeoTagKind kind) const;
};

/// Fold over records; merge() is associative so shards can be tallied
/// independently. Distinctness uses exact equality of coordinates / corners.
class GeotagTally {
 public:
  void add(const TweetRecord& r);
  void merge(const GeotagTally& other);
  GeotagBreakdown result() const;

 private:
  using BoxKey = std::array<double, 4>;
  std::set<std::pair<double, double>> points_;
  std::set<BoxKey> degenerate_boxes_;
  std::set<BoxKey> variable_boxes_;
  std::uint64_t precise_ = 0;
  std::uint64_t degenerate_ = 0;
  std::uint64_t variable_ = 0;
  std::uint64_t untagged_ = 0;
};

GeotagBreakdown geotag_breakdown(std::span<const TweetRecord> records);

}  // namespace citypulse

#endif  // CITYPULSE_GEO_HPP_
