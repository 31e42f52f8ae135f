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

#include "citypulse/geo.hpp"

#include <cmath>

#include "citypulse/error.hpp"
#include "citypulse/ingest.hpp"

namespace citypulse {

GeoPoint::GeoPoint(double lat, double lon) : lat_(lat), lon_(lon) {
  if (!std::isfinite(lat) || !std::isfinite(lon)) {
    throw Error(ErrorKind::kBadGeometry, "non-finite coordinate");
  }
  if (lat < -90.0 || lat > 90.0 || lon < -180.0 || lon > 180.0) {
    throw Error(ErrorKind::kBadGeometry, "coordinate out of range");
  }
}

GeoBox::GeoBox(GeoPoint sw, GeoPoint ne) : sw_(sw), ne_(ne) {
  if (sw.lat() > ne.lat()) throw Error(ErrorKind::kBadGeometry, "box south edge above north edge");
  if (sw.lon() > ne.lon()) throw Error(ErrorKind::kBadGeometry, "box crosses the antimeridian or is inverted");
}

GeoPoint GeoBox::center() const {
  return GeoPoint(0.5 * (sw_.lat() + ne_.lat()), 0.5 * (sw_.lon() + ne_.lon()));
}

std::string_view geotag_kind_name(GeoTagKind kind) {
  switch (kind) {
    case GeoTagKind::kPreciseCoordinate: return "precise";
    case GeoTagKind::kDegeneratePlaceBox: return "degenerate_place";
    case GeoTagKind::kVariablePlaceBox: return "variable_place";
    case GeoTagKind::kUntagged: return "untagged";
  }
  return "untagged";
}

std::string_view filter_reason_name(FilterReason reason) {
  switch (reason) {
    case FilterReason::kCoordinateInside: return "CoordinateInside";
    case FilterReason::kPlaceMatched: return "PlaceMatched";
    case FilterReason::kCoordinateOutside: return "CoordinateOutside";
    case FilterReason::kPlaceUnmatched: return "PlaceUnmatched";
    case FilterReason::kNoGeoInfo: return "NoGeoInfo";
  }
  return "NoGeoInfo";
}

std::string_view place_mode_name(PlaceMode mode) {
  switch (mode) {
    case PlaceMode::kContainment: return "containment";
    case PlaceMode::kCenterInside: return "center";
    case PlaceMode::kOverlap: return "overlap";
  }
  return "containment";
}

PlaceMode parse_place_mode(std::string_view name) {
  if (name == "containment") return PlaceMode::kContainment;
  if (name == "center") return PlaceMode::kCenterInside;
  if (name == "overlap") return PlaceMode::kOverlap;
  throw Error(ErrorKind::kConfigError, "unknown place_mode '" + std::string(name) + "'");
}

bool contains(const GeoBox& box, const GeoPoint& p) {
  return box.sw().lat() <= p.lat() && p.lat() <= box.ne().lat() && box.sw().lon() <= p.lon() &&
         p.lon() <= box.ne().lon();
}

bool contains(const GeoBox& outer, const GeoBox& inner) {
  return contains(outer, inner.sw()) && contains(outer, inner.ne());
}

bool overlaps(const GeoBox& a, const GeoBox& b) {
  return a.sw().lat() <= b.ne().lat() && b.sw().lat() <= a.ne().lat() && a.sw().lon() <= b.ne().lon() &&
         b.sw().lon() <= a.ne().lon();
}

GeoTagKind classify_geotag(const TweetRecord& r) {
  if (r.coordinate) return GeoTagKind::kPreciseCoordinate;
  if (r.place) return r.place->box.degenerate() ? GeoTagKind::kDegeneratePlaceBox : GeoTagKind::kVariablePlaceBox;
  return GeoTagKind::kUntagged;
}

FilterDecision city_filter(const TweetRecord& r, const GeoBox& city, PlaceMode mode) {
  if (r.coordinate) {
    const bool inside = contains(city, *r.coordinate);
    return {inside, inside ? FilterReason::kCoordinateInside : FilterReason::kCoordinateOutside};
  }
  if (r.place) {
    const GeoBox& box = r.place->box;
    bool matched = false;
    switch (mode) {
      case PlaceMode::kContainment: matched = contains(city, box); break;
      case PlaceMode::kCenterInside: matched = contains(city, box.center()); break;
      case PlaceMode::kOverlap: matched = overlaps(city, box); break;
    }
    return {matched, matched ? FilterReason::kPlaceMatched : FilterReason::kPlaceUnmatched};
  }
  return {false, FilterReason::kNoGeoInfo};
}

const GeotagKindStats& GeotagBreakdown::operator[](GeoTagKind kind) const {
  switch (kind) {
    case GeoTagKind::kPreciseCoordinate: return precise;
    case GeoTagKind::kDegeneratePlaceBox: return degenerate;
    case GeoTagKind::kVariablePlaceBox: return variable;
    case GeoTagKind::kUntagged: break;
  }
  throw Error(ErrorKind::kInvalidArgument, "untagged records have no breakdown entry");
}

void GeotagTally::add(const TweetRecord& r) {
  switch (classify_geotag(r)) {
    case GeoTagKind::kPreciseCoordinate:
      ++precise_;
      points_.emplace(r.coordinate->lat(), r.coordinate->lon());
      break;
    case GeoTagKind::kDegeneratePlaceBox: {
      const GeoBox& b = r.place->box;
      ++degenerate_;
      degenerate_boxes_.insert({b.sw().lat(), b.sw().lon(), b.ne().lat(), b.ne().lon()});
      break;
    }
    case GeoTagKind::kVariablePlaceBox: {
      const GeoBox& b = r.place->box;
      ++variable_;
      variable_boxes_.insert({b.sw().lat(), b.sw().lon(), b.ne().lat(), b.ne().lon()});
      break;
    }
    case GeoTagKind::kUntagged: ++untagged_; break;
  }
}

void GeotagTally::merge(const GeotagTally& other) {
  points_.insert(other.points_.begin(), other.points_.end());
  degenerate_boxes_.insert(other.degenerate_boxes_.begin(), other.degenerate_boxes_.end());
  variable_boxes_.insert(other.variable_boxes_.begin(), other.variable_boxes_.end());
  precise_ += other.precise_;
  degenerate_ += other.degenerate_;
  variable_ += other.variable_;
  untagged_ += other.untagged_;
}

GeotagBreakdown GeotagTally::result() const {
  GeotagBreakdown out;
  out.precise = {points_.size(), precise_, 0.0};
  out.degenerate = {degenerate_boxes_.size(), degenerate_, 0.0};
  out.variable = {variable_boxes_.size(), variable_, 0.0};
  out.untagged = untagged_;
  const std::uint64_t tagged = precise_ + degenerate_ + variable_;
  if (tagged > 0) {
    const double t = static_cast<double>(tagged);
    out.precise.percentage = 100.0 * static_cast<double>(precise_) / t;
    out.degenerate.percentage = 100.0 * static_cast<double>(degenerate_) / t;
    out.variable.percentage = 100.0 * static_cast<double>(variable_) / t;
  }
  return out;
}

GeotagBreakdown geotag_breakdown(std::span<const TweetRecord> records) {
  GeotagTally tally;
  for (const auto& r : records) tally.add(r);
  return tally.result();
}

}  // namespace citypulse
