// Copyright 2026 The ilcrace Authors
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
#include <numbers>
#include <vector>

#include "ilcrace/track.hpp"

namespace ilcrace {
namespace {

// Piece of the racing line along which curvature varies linearly.
struct Segment {
  double length;
  double kappa_start;
  double kappa_end;
};

class Layout {
 public:
  void straight(double length) { segments_.push_back({length, 0.0, 0.0}); }

  // 90 degree left corner of radius `radius`: clothoid entry, arc, clothoid
  // exit. Each clothoid contributes half the arc curvature over its length.
  void corner(double radius, double clothoid) {
    const double k = 1.0 / radius;
    const double arc = 0.5 * std::numbers::pi * radius - clothoid;
    segments_.push_back({clothoid, 0.0, k});
    segments_.push_back({arc, k, k});
    segments_.push_back({clothoid, k, 0.0});
  }

  // Left-right S bend with zero net heading change.
  void chicane(double radius, double clothoid, double hold) {
    const double k = 1.0 / radius;
    segments_.push_back({clothoid, 0.0, k});
    segments_.push_back({hold, k, k});
    segments_.push_back({2.0 * clothoid, k, -k});
    segments_.push_back({hold, -k, -k});
    segments_.push_back({clothoid, -k, 0.0});
  }

  double length() const {
    double total = 0.0;
    for (const Segment& seg : segments_) total += seg.length;
    return total;
  }

  double curvature(double s) const {
    double start = 0.0;
    for (const Segment& seg : segments_) {
      if (s <= start + seg.length) {
        const double t = (s - start) / seg.length;
        return seg.kappa_start + t * (seg.kappa_end - seg.kappa_start);
      }
      start += seg.length;
    }
    return segments_.back().kappa_end;
  }

 private:
  std::vector<Segment> segments_;
};

}  // namespace

TrackProfile synthetic_track() {
  Layout layout;
  layout.straight(500.0);
  layout.corner(60.0, 30.0);
  layout.straight(150.0);
  layout.chicane(80.0, 25.0, 30.0);
  layout.straight(200.0);
  layout.corner(120.0, 40.0);
  layout.straight(600.0);
  layout.corner(80.0, 30.0);
  layout.straight(150.0);
  layout.chicane(100.0, 25.0, 30.0);
  layout.straight(200.0);
  layout.corner(150.0, 40.0);
  layout.straight(kSyntheticLapLength - layout.length());

  const auto count = static_cast<std::size_t>(
      std::lround(kSyntheticLapLength / kSyntheticStationSpacing));
  std::vector<double> stations(count + 1), curvature(count + 1);
  for (std::size_t i = 0; i <= count; ++i) {
    stations[i] = static_cast<double>(i) * kSyntheticStationSpacing;
    curvature[i] = layout.curvature(stations[i]);
  }
  return TrackProfile(std::move(stations), std::move(curvature));
}

}  // namespace ilcrace
