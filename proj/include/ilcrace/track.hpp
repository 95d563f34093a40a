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

#ifndef ILCRACE_TRACK_HPP_
#define ILCRACE_TRACK_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace ilcrace {

// Racing-line curvature kappa(s) sampled at strictly increasing stations that
// start at 0 and end at the lap length.
class TrackProfile {
 public:
  // Throws ValidationError when the invariants do not hold.
  TrackProfile(std::vector<double> stations, std::vector<double> curvature);

  std::span<const double> stations() const { return stations_; }
  std::span<const double> curvature() const { return curvature_; }
  double lap_length() const { return stations_.back(); }
  std::size_t size() const { return stations_.size(); }

  // Linearly interpolated curvature; s wraps modulo the lap length.
  double curvature_at(double s) const;

 private:
  std::vector<double> stations_;
  std::vector<double> curvature_;
};

// Target forward speed U_x(s) on the stations of a TrackProfile.
//
// Speeds are kept as base values times a scale factor so that repeated
// scaling composes exactly: scale(scale(p, a), b) == scale(p, a * b).
class SpeedProfile {
 public:
  SpeedProfile(std::vector<double> stations, std::vector<double> speed);

  std::span<const double> stations() const { return stations_; }
  std::size_t size() const { return stations_.size(); }
  double lap_length() const { return stations_.back(); }
  double scale() const { return scale_; }

  double speed(std::size_t i) const { return base_[i] * scale_; }
  std::vector<double> speeds() const;

  // Linearly interpolated speed; s wraps modulo the lap length.
  double speed_at(double s) const;

  friend SpeedProfile scale_profile(const SpeedProfile& profile,
                                    double factor);

 private:
  std::vector<double> stations_;
  std::vector<double> base_;
  double scale_ = 1.0;
};

// Learning-controller sample grid for one lap. Entries are stored for
// k = 0..N so that the error sample e(N) has a distance too; inputs use
// k = 0..N-1.
struct TimeGrid {
  double sample_time = 0.0;
  std::size_t samples = 0;  // N
  double lap_time = 0.0;
  std::vector<double> times;      // t_k, size N+1
  std::vector<double> distances;  // s(t_k), size N+1
  std::vector<double> speeds;     // U_x(t_k), size N+1
};

struct LoadedTrack {
  TrackProfile track;
  std::optional<SpeedProfile> speed;
};

// Linear interpolation over (stations, values) with s wrapped into
// [0, stations.back()). Stations must be increasing and start at 0.
double sample_at_distance(std::span<const double> stations,
                          std::span<const double> values, double s);

// Reads the `s_m,kappa_1pm[,speed_mps]` CSV format.
LoadedTrack load_track(const std::filesystem::path& path);
void write_track(const std::filesystem::path& path, const TrackProfile& track,
                 const SpeedProfile* speed = nullptr);

// Friction-circle speed profile: pointwise lateral cap, then forward and
// backward passes so that (kappa U^2)^2 + (U dU/ds)^2 <= accel_limit^2 holds
// on every station interval (evaluated at the interval midpoint with U^2
// varying linearly in s). The closed circuit is treated periodically.
SpeedProfile generate_speed_profile(const TrackProfile& track,
                                    double accel_limit, double v_max);

SpeedProfile scale_profile(const SpeedProfile& profile, double factor);

// Largest combined acceleration over station intervals, using the same
// midpoint convention as generate_speed_profile.
double peak_combined_acceleration(const TrackProfile& track,
                                  const SpeedProfile& speed);

// Integrates ds/dt = U_x(s) with fixed-step RK4 (step T_s/20) from s = 0
// until the lap length is reached. N = ceil(lap_time / T_s).
TimeGrid build_time_grid(const TrackProfile& track, const SpeedProfile& speed,
                         double sample_time);

// First `samples` learning samples of a grid (a window for lifted analysis).
TimeGrid truncate_grid(const TimeGrid& grid, std::size_t samples);

// Straight track of the given length with a constant speed profile. Used for
// the constant-speed (LTI) analysis.
LoadedTrack constant_speed_track(double length, double speed);

// Deterministic synthetic circuit: two long straights, four constant-radius
// corners and two chicanes, all joined by clothoid (linear-curvature) blends.
inline constexpr double kSyntheticLapLength = 3000.0;
inline constexpr double kSyntheticStationSpacing = 1.0;
TrackProfile synthetic_track();

}  // namespace ilcrace

#endif  // ILCRACE_TRACK_HPP_
