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

#include "ilcrace/track.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "csv.hpp"
#include "ilcrace/error.hpp"

namespace ilcrace {
namespace {

void check_stations(std::span<const double> stations, const char* what) {
  if (stations.size() < 2) {
    throw ValidationError(std::string(what) + ": need at least 2 stations");
  }
  if (stations.front() != 0.0) {
    throw ValidationError(std::string(what) + ": first station must be 0");
  }
  for (std::size_t i = 1; i < stations.size(); ++i) {
    if (!std::isfinite(stations[i]) || !(stations[i] > stations[i - 1])) {
      throw ValidationError(std::string(what) +
                            ": stations must be strictly increasing (row " +
                            std::to_string(i) + ")");
    }
  }
}

void check_aligned(const TrackProfile& track, const SpeedProfile& speed) {
  if (track.size() != speed.size() ||
      !std::equal(track.stations().begin(), track.stations().end(),
                  speed.stations().begin())) {
    throw ValidationError("speed profile stations do not match the track");
  }
}

// Largest u = U^2 at the far end of a station interval reachable from u0 at
// the near end with (km (u0+u)/2)^2 + ((u-u0)/(2 ds))^2 <= a^2.
double reachable_speed_squared(double u0, double km, double ds, double a) {
  const double alpha = 0.25 * km * km;
  const double beta = 0.25 / (ds * ds);
  const double disc = std::max(0.0, (alpha + beta) * a * a - 4.0 * alpha * beta * u0 * u0);
  return (-(alpha - beta) * u0 + std::sqrt(disc)) / (alpha + beta);
}

}  // namespace

TrackProfile::TrackProfile(std::vector<double> stations,
                           std::vector<double> curvature)
    : stations_(std::move(stations)), curvature_(std::move(curvature)) {
  if (stations_.size() != curvature_.size()) {
    throw ValidationError("track: stations and curvature differ in length");
  }
  check_stations(stations_, "track");
  for (double k : curvature_) {
    if (!std::isfinite(k)) throw ValidationError("track: curvature not finite");
  }
}

double TrackProfile::curvature_at(double s) const {
  return sample_at_distance(stations_, curvature_, s);
}

SpeedProfile::SpeedProfile(std::vector<double> stations,
                           std::vector<double> speed)
    : stations_(std::move(stations)), base_(std::move(speed)) {
  if (stations_.size() != base_.size()) {
    throw ValidationError("speed profile: stations and speed differ in length");
  }
  check_stations(stations_, "speed profile");
  for (double u : base_) {
    if (!std::isfinite(u) || !(u > 0.0)) {
      throw ValidationError("speed profile: speed must be positive everywhere");
    }
  }
}

std::vector<double> SpeedProfile::speeds() const {
  std::vector<double> out(base_.size());
  for (std::size_t i = 0; i < base_.size(); ++i) out[i] = speed(i);
  return out;
}

double SpeedProfile::speed_at(double s) const {
  return sample_at_distance(stations_, base_, s) * scale_;
}

double sample_at_distance(std::span<const double> stations,
                          std::span<const double> values, double s) {
  if (stations.size() == 1) return values.front();
  const double length = stations.back();
  double w = std::fmod(s, length);
  if (w < 0.0) w += length;
  // upper_bound gives the first station strictly beyond w; w < length.
  auto it = std::upper_bound(stations.begin(), stations.end(), w);
  const std::size_t hi = std::min<std::size_t>(
      static_cast<std::size_t>(it - stations.begin()), stations.size() - 1);
  const std::size_t lo = hi - 1;
  const double t = (w - stations[lo]) / (stations[hi] - stations[lo]);
  return values[lo] + t * (values[hi] - values[lo]);
}

LoadedTrack load_track(const std::filesystem::path& path) {
  const std::vector<std::string> lines = csv::read_lines(path);
  const std::string where = path.string();
  if (lines.empty()) throw ParseError(where + ": empty file");

  std::vector<std::string> header;
  for (auto f : csv::split(lines[0])) {
    while (!f.empty() && f.front() == ' ') f.remove_prefix(1);
    while (!f.empty() && f.back() == ' ') f.remove_suffix(1);
    header.emplace_back(f);
  }
  const bool two = header == std::vector<std::string>{"s_m", "kappa_1pm"};
  const bool three =
      header == std::vector<std::string>{"s_m", "kappa_1pm", "speed_mps"};
  if (!two && !three) {
    throw ParseError(where +
                     ": expected header 's_m,kappa_1pm[,speed_mps]', got '" +
                     lines[0] + "'");
  }

  std::vector<double> s, kappa, speed;
  std::size_t speed_cells = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = csv::split(lines[i]);
    const std::string ctx = where + ":" + std::to_string(i + 1);
    if (fields.size() != header.size()) {
      throw ParseError(ctx + ": expected " + std::to_string(header.size()) +
                       " fields, got " + std::to_string(fields.size()));
    }
    s.push_back(csv::parse_double(fields[0], ctx));
    kappa.push_back(csv::parse_double(fields[1], ctx));
    if (three && fields[2].find_first_not_of(" \t") != std::string_view::npos) {
      speed.push_back(csv::parse_double(fields[2], ctx));
      ++speed_cells;
    }
  }
  if (speed_cells != 0 && speed_cells != s.size()) {
    throw ParseError(where + ": speed column is only partially filled");
  }

  LoadedTrack out{TrackProfile(s, kappa), std::nullopt};
  if (speed_cells != 0) out.speed = SpeedProfile(std::move(s), std::move(speed));
  return out;
}

void write_track(const std::filesystem::path& path, const TrackProfile& track,
                 const SpeedProfile* speed) {
  if (speed != nullptr) check_aligned(track, *speed);
  std::ofstream out = csv::open_output(path);
  out << (speed != nullptr ? "s_m,kappa_1pm,speed_mps\n" : "s_m,kappa_1pm\n");
  for (std::size_t i = 0; i < track.size(); ++i) {
    out << csv::format_double(track.stations()[i]) << ','
        << csv::format_double(track.curvature()[i]);
    if (speed != nullptr) out << ',' << csv::format_double(speed->speed(i));
    out << '\n';
  }
  out.flush();
  if (!out) throw IoError("error while writing '" + path.string() + "'");
}

SpeedProfile generate_speed_profile(const TrackProfile& track,
                                    double accel_limit, double v_max) {
  if (!(accel_limit > 0.0) || !(v_max > 0.0)) {
    throw ValidationError("speed profile: accel_limit and v_max must be > 0");
  }
  const auto s = track.stations();
  const auto kappa = track.curvature();
  const std::size_t n = track.size();

  std::vector<double> ds(n - 1), kmid(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    ds[i] = s[i + 1] - s[i];
    kmid[i] = 0.5 * (kappa[i] + kappa[i + 1]);
  }

  // Pointwise cap on u = U^2 from the station and both adjacent midpoints.
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) {
    double kmax = std::abs(kappa[i]);
    if (i > 0) kmax = std::max(kmax, std::abs(kmid[i - 1]));
    if (i + 1 < n) kmax = std::max(kmax, std::abs(kmid[i]));
    u[i] = v_max * v_max;
    if (kmax > 0.0) u[i] = std::min(u[i], accel_limit / kmax);
  }

  // Speeds only ever decrease, so alternating passes reach a fixed point.
  for (int iter = 0; iter < 16; ++iter) {
    const std::vector<double> before = u;
    u[0] = std::min(u[0], u[n - 1]);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      u[i + 1] = std::min(
          u[i + 1], reachable_speed_squared(u[i], kmid[i], ds[i], accel_limit));
    }
    u[n - 1] = std::min(u[n - 1], u[0]);
    for (std::size_t i = n - 1; i-- > 0;) {
      u[i] = std::min(
          u[i], reachable_speed_squared(u[i + 1], kmid[i], ds[i], accel_limit));
    }
    if (u == before) break;
  }

  std::vector<double> speed(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(u[i] > 0.0)) {
      throw ValidationError("speed profile infeasible at station " +
                            std::to_string(s[i]));
    }
    speed[i] = std::sqrt(u[i]);
  }
  return SpeedProfile(std::vector<double>(s.begin(), s.end()), std::move(speed));
}

SpeedProfile scale_profile(const SpeedProfile& profile, double factor) {
  if (!std::isfinite(factor) || !(factor > 0.0)) {
    throw ValidationError("scale_profile: factor must be > 0");
  }
  SpeedProfile out = profile;
  out.scale_ = profile.scale_ * factor;
  return out;
}

double peak_combined_acceleration(const TrackProfile& track,
                                  const SpeedProfile& speed) {
  check_aligned(track, speed);
  const auto s = track.stations();
  const auto kappa = track.curvature();
  double peak = 0.0;
  for (std::size_t i = 0; i + 1 < track.size(); ++i) {
    const double u0 = speed.speed(i) * speed.speed(i);
    const double u1 = speed.speed(i + 1) * speed.speed(i + 1);
    const double lateral = 0.5 * (kappa[i] + kappa[i + 1]) * 0.5 * (u0 + u1);
    const double longitudinal = (u1 - u0) / (2.0 * (s[i + 1] - s[i]));
    peak = std::max(peak, std::hypot(lateral, longitudinal));
  }
  return peak;
}

TimeGrid build_time_grid(const TrackProfile& track, const SpeedProfile& speed,
                         double sample_time) {
  if (!(sample_time > 0.0) || !std::isfinite(sample_time)) {
    throw ValidationError("time grid: sample time must be > 0");
  }
  check_aligned(track, speed);
  constexpr int kSubsteps = 20;
  const double h = sample_time / kSubsteps;
  const double length = track.lap_length();
  const double reached = length * (1.0 - 1e-9);
  auto rate = [&](double s) { return speed.speed_at(s); };

  TimeGrid grid;
  grid.sample_time = sample_time;
  grid.times.push_back(0.0);
  grid.distances.push_back(0.0);
  grid.speeds.push_back(speed.speed_at(0.0));

  double s = 0.0;
  bool crossed = false;
  for (std::size_t k = 1;; ++k) {
    for (int i = 0; i < kSubsteps; ++i) {
      const double k1 = rate(s);
      const double k2 = rate(s + 0.5 * h * k1);
      const double k3 = rate(s + 0.5 * h * k2);
      const double k4 = rate(s + h * k3);
      const double next = s + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!crossed && next >= reached) {
        const double frac = std::clamp((length - s) / (next - s), 0.0, 1.0);
        grid.lap_time = (static_cast<double>(k - 1) * kSubsteps + i + frac) * h;
        crossed = true;
      }
      s = next;
    }
    grid.times.push_back(static_cast<double>(k) * sample_time);
    grid.distances.push_back(s);
    grid.speeds.push_back(speed.speed_at(s));
    if (crossed) {
      grid.samples = k;
      break;
    }
  }
  return grid;
}

TimeGrid truncate_grid(const TimeGrid& grid, std::size_t samples) {
  if (samples == 0 || samples > grid.samples) {
    throw ValidationError("truncate_grid: window must be in [1, N]");
  }
  TimeGrid out;
  out.sample_time = grid.sample_time;
  out.samples = samples;
  out.lap_time = std::min(grid.lap_time, samples * grid.sample_time);
  out.times.assign(grid.times.begin(), grid.times.begin() + samples + 1);
  out.distances.assign(grid.distances.begin(),
                       grid.distances.begin() + samples + 1);
  out.speeds.assign(grid.speeds.begin(), grid.speeds.begin() + samples + 1);
  return out;
}

LoadedTrack constant_speed_track(double length, double speed) {
  return LoadedTrack{TrackProfile({0.0, length}, {0.0, 0.0}),
                     SpeedProfile({0.0, length}, {speed, speed})};
}

}  // namespace ilcrace
