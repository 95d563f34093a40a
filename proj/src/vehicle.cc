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

#include "ilcrace/vehicle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "ilcrace/error.hpp"
#include "ilcrace/harness.hpp"

namespace ilcrace {

void VehicleParams::validate() const {
  const double fields[] = {mass,           yaw_inertia,    cg_to_front,
                           cg_to_rear,     front_stiffness, rear_stiffness,
                           friction,       lanekeeping_gain, lookahead};
  for (double v : fields) {
    if (!std::isfinite(v) || !(v > 0.0)) {
      throw ValidationError("vehicle parameters must all be positive");
    }
  }
}

double fiala_force(double slip_angle, double stiffness, double friction,
                   double normal_load) {
  const double limit = friction * normal_load;
  const double saturation = std::atan(3.0 * limit / stiffness);
  if (std::abs(slip_angle) >= saturation) {
    return slip_angle > 0.0 ? -limit : limit;
  }
  const double t = std::tan(slip_angle);
  return -stiffness * t +
         stiffness * stiffness / (3.0 * limit) * std::abs(t) * t -
         stiffness * stiffness * stiffness / (27.0 * limit * limit) * t * t * t;
}

double linear_force(double slip_angle, double stiffness) {
  return -stiffness * slip_angle;
}

SlipAngles slip_angles(const VehicleState& state, double steer, double speed,
                       const VehicleParams& params) {
  return {state.sideslip + params.cg_to_front * state.yaw_rate / speed - steer,
          state.sideslip - params.cg_to_rear * state.yaw_rate / speed};
}

double lookahead_feedback(double lateral_error, double heading_error,
                          const VehicleParams& params) {
  return -params.lanekeeping_gain *
         (lateral_error + params.lookahead * heading_error);
}

VehicleState derivatives(const VehicleState& state, double steer, double speed,
                         double curvature, const VehicleParams& params,
                         TireModel tire_model) {
  const SlipAngles alpha = slip_angles(state, steer, speed, params);
  double front = 0.0;
  double rear = 0.0;
  if (tire_model == TireModel::kLinear) {
    front = linear_force(alpha.front, params.front_stiffness);
    rear = linear_force(alpha.rear, params.rear_stiffness);
  } else {
    front = fiala_force(alpha.front, params.front_stiffness, params.friction,
                        params.front_load());
    rear = fiala_force(alpha.rear, params.rear_stiffness, params.friction,
                       params.rear_load());
  }
  VehicleState rate;
  rate.lateral_error = speed * (state.sideslip + state.heading_error);
  rate.heading_error = state.yaw_rate - speed * curvature;
  rate.yaw_rate =
      (params.cg_to_front * front - params.cg_to_rear * rear) / params.yaw_inertia;
  rate.sideslip = (front + rear) / (params.mass * speed) - state.yaw_rate;
  return rate;
}

double feedforward_steer(double curvature, double speed,
                         const VehicleParams& params) {
  const double understeer =
      params.mass / params.wheelbase() *
      (params.cg_to_rear / params.front_stiffness -
       params.cg_to_front / params.rear_stiffness);
  return curvature * params.wheelbase() + curvature * speed * speed * understeer;
}

namespace {

using Vec5 = std::array<double, 5>;  // e, dPsi, r, beta, s

Vec5 axpy(const Vec5& x, double a, const Vec5& y) {
  Vec5 out;
  for (std::size_t i = 0; i < 5; ++i) out[i] = x[i] + a * y[i];
  return out;
}

// Distance-indexed lookup of the learned steering table, clamped at the ends.
class LearnedTable {
 public:
  LearnedTable(std::span<const double> stations, std::span<const double> values)
      : stations_(stations), values_(values) {}

  double at(double s) const {
    if (s <= stations_.front()) return values_.front();
    if (s >= stations_.back()) return values_.back();
    auto it = std::upper_bound(stations_.begin(), stations_.end(), s);
    const std::size_t hi = static_cast<std::size_t>(it - stations_.begin());
    const std::size_t lo = hi - 1;
    const double t = (s - stations_[lo]) / (stations_[hi] - stations_[lo]);
    return values_[lo] + t * (values_[hi] - values_[lo]);
  }

 private:
  std::span<const double> stations_;
  std::span<const double> values_;
};

}  // namespace

LapRecord simulate_lap(const TrackProfile& track, const SpeedProfile& speed,
                       const TimeGrid& grid, const VehicleParams& params,
                       const SimConfig& sim, std::span<const double> learned,
                       int iteration) {
  const std::size_t n = grid.samples;
  if (learned.size() != n) {
    throw ValidationError("simulate_lap: learned input has length " +
                          std::to_string(learned.size()) + ", grid has N = " +
                          std::to_string(n));
  }
  if (!(sim.inner_dt > 0.0)) {
    throw ValidationError("simulate_lap: inner_dt must be > 0");
  }
  const double ratio = grid.sample_time / sim.inner_dt;
  const long substeps = std::lround(ratio);
  if (substeps < 1 || std::abs(ratio - static_cast<double>(substeps)) > 1e-9 * ratio) {
    throw ValidationError("simulate_lap: inner_dt must divide the sample time");
  }
  if (!(sim.sensor_noise_std >= 0.0)) {
    throw ValidationError("simulate_lap: sensor noise std must be >= 0");
  }

  const LearnedTable table(
      std::span<const double>(grid.distances.data(), n), learned);
  const double h = grid.sample_time / static_cast<double>(substeps);

  auto rhs = [&](const Vec5& y) -> Vec5 {
    const double s = y[4];
    const double u = speed.speed_at(s);
    const double kappa = track.curvature_at(s);
    double steer = lookahead_feedback(y[0], y[1], params) + table.at(s);
    if (sim.include_feedforward) steer += feedforward_steer(kappa, u, params);
    const VehicleState rate =
        derivatives({y[0], y[1], y[2], y[3]}, steer, u, kappa, params,
                    sim.tire_model);
    return {rate.lateral_error, rate.heading_error, rate.yaw_rate,
            rate.sideslip, u};
  };

  LapRecord record;
  record.iteration = iteration;
  record.inputs.assign(learned.begin(), learned.end());
  record.errors.resize(n);

  std::mt19937_64 rng(sim.noise_seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  Vec5 y{0.0, 0.0, 0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < n; ++k) {
    for (long i = 0; i < substeps; ++i) {
      const Vec5 k1 = rhs(y);
      const Vec5 k2 = rhs(axpy(y, 0.5 * h, k1));
      const Vec5 k3 = rhs(axpy(y, 0.5 * h, k2));
      const Vec5 k4 = rhs(axpy(y, h, k3));
      for (std::size_t j = 0; j < 5; ++j) {
        y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
      }
      if (!std::isfinite(y[0]) || std::abs(y[0]) > kDivergenceLimit) {
        throw DivergenceError(
            "lap " + std::to_string(iteration) + ": |e| exceeded " +
                std::to_string(kDivergenceLimit) + " m at s = " +
                std::to_string(y[4]) + " m",
            iteration);
      }
    }
    double e = y[0];
    if (sim.sensor_noise_std > 0.0) e += sim.sensor_noise_std * noise(rng);
    record.errors[k] = e;
  }
  record.rms_error = rms(record.errors);
  double peak = 0.0;
  for (double e : record.errors) peak = std::max(peak, std::abs(e));
  record.peak_error = peak;
  return record;
}

}  // namespace ilcrace
