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

#ifndef ILCRACE_VEHICLE_HPP_
#define ILCRACE_VEHICLE_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "ilcrace/track.hpp"

namespace ilcrace {

inline constexpr double kGravity = 9.81;

// Single-track vehicle and lanekeeping-controller parameters. Defaults are
// the Audi TTS values; friction is not part of that table and is set so an
// 8 m/s^2 profile runs close to, but below, the tire limits.
struct VehicleParams {
  double mass = 1500.0;             // kg
  double yaw_inertia = 2250.0;      // kg m^2
  double cg_to_front = 1.04;        // a, m
  double cg_to_rear = 1.42;         // b, m
  double front_stiffness = 160e3;   // C_F, N/rad
  double rear_stiffness = 180e3;    // C_R, N/rad
  double friction = 0.95;           // mu
  double lanekeeping_gain = 0.053;  // k_P, rad/m
  double lookahead = 15.2;          // x_LA, m

  double wheelbase() const { return cg_to_front + cg_to_rear; }
  double front_load() const { return mass * kGravity * cg_to_rear / wheelbase(); }
  double rear_load() const { return mass * kGravity * cg_to_front / wheelbase(); }

  // Throws ValidationError unless every field is finite and positive.
  void validate() const;
};

// Ordered as [e, dPsi, r, beta] everywhere, matching the lifted model.
struct VehicleState {
  double lateral_error = 0.0;  // e, m
  double heading_error = 0.0;  // dPsi, rad
  double yaw_rate = 0.0;       // r, rad/s
  double sideslip = 0.0;       // beta, rad
};

enum class TireModel { kLinear, kFiala };

struct SimConfig {
  double inner_dt = 0.005;
  TireModel tire_model = TireModel::kFiala;
  bool include_feedforward = false;
  double sensor_noise_std = 0.0;  // m; 0 disables
  std::uint64_t noise_seed = 0;
};

struct LapRecord {
  int iteration = 0;
  std::vector<double> errors;  // e(t_1) .. e(t_N)
  std::vector<double> inputs;  // delta_L(t_0) .. delta_L(t_{N-1})
  double rms_error = 0.0;
  double peak_error = 0.0;
};

struct SlipAngles {
  double front;
  double rear;
};

// Brush tire with parabolic pressure distribution, saturating at mu*F_z.
double fiala_force(double slip_angle, double stiffness, double friction,
                   double normal_load);
double linear_force(double slip_angle, double stiffness);

SlipAngles slip_angles(const VehicleState& state, double steer, double speed,
                       const VehicleParams& params);

// delta_FB = -k_P (e + x_LA dPsi)
double lookahead_feedback(double lateral_error, double heading_error,
                          const VehicleParams& params);

// Time derivative of the bicycle-model state for a total road-wheel angle.
VehicleState derivatives(const VehicleState& state, double steer, double speed,
                         double curvature, const VehicleParams& params,
                         TireModel tire_model);

// Kinematic steer plus the steady-state understeer term.
double feedforward_steer(double curvature, double speed,
                         const VehicleParams& params);

// One lap of the closed loop: lookahead feedback plus the learned input
// (looked up by distance from the grid samples) plus optional feedforward.
// Starts from the zero state; speed follows the profile. Throws
// DivergenceError when |e| exceeds 20 m.
LapRecord simulate_lap(const TrackProfile& track, const SpeedProfile& speed,
                       const TimeGrid& grid, const VehicleParams& params,
                       const SimConfig& sim, std::span<const double> learned,
                       int iteration = 0);

inline constexpr double kDivergenceLimit = 20.0;

}  // namespace ilcrace

#endif  // ILCRACE_VEHICLE_HPP_
