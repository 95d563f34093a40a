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

#ifndef ILCRACE_HARNESS_HPP_
#define ILCRACE_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ilcrace/ilc.hpp"
#include "ilcrace/lifted.hpp"
#include "ilcrace/track.hpp"
#include "ilcrace/vehicle.hpp"

namespace ilcrace {

double rms(std::span<const double> errors);

enum class PlantKind { kLinear, kNonlinear };

inline constexpr std::uint64_t kDefaultSeed = 20120627;

struct ExperimentConfig {
  std::string track_source = "synthetic";  // "synthetic" or a track CSV path
  std::vector<double> accel_levels{8.0};   // m/s^2
  double v_max = 45.0;                     // m/s, synthetic profile only
  PlantKind plant = PlantKind::kNonlinear;
  TireModel tire = TireModel::kFiala;
  LearnerDescriptor learner = PdDescriptor{0.01, 0.05, 2.0};
  int laps = 10;
  std::optional<int> stop_after;  // input frozen from this lap on
  double sample_time = 0.1;
  double inner_dt = 0.005;
  double noise_std = 0.0;  // m
  std::uint64_t seed = kDefaultSeed;
  bool feedforward = false;
  std::optional<std::string> initial_input;  // learned-input CSV
  std::optional<std::size_t> max_samples;    // truncates the lap grid
  std::size_t gamma_window = 400;  // gamma is reported when N <= window
  VehicleParams vehicle;

  // Throws ConfigError.
  void validate() const;
};

// Track plus the base speed profile that every level is scaled from.
struct Scenario {
  TrackProfile track;
  SpeedProfile base_speed;
  double base_accel;  // peak combined acceleration of base_speed
};

Scenario load_scenario(const ExperimentConfig& config);

SpeedProfile speed_for_level(const Scenario& scenario, double accel_level);

// Lap grid at a level, truncated to config.max_samples.
TimeGrid experiment_grid(const ExperimentConfig& config,
                         const Scenario& scenario, double accel_level);

// lifted may be null for the PD learner.
LearningOperator make_learning_operator(const ExperimentConfig& config,
                                        const LiftedSystem* lifted,
                                        std::size_t samples);

struct ExperimentResult {
  ExperimentConfig config;
  double accel_level = 0.0;
  TimeGrid grid;
  std::vector<LapRecord> laps;
  std::vector<double> rms_by_lap;
  std::optional<double> gamma;
  double wall_time = 0.0;  // s; not exported
};

ExperimentResult run_experiment(const ExperimentConfig& config,
                                double accel_level);
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const Scenario& scenario, double accel_level);

// One result per configured acceleration level.
std::vector<ExperimentResult> run_study(const ExperimentConfig& config);

struct PlantComparison {
  ExperimentResult linear;
  ExperimentResult nonlinear;
  std::vector<double> rms_delta;  // nonlinear - linear, per lap
};

PlantComparison compare_plants(const ExperimentConfig& config,
                               double accel_level);

struct SweepConfig {
  std::vector<double> kp;
  std::vector<double> kd;
  std::optional<double> filter_hz = 2.0;
  double speed = 20.0;  // m/s, constant-speed mode
  double sample_time = 0.1;
  std::size_t window = 400;
  // LTV mode: first `window` samples of the lap grid at `accel_level`.
  bool ltv = false;
  std::string track_source = "synthetic";
  double accel_level = 8.0;
  double v_max = 45.0;
  unsigned threads = 0;  // 0 = hardware concurrency
  VehicleParams vehicle;
};

struct SweepCell {
  double kp = 0.0;
  double kd = 0.0;
  double gamma = 0.0;
  bool stable = false;
  std::string diagnostic;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // kp-major
  std::size_t samples = 0;
};

std::vector<double> linspace(double start, double stop, std::size_t count);

SweepResult gamma_sweep(const SweepConfig& config);

// Fixed-point error of the linear plant under a learning operator.
Eigen::VectorXd converged_error(const LiftedSystem& lifted,
                                const LearningOperator& op);

std::uint64_t lap_seed(std::uint64_t seed, int lap);

}  // namespace ilcrace

#endif  // ILCRACE_HARNESS_HPP_
