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

#include "ilcrace/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <random>
#include <string>
#include <thread>
#include <type_traits>

#include "ilcrace/error.hpp"

namespace ilcrace {

double rms(std::span<const double> errors) {
  if (errors.empty()) throw ValidationError("rms: empty error vector");
  double sum = 0.0;
  for (double e : errors) sum += e * e;
  return std::sqrt(sum / static_cast<double>(errors.size()));
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (track_source.empty()) fail("track_source must not be empty");
  if (accel_levels.empty()) fail("accel_levels must not be empty");
  for (double a : accel_levels) {
    if (!std::isfinite(a) || !(a > 0.0)) fail("accel_levels must be positive");
  }
  if (!std::isfinite(v_max) || !(v_max > 0.0)) fail("v_max must be positive");
  if (laps < 1) fail("laps must be >= 1");
  if (stop_after && *stop_after < 0) fail("stop_after must be >= 0");
  if (!std::isfinite(sample_time) || !(sample_time > 0.0)) {
    fail("sample_time must be positive");
  }
  if (!std::isfinite(inner_dt) || !(inner_dt > 0.0)) fail("inner_dt must be positive");
  const double ratio = sample_time / inner_dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
    fail("inner_dt must divide sample_time");
  }
  if (!std::isfinite(noise_std) || noise_std < 0.0) fail("noise_std must be >= 0");
  if (max_samples && *max_samples == 0) fail("max_samples must be >= 1");
  try {
    vehicle.validate();
  } catch (const ValidationError& e) {
    fail(e.what());
  }
  if (const auto* pd = std::get_if<PdDescriptor>(&learner)) {
    if (!std::isfinite(pd->kp) || !std::isfinite(pd->kd)) {
      fail("learner gains must be finite");
    }
    if (pd->cutoff_hz &&
        (!(*pd->cutoff_hz > 0.0) || !(*pd->cutoff_hz < 0.5 / sample_time))) {
      fail("learner cutoff_hz must lie between 0 and the Nyquist frequency");
    }
  } else if (const auto* q = std::get_if<QilcDescriptor>(&learner)) {
    for (const Weight* w : {&q->weights.T, &q->weights.R, &q->weights.S}) {
      if (!w->is_scalar()) continue;
      if (!std::isfinite(w->scalar()) || w->scalar() < 0.0) {
        fail("learner weights must be finite and >= 0");
      }
    }
  }
}

Scenario load_scenario(const ExperimentConfig& config) {
  const double top = *std::max_element(config.accel_levels.begin(),
                                       config.accel_levels.end());
  if (config.track_source == "synthetic") {
    TrackProfile track = synthetic_track();
    SpeedProfile speed = generate_speed_profile(track, top, config.v_max);
    return {std::move(track), std::move(speed), top};
  }
  LoadedTrack loaded = load_track(config.track_source);
  if (loaded.speed) {
    const double peak = peak_combined_acceleration(loaded.track, *loaded.speed);
    return {std::move(loaded.track), std::move(*loaded.speed), peak};
  }
  SpeedProfile speed = generate_speed_profile(loaded.track, top, config.v_max);
  return {std::move(loaded.track), std::move(speed), top};
}

SpeedProfile speed_for_level(const Scenario& scenario, double accel_level) {
  if (!(accel_level > 0.0)) throw ValidationError("acceleration level must be > 0");
  // Straight-only tracks have no acceleration to scale.
  if (!(scenario.base_accel > 0.0)) return scenario.base_speed;
  if (accel_level == scenario.base_accel) return scenario.base_speed;
  return scale_profile(scenario.base_speed,
                       std::sqrt(accel_level / scenario.base_accel));
}

std::uint64_t lap_seed(std::uint64_t seed, int lap) {
  // splitmix64 finalizer over a per-lap offset.
  std::uint64_t z = seed + (static_cast<std::uint64_t>(lap) + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

double clamped_lookup(const LearnedInput& table, double s) {
  const auto& x = table.distances;
  const auto& y = table.delta;
  if (x.size() == 1 || s <= x.front()) return y.front();
  if (s >= x.back()) return y.back();
  const auto it = std::upper_bound(x.begin(), x.end(), s);
  const std::size_t hi = static_cast<std::size_t>(it - x.begin());
  const std::size_t lo = hi - 1;
  const double t = (s - x[lo]) / (x[hi] - x[lo]);
  return y[lo] + t * (y[hi] - y[lo]);
}

Eigen::VectorXd initial_input(const ExperimentConfig& config,
                              const TimeGrid& grid) {
  const Eigen::Index n = static_cast<Eigen::Index>(grid.samples);
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
  if (!config.initial_input) return delta;
  const LearnedInput table = read_learned_input(*config.initial_input);
  for (std::size_t i = 1; i < table.distances.size(); ++i) {
    if (!(table.distances[i] > table.distances[i - 1])) {
      throw ParseError(*config.initial_input + ": s_m must increase");
    }
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    delta(k) = clamped_lookup(table, grid.distances[static_cast<std::size_t>(k)]);
  }
  return delta;
}

bool needs_lifted(const ExperimentConfig& config, std::size_t n) {
  return config.plant == PlantKind::kLinear ||
         !std::holds_alternative<PdDescriptor>(config.learner) ||
         n <= config.gamma_window;
}

LapRecord linear_lap(const ExperimentConfig& config, const LiftedSystem& lifted,
                     const Eigen::VectorXd& feedforward,
                     const Eigen::VectorXd& delta, int lap) {
  Eigen::VectorXd e = lifted.P.triangularView<Eigen::Lower>() * (delta + feedforward);
  e += lifted.d;
  if (config.noise_std > 0.0) {
    std::mt19937_64 rng(lap_seed(config.seed, lap));
    std::normal_distribution<double> noise(0.0, 1.0);
    for (Eigen::Index k = 0; k < e.size(); ++k) e(k) += config.noise_std * noise(rng);
  }
  LapRecord record;
  record.iteration = lap;
  record.inputs.assign(delta.data(), delta.data() + delta.size());
  record.errors.assign(e.data(), e.data() + e.size());
  double peak = 0.0;
  for (double v : record.errors) {
    if (!std::isfinite(v)) peak = INFINITY;
    peak = std::max(peak, std::abs(v));
  }
  if (peak > kDivergenceLimit) {
    throw DivergenceError("lap " + std::to_string(lap) + ": |e| exceeded " +
                              std::to_string(kDivergenceLimit) + " m",
                          lap);
  }
  record.peak_error = peak;
  record.rms_error = rms(record.errors);
  return record;
}

}  // namespace

TimeGrid experiment_grid(const ExperimentConfig& config,
                         const Scenario& scenario, double accel_level) {
  TimeGrid grid = build_time_grid(scenario.track,
                                  speed_for_level(scenario, accel_level),
                                  config.sample_time);
  if (config.max_samples && *config.max_samples < grid.samples) {
    grid = truncate_grid(grid, *config.max_samples);
  }
  return grid;
}

LearningOperator make_learning_operator(const ExperimentConfig& config,
                                        const LiftedSystem* lifted,
                                        std::size_t samples) {
  if (const auto* pd = std::get_if<PdDescriptor>(&config.learner)) {
    return pd_operator(pd->kp, pd->kd, samples, pd->cutoff_hz, config.sample_time);
  }
  if (lifted == nullptr) throw ValidationError("learner needs the lifted system");
  if (const auto* q = std::get_if<QilcDescriptor>(&config.learner)) {
    return qilc_operator(lifted->P, q->weights);
  }
  return deadbeat_operator(lifted->P);
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const Scenario& scenario, double accel_level) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  const SpeedProfile speed = speed_for_level(scenario, accel_level);
  TimeGrid grid = experiment_grid(config, scenario, accel_level);
  const std::size_t n = grid.samples;

  std::optional<LiftedSystem> lifted;
  if (needs_lifted(config, n)) {
    lifted = build_lifted(grid, scenario.track, config.vehicle);
  }
  const LearningOperator op = make_learning_operator(config, lifted ? &*lifted : nullptr, n);

  ExperimentResult result;
  result.config = config;
  result.accel_level = accel_level;
  if (lifted && n <= config.gamma_window) {
    try {
      result.gamma = ConvergenceAnalyzer(lifted->P, op.Q).gamma(op.L);
    } catch (const SingularityError&) {
      result.gamma.reset();
    }
  }

  Eigen::VectorXd feedforward = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  if (config.feedforward) {
    for (std::size_t k = 0; k < n; ++k) {
      feedforward(static_cast<Eigen::Index>(k)) = feedforward_steer(
          scenario.track.curvature_at(grid.distances[k]), grid.speeds[k],
          config.vehicle);
    }
  }

  SimConfig sim;
  sim.inner_dt = config.inner_dt;
  sim.tire_model = config.tire;
  sim.include_feedforward = config.feedforward;
  sim.sensor_noise_std = config.noise_std;

  Eigen::VectorXd delta = initial_input(config, grid);
  for (int lap = 0; lap < config.laps; ++lap) {
    LapRecord record;
    if (config.plant == PlantKind::kLinear) {
      record = linear_lap(config, *lifted, feedforward, delta, lap);
    } else {
      sim.noise_seed = lap_seed(config.seed, lap);
      record = simulate_lap(scenario.track, speed, grid, config.vehicle, sim,
                            std::span<const double>(delta.data(), n), lap);
    }
    result.rms_by_lap.push_back(record.rms_error);
    if (lap + 1 < config.laps && !(config.stop_after && lap >= *config.stop_after)) {
      const Eigen::Map<const Eigen::VectorXd> e(record.errors.data(),
                                                static_cast<Eigen::Index>(n));
      delta = update_input(op, delta, e);
    }
    result.laps.push_back(std::move(record));
  }
  result.grid = std::move(grid);
  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                double accel_level) {
  config.validate();
  return run_experiment(config, load_scenario(config), accel_level);
}

std::vector<ExperimentResult> run_study(const ExperimentConfig& config) {
  config.validate();
  const Scenario scenario = load_scenario(config);
  std::vector<ExperimentResult> results;
  for (double level : config.accel_levels) {
    results.push_back(run_experiment(config, scenario, level));
  }
  return results;
}

PlantComparison compare_plants(const ExperimentConfig& config,
                               double accel_level) {
  config.validate();
  const Scenario scenario = load_scenario(config);
  ExperimentConfig linear = config;
  linear.plant = PlantKind::kLinear;
  ExperimentConfig nonlinear = config;
  nonlinear.plant = PlantKind::kNonlinear;
  PlantComparison out{run_experiment(linear, scenario, accel_level),
                      run_experiment(nonlinear, scenario, accel_level),
                      {}};
  for (std::size_t j = 0; j < out.linear.rms_by_lap.size(); ++j) {
    out.rms_delta.push_back(out.nonlinear.rms_by_lap[j] - out.linear.rms_by_lap[j]);
  }
  return out;
}

std::vector<double> linspace(double start, double stop, std::size_t count) {
  std::vector<double> out;
  out.reserve(count);
  if (count == 1) {
    out.push_back(start);
    return out;
  }
  for (std::size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    out.push_back(i + 1 == count ? stop : start + t * (stop - start));
  }
  return out;
}

SweepResult gamma_sweep(const SweepConfig& config) {
  if (config.kp.empty() || config.kd.empty()) {
    throw ValidationError("gamma sweep: gain ranges must be nonempty");
  }
  if (config.window == 0) throw ValidationError("gamma sweep: window must be >= 1");
  if (!(config.sample_time > 0.0)) throw ValidationError("gamma sweep: T_s must be > 0");

  LiftedSystem lifted;
  if (config.ltv) {
    ExperimentConfig experiment;
    experiment.track_source = config.track_source;
    experiment.accel_levels = {config.accel_level};
    experiment.v_max = config.v_max;
    const Scenario scenario = load_scenario(experiment);
    TimeGrid grid = build_time_grid(
        scenario.track, speed_for_level(scenario, config.accel_level),
        config.sample_time);
    if (grid.samples > config.window) grid = truncate_grid(grid, config.window);
    lifted = build_lifted(grid, scenario.track, config.vehicle);
  } else {
    if (!(config.speed > 0.0)) throw ValidationError("gamma sweep: speed must be > 0");
    lifted = build_constant_speed_lifted(config.speed, config.window,
                                         config.sample_time, config.vehicle);
  }
  const std::size_t n = lifted.samples();
  const Eigen::MatrixXd Q =
      config.filter_hz ? zero_phase_filter(*config.filter_hz, config.sample_time, n)
                       : Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                                   static_cast<Eigen::Index>(n));

  SweepResult result;
  result.samples = n;
  for (double kp : config.kp) {
    for (double kd : config.kd) result.cells.push_back({kp, kd, 0.0, false, {}});
  }

  std::optional<ConvergenceAnalyzer> analyzer;
  try {
    analyzer.emplace(lifted.P, Q);
  } catch (const SingularityError& e) {
    for (SweepCell& cell : result.cells) {
      cell.gamma = INFINITY;
      cell.diagnostic = e.what();
    }
    return result;
  }

  // Cells are independent; each thread writes only the cells it claims.
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < result.cells.size(); i = next++) {
      SweepCell& cell = result.cells[i];
      cell.gamma = analyzer->gamma_pd(cell.kp, cell.kd);
      cell.stable = cell.gamma < 1.0;
    }
  };
  unsigned threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(result.cells.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  return result;
}

Eigen::VectorXd converged_error(const LiftedSystem& lifted,
                                const LearningOperator& op) {
  const Eigen::Index n = lifted.P.rows();
  const Eigen::MatrixXd QL = op.Q * op.L;
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - op.Q + QL * lifted.P;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) {
    throw SingularityError("fixed point: I - Q + Q L P is singular");
  }
  const Eigen::VectorXd delta = lu.solve(Eigen::VectorXd(-QL * lifted.d));
  return lifted.P * delta + lifted.d;
}

}  // namespace ilcrace
