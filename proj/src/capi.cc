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

#include "ilcrace/ilcrace.h"

#include <cmath>
#include <limits>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ilcrace/config.hpp"
#include "ilcrace/error.hpp"
#include "ilcrace/harness.hpp"
#include "ilcrace/ilc.hpp"
#include "ilcrace/lifted.hpp"
#include "ilcrace/result_io.hpp"
#include "ilcrace/track.hpp"

struct ilc_config {
  ilcrace::ExperimentConfig config;
  std::string json;
};

struct ilc_study {
  std::vector<ilcrace::ExperimentResult> results;
};

struct ilc_sweep {
  ilcrace::SweepResult result;
};

namespace {

thread_local std::string last_error;

ilc_status fail(ilc_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs fn and maps core exceptions onto status codes.
template <typename Fn>
ilc_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return ILC_OK;
  } catch (const ilcrace::DivergenceError& e) {
    return fail(ILC_ERR_DIVERGENCE, e.what());
  } catch (const ilcrace::ParseError& e) {
    return fail(ILC_ERR_PARSE, e.what());
  } catch (const ilcrace::ValidationError& e) {
    return fail(ILC_ERR_VALIDATION, e.what());
  } catch (const ilcrace::ConfigError& e) {
    return fail(ILC_ERR_CONFIG, e.what());
  } catch (const ilcrace::IoError& e) {
    return fail(ILC_ERR_IO, e.what());
  } catch (const ilcrace::SingularityError& e) {
    return fail(ILC_ERR_NUMERIC, e.what());
  } catch (const ilcrace::FactorizationError& e) {
    return fail(ILC_ERR_NUMERIC, e.what());
  } catch (const std::bad_alloc&) {
    return fail(ILC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ILC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(ILC_ERR_INTERNAL, "unknown error");
  }
}

ilc_status null_argument(const char* name) {
  return fail(ILC_ERR_INVALID_ARGUMENT, std::string(name) + " must not be null");
}

const ilcrace::ExperimentResult* level_of(const ilc_study* study, size_t level) {
  if (study == nullptr || level >= study->results.size()) return nullptr;
  return &study->results[level];
}

}  // namespace

extern "C" {

const char* ilc_last_error(void) { return last_error.c_str(); }

const char* ilc_version(void) { return "1.0.0"; }

ilc_status ilc_config_default(ilc_config** out) {
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new ilc_config{}; });
}

ilc_status ilc_config_load(const char* path, ilc_config** out) {
  if (path == nullptr) return null_argument("path");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    ilcrace::ExperimentConfig config = ilcrace::load_config(path);
    *out = new ilc_config{std::move(config), {}};
  });
}

ilc_status ilc_config_parse(const char* json_text, ilc_config** out) {
  if (json_text == nullptr) return null_argument("json_text");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    ilcrace::ExperimentConfig config = ilcrace::parse_config(json_text);
    *out = new ilc_config{std::move(config), {}};
  });
}

ilc_status ilc_config_set_seed(ilc_config* config, uint64_t seed) {
  if (config == nullptr) return null_argument("config");
  config->config.seed = seed;
  last_error.clear();
  return ILC_OK;
}

ilc_status ilc_config_set_stop_after(ilc_config* config, int lap) {
  if (config == nullptr) return null_argument("config");
  if (lap < 0) return fail(ILC_ERR_CONFIG, "stop_after must be >= 0");
  config->config.stop_after = lap;
  last_error.clear();
  return ILC_OK;
}

ilc_status ilc_config_json(ilc_config* config, const char** out) {
  if (config == nullptr) return null_argument("config");
  if (out == nullptr) return null_argument("out");
  return guarded([&] {
    config->json = ilcrace::config_to_json(config->config);
    *out = config->json.c_str();
  });
}

size_t ilc_config_levels(const ilc_config* config) {
  return config == nullptr ? 0 : config->config.accel_levels.size();
}

double ilc_config_level(const ilc_config* config, size_t index) {
  if (config == nullptr || index >= config->config.accel_levels.size()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return config->config.accel_levels[index];
}

void ilc_config_free(ilc_config* config) { delete config; }

ilc_status ilc_study_run(const ilc_config* config, ilc_study** out) {
  if (config == nullptr) return null_argument("config");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    auto results = ilcrace::run_study(config->config);
    *out = new ilc_study{std::move(results)};
  });
}

size_t ilc_study_levels(const ilc_study* study) {
  return study == nullptr ? 0 : study->results.size();
}

ilc_status ilc_study_level_info(const ilc_study* study, size_t level,
                                double* accel, size_t* laps, size_t* samples,
                                double* gamma, double* wall_time) {
  const ilcrace::ExperimentResult* r = level_of(study, level);
  if (r == nullptr) return fail(ILC_ERR_INVALID_ARGUMENT, "no such study level");
  if (accel) *accel = r->accel_level;
  if (laps) *laps = r->laps.size();
  if (samples) *samples = r->grid.samples;
  if (gamma) *gamma = r->gamma.value_or(std::numeric_limits<double>::quiet_NaN());
  if (wall_time) *wall_time = r->wall_time;
  last_error.clear();
  return ILC_OK;
}

ilc_status ilc_study_rms(const ilc_study* study, size_t level, double* out,
                         size_t capacity) {
  const ilcrace::ExperimentResult* r = level_of(study, level);
  if (r == nullptr) return fail(ILC_ERR_INVALID_ARGUMENT, "no such study level");
  if (out == nullptr) return null_argument("out");
  if (capacity < r->rms_by_lap.size()) {
    return fail(ILC_ERR_INVALID_ARGUMENT, "rms buffer is too small");
  }
  for (size_t j = 0; j < r->rms_by_lap.size(); ++j) out[j] = r->rms_by_lap[j];
  last_error.clear();
  return ILC_OK;
}

ilc_status ilc_study_export(const ilc_study* study, size_t level,
                            const char* path, ilc_format format) {
  const ilcrace::ExperimentResult* r = level_of(study, level);
  if (r == nullptr) return fail(ILC_ERR_INVALID_ARGUMENT, "no such study level");
  if (path == nullptr) return null_argument("path");
  if (format != ILC_FORMAT_CSV && format != ILC_FORMAT_JSON) {
    return fail(ILC_ERR_INVALID_ARGUMENT, "unknown output format");
  }
  return guarded([&] {
    ilcrace::export_result(*r, path,
                           format == ILC_FORMAT_CSV ? ilcrace::ResultFormat::kCsv
                                                    : ilcrace::ResultFormat::kJson);
  });
}

ilc_status ilc_study_export_learned(const ilc_study* study, size_t level,
                                    const char* path) {
  const ilcrace::ExperimentResult* r = level_of(study, level);
  if (r == nullptr) return fail(ILC_ERR_INVALID_ARGUMENT, "no such study level");
  if (path == nullptr) return null_argument("path");
  return guarded([&] {
    const std::vector<double>& last = r->laps.back().inputs;
    const Eigen::Map<const Eigen::VectorXd> delta(
        last.data(), static_cast<Eigen::Index>(last.size()));
    ilcrace::write_learned_input(path, r->grid, delta);
  });
}

void ilc_study_free(ilc_study* study) { delete study; }

void ilc_sweep_params_default(ilc_sweep_params* params) {
  if (params == nullptr) return;
  *params = ilc_sweep_params{};
  params->kp_start = 0.0;
  params->kp_stop = 0.5;
  params->kp_count = 51;
  params->kd_start = 0.0;
  params->kd_stop = 0.5;
  params->kd_count = 51;
  params->filter_enabled = 1;
  params->filter_hz = 2.0;
  params->speed = 20.0;
  params->sample_time = 0.1;
  params->window = 400;
  params->ltv = 0;
  params->accel_level = 8.0;
  params->track_source = nullptr;
  params->threads = 0;
}

ilc_status ilc_sweep_run(const ilc_sweep_params* params, ilc_sweep** out) {
  if (params == nullptr) return null_argument("params");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  if (params->kp_count == 0 || params->kd_count == 0) {
    return fail(ILC_ERR_INVALID_ARGUMENT, "gain ranges must have at least one point");
  }
  return guarded([&] {
    ilcrace::SweepConfig config;
    config.kp = ilcrace::linspace(params->kp_start, params->kp_stop, params->kp_count);
    config.kd = ilcrace::linspace(params->kd_start, params->kd_stop, params->kd_count);
    if (params->filter_enabled) {
      config.filter_hz = params->filter_hz;
    } else {
      config.filter_hz.reset();
    }
    config.speed = params->speed;
    config.sample_time = params->sample_time;
    config.window = params->window;
    config.ltv = params->ltv != 0;
    config.accel_level = params->accel_level;
    if (params->track_source) config.track_source = params->track_source;
    config.threads = params->threads;
    *out = new ilc_sweep{ilcrace::gamma_sweep(config)};
  });
}

size_t ilc_sweep_cells(const ilc_sweep* sweep) {
  return sweep == nullptr ? 0 : sweep->result.cells.size();
}

size_t ilc_sweep_samples(const ilc_sweep* sweep) {
  return sweep == nullptr ? 0 : sweep->result.samples;
}

ilc_status ilc_sweep_cell(const ilc_sweep* sweep, size_t index, double* kp,
                          double* kd, double* gamma, int* stable) {
  if (sweep == nullptr || index >= sweep->result.cells.size()) {
    return fail(ILC_ERR_INVALID_ARGUMENT, "no such sweep cell");
  }
  const ilcrace::SweepCell& cell = sweep->result.cells[index];
  if (kp) *kp = cell.kp;
  if (kd) *kd = cell.kd;
  if (gamma) *gamma = cell.gamma;
  if (stable) *stable = cell.stable ? 1 : 0;
  last_error = cell.diagnostic;
  return ILC_OK;
}

ilc_status ilc_sweep_export(const ilc_sweep* sweep, const char* path) {
  if (sweep == nullptr) return null_argument("sweep");
  if (path == nullptr) return null_argument("path");
  return guarded([&] { ilcrace::export_sweep_csv(sweep->result, path); });
}

void ilc_sweep_free(ilc_sweep* sweep) { delete sweep; }

ilc_status ilc_synthesize(const ilc_config* config, double accel_level,
                          const char* q_path, const char* l_path,
                          size_t* samples, double* gamma) {
  if (config == nullptr) return null_argument("config");
  return guarded([&] {
    const ilcrace::ExperimentConfig& c = config->config;
    c.validate();
    const ilcrace::Scenario scenario = ilcrace::load_scenario(c);
    const ilcrace::TimeGrid grid = ilcrace::experiment_grid(c, scenario, accel_level);
    const ilcrace::LiftedSystem lifted =
        ilcrace::build_lifted(grid, scenario.track, c.vehicle);
    const ilcrace::LearningOperator op =
        ilcrace::make_learning_operator(c, &lifted, grid.samples);
    if (q_path) ilcrace::export_matrix_csv(q_path, op.Q, c.sample_time);
    if (l_path) ilcrace::export_matrix_csv(l_path, op.L, c.sample_time);
    if (samples) *samples = grid.samples;
    if (gamma) {
      *gamma = std::numeric_limits<double>::quiet_NaN();
      if (grid.samples <= c.gamma_window) {
        *gamma = ilcrace::convergence_factor(lifted.P, op.Q, op.L);
      }
    }
  });
}

ilc_status ilc_export_lifted(const ilc_config* config, double accel_level,
                             const char* path, size_t* samples) {
  if (config == nullptr) return null_argument("config");
  if (path == nullptr) return null_argument("path");
  return guarded([&] {
    const ilcrace::ExperimentConfig& c = config->config;
    c.validate();
    const ilcrace::Scenario scenario = ilcrace::load_scenario(c);
    const ilcrace::TimeGrid grid = ilcrace::experiment_grid(c, scenario, accel_level);
    ilcrace::export_lifted_csv(path, ilcrace::build_lifted(grid, scenario.track, c.vehicle));
    if (samples) *samples = grid.samples;
  });
}

ilc_status ilc_generate_track(const char* path) {
  if (path == nullptr) return null_argument("path");
  return guarded([&] { ilcrace::write_track(path, ilcrace::synthetic_track()); });
}

}  // extern "C"
