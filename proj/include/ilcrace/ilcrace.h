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

#ifndef ILCRACE_ILCRACE_H_
#define ILCRACE_ILCRACE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(ILCRACE_BUILDING_LIBRARY)
#define ILCRACE_API __attribute__((visibility("default")))
#else
#define ILCRACE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ilc_status {
  ILC_OK = 0,
  ILC_ERR_INVALID_ARGUMENT = 1,
  ILC_ERR_PARSE = 2,
  ILC_ERR_VALIDATION = 3,
  ILC_ERR_CONFIG = 4,
  ILC_ERR_DIVERGENCE = 5,
  ILC_ERR_IO = 6,
  ILC_ERR_NUMERIC = 7,
  ILC_ERR_INTERNAL = 8
} ilc_status;

typedef enum ilc_format { ILC_FORMAT_CSV = 0, ILC_FORMAT_JSON = 1 } ilc_format;

typedef struct ilc_config ilc_config;
typedef struct ilc_study ilc_study;
typedef struct ilc_sweep ilc_sweep;

// Message for the last failing call on this thread; "" after success.
ILCRACE_API const char* ilc_last_error(void);
ILCRACE_API const char* ilc_version(void);

ILCRACE_API ilc_status ilc_config_default(ilc_config** out);
ILCRACE_API ilc_status ilc_config_load(const char* path, ilc_config** out);
ILCRACE_API ilc_status ilc_config_parse(const char* json_text, ilc_config** out);
ILCRACE_API ilc_status ilc_config_set_seed(ilc_config* config, uint64_t seed);
ILCRACE_API ilc_status ilc_config_set_stop_after(ilc_config* config, int lap);
// Resolved config as JSON; the string lives until the next call on config.
ILCRACE_API ilc_status ilc_config_json(ilc_config* config, const char** out);
ILCRACE_API size_t ilc_config_levels(const ilc_config* config);
ILCRACE_API double ilc_config_level(const ilc_config* config, size_t index);
ILCRACE_API void ilc_config_free(ilc_config* config);

// Runs every acceleration level of the config.
ILCRACE_API ilc_status ilc_study_run(const ilc_config* config, ilc_study** out);
ILCRACE_API size_t ilc_study_levels(const ilc_study* study);
// Any output pointer may be null. gamma is NaN when not computed.
ILCRACE_API ilc_status ilc_study_level_info(const ilc_study* study, size_t level,
                                            double* accel, size_t* laps,
                                            size_t* samples, double* gamma,
                                            double* wall_time);
ILCRACE_API ilc_status ilc_study_rms(const ilc_study* study, size_t level,
                                     double* out, size_t capacity);
ILCRACE_API ilc_status ilc_study_export(const ilc_study* study, size_t level,
                                        const char* path, ilc_format format);
// Learned input of the final lap, as k,s_m,delta_L_rad.
ILCRACE_API ilc_status ilc_study_export_learned(const ilc_study* study,
                                                size_t level, const char* path);
ILCRACE_API void ilc_study_free(ilc_study* study);

typedef struct ilc_sweep_params {
  double kp_start, kp_stop;
  size_t kp_count;
  double kd_start, kd_stop;
  size_t kd_count;
  int filter_enabled;
  double filter_hz;
  double speed;        // m/s, constant-speed mode
  double sample_time;  // s
  size_t window;       // N
  int ltv;             // nonzero: lap grid of track_source at accel_level
  double accel_level;
  const char* track_source;  // null or "synthetic" for the built-in track
  unsigned threads;          // 0 = hardware concurrency
} ilc_sweep_params;

ILCRACE_API void ilc_sweep_params_default(ilc_sweep_params* params);
ILCRACE_API ilc_status ilc_sweep_run(const ilc_sweep_params* params,
                                     ilc_sweep** out);
ILCRACE_API size_t ilc_sweep_cells(const ilc_sweep* sweep);
ILCRACE_API size_t ilc_sweep_samples(const ilc_sweep* sweep);
ILCRACE_API ilc_status ilc_sweep_cell(const ilc_sweep* sweep, size_t index,
                                      double* kp, double* kd, double* gamma,
                                      int* stable);
ILCRACE_API ilc_status ilc_sweep_export(const ilc_sweep* sweep, const char* path);
ILCRACE_API void ilc_sweep_free(ilc_sweep* sweep);

// Writes the config's Q and L at one level; either path may be null.
ILCRACE_API ilc_status ilc_synthesize(const ilc_config* config, double accel_level,
                                      const char* q_path, const char* l_path,
                                      size_t* samples, double* gamma);
ILCRACE_API ilc_status ilc_export_lifted(const ilc_config* config,
                                         double accel_level, const char* path,
                                         size_t* samples);
ILCRACE_API ilc_status ilc_generate_track(const char* path);

#ifdef __cplusplus
}
#endif

#endif  // ILCRACE_ILCRACE_H_
