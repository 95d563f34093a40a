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

#include "ilcrace/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ilcrace/error.hpp"

namespace ilcrace {

using Json = nlohmann::ordered_json;

const char* plant_name(PlantKind plant) {
  return plant == PlantKind::kLinear ? "linear" : "nonlinear";
}

const char* tire_name(TireModel tire) {
  return tire == TireModel::kLinear ? "linear" : "fiala";
}

namespace {

void reject_unknown(const Json& object, std::initializer_list<const char*> keys,
                    const std::string& where) {
  if (!object.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = object.begin(); it != object.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
void read(const Json& object, const char* key, T& out) {
  if (object.contains(key)) out = object.at(key).get<T>();
}

std::string resolve(const std::string& path, const std::filesystem::path& base) {
  const std::filesystem::path p(path);
  if (p.is_absolute() || base.empty()) return path;
  return (base / p).lexically_normal().string();
}

VehicleParams parse_vehicle(const Json& j) {
  reject_unknown(j,
                 {"mass", "yaw_inertia", "cg_to_front", "cg_to_rear",
                  "front_stiffness", "rear_stiffness", "friction",
                  "lanekeeping_gain", "lookahead"},
                 "vehicle");
  VehicleParams v;
  read(j, "mass", v.mass);
  read(j, "yaw_inertia", v.yaw_inertia);
  read(j, "cg_to_front", v.cg_to_front);
  read(j, "cg_to_rear", v.cg_to_rear);
  read(j, "front_stiffness", v.front_stiffness);
  read(j, "rear_stiffness", v.rear_stiffness);
  read(j, "friction", v.friction);
  read(j, "lanekeeping_gain", v.lanekeeping_gain);
  read(j, "lookahead", v.lookahead);
  return v;
}

Weight parse_weight(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const Json& w = j.at(key);
  if (!w.is_number()) {
    throw ConfigError(std::string("learner.") + key + " must be a scalar weight");
  }
  return w.get<double>();
}

LearnerDescriptor parse_learner(const Json& j) {
  if (!j.is_object() || !j.contains("type")) {
    throw ConfigError("learner must be an object with a 'type'");
  }
  const std::string type = j.at("type").get<std::string>();
  if (type == "pd") {
    reject_unknown(j, {"type", "kp", "kd", "cutoff_hz"}, "learner");
    PdDescriptor pd{0.01, 0.05, 2.0};
    read(j, "kp", pd.kp);
    read(j, "kd", pd.kd);
    if (j.contains("cutoff_hz")) {
      const Json& c = j.at("cutoff_hz");
      if (c.is_null()) {
        pd.cutoff_hz.reset();
      } else {
        pd.cutoff_hz = c.get<double>();
      }
    }
    return pd;
  }
  if (type == "qilc") {
    reject_unknown(j, {"type", "T", "R", "S"}, "learner");
    return QilcDescriptor{WeightSpec{parse_weight(j, "T", 1.0),
                                     parse_weight(j, "R", 1.0),
                                     parse_weight(j, "S", 100.0)}};
  }
  if (type == "deadbeat") {
    reject_unknown(j, {"type"}, "learner");
    return DeadbeatDescriptor{};
  }
  throw ConfigError("learner.type must be pd, qilc or deadbeat, got '" + type + "'");
}

Json learner_to_json(const LearnerDescriptor& learner) {
  Json j;
  if (const auto* pd = std::get_if<PdDescriptor>(&learner)) {
    j["type"] = "pd";
    j["kp"] = pd->kp;
    j["kd"] = pd->kd;
    j["cutoff_hz"] = pd->cutoff_hz ? Json(*pd->cutoff_hz) : Json(nullptr);
  } else if (const auto* q = std::get_if<QilcDescriptor>(&learner)) {
    j["type"] = "qilc";
    j["T"] = q->weights.T.scalar();
    j["R"] = q->weights.R.scalar();
    j["S"] = q->weights.S.scalar();
  } else {
    j["type"] = "deadbeat";
  }
  return j;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text,
                              const std::filesystem::path& base_dir) {
  Json j;
  try {
    j = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  ExperimentConfig c;
  try {
    reject_unknown(j,
                   {"format_version", "track_source", "accel_levels", "v_max",
                    "plant", "tire", "learner", "laps", "stop_after",
                    "sample_time", "inner_dt", "noise_std", "seed",
                    "feedforward", "initial_input", "max_samples",
                    "gamma_window", "vehicle"},
                   "config");
    if (j.contains("format_version") &&
        j.at("format_version").get<int>() != kFormatVersion) {
      throw ConfigError("unsupported format_version (expected 1)");
    }
    read(j, "track_source", c.track_source);
    if (c.track_source != "synthetic") c.track_source = resolve(c.track_source, base_dir);
    read(j, "accel_levels", c.accel_levels);
    read(j, "v_max", c.v_max);
    if (j.contains("plant")) {
      const std::string plant = j.at("plant").get<std::string>();
      if (plant == "linear") {
        c.plant = PlantKind::kLinear;
      } else if (plant == "nonlinear") {
        c.plant = PlantKind::kNonlinear;
      } else {
        throw ConfigError("plant must be linear or nonlinear, got '" + plant + "'");
      }
    }
    if (j.contains("tire")) {
      const std::string tire = j.at("tire").get<std::string>();
      if (tire == "linear") {
        c.tire = TireModel::kLinear;
      } else if (tire == "fiala") {
        c.tire = TireModel::kFiala;
      } else {
        throw ConfigError("tire must be linear or fiala, got '" + tire + "'");
      }
    }
    if (j.contains("learner")) c.learner = parse_learner(j.at("learner"));
    read(j, "laps", c.laps);
    if (j.contains("stop_after") && !j.at("stop_after").is_null()) {
      c.stop_after = j.at("stop_after").get<int>();
    }
    read(j, "sample_time", c.sample_time);
    read(j, "inner_dt", c.inner_dt);
    read(j, "noise_std", c.noise_std);
    read(j, "seed", c.seed);
    read(j, "feedforward", c.feedforward);
    if (j.contains("initial_input") && !j.at("initial_input").is_null()) {
      c.initial_input = resolve(j.at("initial_input").get<std::string>(), base_dir);
    }
    if (j.contains("max_samples") && !j.at("max_samples").is_null()) {
      const long long m = j.at("max_samples").get<long long>();
      if (m < 1) throw ConfigError("max_samples must be >= 1");
      c.max_samples = static_cast<std::size_t>(m);
    }
    if (j.contains("gamma_window")) {
      const long long w = j.at("gamma_window").get<long long>();
      if (w < 0) throw ConfigError("gamma_window must be >= 0");
      c.gamma_window = static_cast<std::size_t>(w);
    }
    if (j.contains("vehicle")) c.vehicle = parse_vehicle(j.at("vehicle"));
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str(), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string config_to_json(const ExperimentConfig& c) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["track_source"] = c.track_source;
  j["accel_levels"] = c.accel_levels;
  j["v_max"] = c.v_max;
  j["plant"] = plant_name(c.plant);
  j["tire"] = tire_name(c.tire);
  j["learner"] = learner_to_json(c.learner);
  j["laps"] = c.laps;
  j["stop_after"] = c.stop_after ? Json(*c.stop_after) : Json(nullptr);
  j["sample_time"] = c.sample_time;
  j["inner_dt"] = c.inner_dt;
  j["noise_std"] = c.noise_std;
  j["seed"] = c.seed;
  j["feedforward"] = c.feedforward;
  j["initial_input"] = c.initial_input ? Json(*c.initial_input) : Json(nullptr);
  j["max_samples"] = c.max_samples ? Json(*c.max_samples) : Json(nullptr);
  j["gamma_window"] = c.gamma_window;
  const VehicleParams& v = c.vehicle;
  j["vehicle"] = {{"mass", v.mass},
                  {"yaw_inertia", v.yaw_inertia},
                  {"cg_to_front", v.cg_to_front},
                  {"cg_to_rear", v.cg_to_rear},
                  {"front_stiffness", v.front_stiffness},
                  {"rear_stiffness", v.rear_stiffness},
                  {"friction", v.friction},
                  {"lanekeeping_gain", v.lanekeeping_gain},
                  {"lookahead", v.lookahead}};
  return j.dump(2);
}

}  // namespace ilcrace
