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

#include "ilcrace/result_io.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "csv.hpp"
#include "ilcrace/config.hpp"
#include "ilcrace/error.hpp"

namespace ilcrace {

using Json = nlohmann::ordered_json;

namespace {

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("error while writing '" + path.string() + "'");
}

void write_csv(const ExperimentResult& result, const std::filesystem::path& path) {
  std::ofstream out = csv::open_output(path);
  out << "lap,k,s_m,e_m,delta_L_rad\n";
  for (const LapRecord& lap : result.laps) {
    for (std::size_t k = 0; k < lap.errors.size(); ++k) {
      out << lap.iteration << ',' << k << ','
          << csv::format_double(result.grid.distances[k]) << ','
          << csv::format_double(lap.errors[k]) << ','
          << csv::format_double(lap.inputs[k]) << '\n';
    }
  }
  finish(out, path);
}

void write_json(const ExperimentResult& result, const std::filesystem::path& path) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["config"] = Json::parse(config_to_json(result.config));
  j["accel_level"] = result.accel_level;
  j["sample_time"] = result.grid.sample_time;
  j["samples"] = result.grid.samples;
  j["lap_time"] = result.grid.lap_time;
  j["gamma"] = result.gamma ? Json(*result.gamma) : Json(nullptr);
  j["rms_by_lap"] = result.rms_by_lap;
  j["t_s"] = result.grid.times;
  j["s_m"] = result.grid.distances;
  j["speed_mps"] = result.grid.speeds;
  Json laps = Json::array();
  for (const LapRecord& lap : result.laps) {
    laps.push_back({{"lap", lap.iteration},
                    {"rms_error", lap.rms_error},
                    {"peak_error", lap.peak_error},
                    {"e_m", lap.errors},
                    {"delta_L_rad", lap.inputs}});
  }
  j["laps"] = std::move(laps);
  std::ofstream out = csv::open_output(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

}  // namespace

void export_result(const ExperimentResult& result,
                   const std::filesystem::path& path, ResultFormat format) {
  if (format == ResultFormat::kCsv) {
    write_csv(result, path);
  } else {
    write_json(result, path);
  }
}

ExperimentResult load_result_json(const std::filesystem::path& path) {
  std::ifstream in = csv::open_input(path);
  std::ostringstream text;
  text << in.rdbuf();
  ExperimentResult r;
  try {
    const Json j = Json::parse(text.str());
    if (j.at("format_version").get<int>() != kFormatVersion) {
      throw ParseError(path.string() + ": unsupported format_version");
    }
    r.config = parse_config(j.at("config").dump());
    r.accel_level = j.at("accel_level").get<double>();
    r.grid.sample_time = j.at("sample_time").get<double>();
    r.grid.samples = j.at("samples").get<std::size_t>();
    r.grid.lap_time = j.at("lap_time").get<double>();
    r.grid.times = j.at("t_s").get<std::vector<double>>();
    r.grid.distances = j.at("s_m").get<std::vector<double>>();
    r.grid.speeds = j.at("speed_mps").get<std::vector<double>>();
    if (!j.at("gamma").is_null()) r.gamma = j.at("gamma").get<double>();
    r.rms_by_lap = j.at("rms_by_lap").get<std::vector<double>>();
    for (const Json& lap : j.at("laps")) {
      LapRecord record;
      record.iteration = lap.at("lap").get<int>();
      record.rms_error = lap.at("rms_error").get<double>();
      record.peak_error = lap.at("peak_error").get<double>();
      record.errors = lap.at("e_m").get<std::vector<double>>();
      record.inputs = lap.at("delta_L_rad").get<std::vector<double>>();
      r.laps.push_back(std::move(record));
    }
  } catch (const Json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return r;
}

void export_sweep_csv(const SweepResult& sweep, const std::filesystem::path& path) {
  std::ofstream out = csv::open_output(path);
  out << "kp,kd,gamma,stable\n";
  for (const SweepCell& cell : sweep.cells) {
    out << csv::format_double(cell.kp) << ',' << csv::format_double(cell.kd) << ','
        << csv::format_double(cell.gamma) << ',' << (cell.stable ? 1 : 0) << '\n';
  }
  finish(out, path);
}

}  // namespace ilcrace
