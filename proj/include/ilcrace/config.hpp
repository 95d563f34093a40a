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

#ifndef ILCRACE_CONFIG_HPP_
#define ILCRACE_CONFIG_HPP_

#include <filesystem>
#include <string>
#include <string_view>

#include "ilcrace/harness.hpp"

namespace ilcrace {

inline constexpr int kFormatVersion = 1;

// Relative paths inside the document resolve against base_dir.
// Throws ConfigError on malformed text, unknown keys or invalid values.
ExperimentConfig parse_config(std::string_view text,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// Pretty-printed JSON with a stable key order, including format_version.
std::string config_to_json(const ExperimentConfig& config);

const char* plant_name(PlantKind plant);
const char* tire_name(TireModel tire);

}  // namespace ilcrace

#endif  // ILCRACE_CONFIG_HPP_
