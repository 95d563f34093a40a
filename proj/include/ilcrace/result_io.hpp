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

#ifndef ILCRACE_RESULT_IO_HPP_
#define ILCRACE_RESULT_IO_HPP_

#include <filesystem>

#include "ilcrace/harness.hpp"

namespace ilcrace {

enum class ResultFormat { kCsv, kJson };

// CSV rows pair delta_L(t_k) at s(t_k) with e(t_{k+1}).
void export_result(const ExperimentResult& result,
                   const std::filesystem::path& path, ResultFormat format);

// Reads a JSON export back; wall_time is not stored and comes back as 0.
ExperimentResult load_result_json(const std::filesystem::path& path);

void export_sweep_csv(const SweepResult& sweep, const std::filesystem::path& path);

}  // namespace ilcrace

#endif  // ILCRACE_RESULT_IO_HPP_
