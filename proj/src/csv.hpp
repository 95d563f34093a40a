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

#ifndef ILCRACE_SRC_CSV_HPP_
#define ILCRACE_SRC_CSV_HPP_

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace ilcrace::csv {

// Shortest round-trip decimal representation ("%.17g" without the noise).
std::string format_double(double value);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

// Strict conversion: the whole field must be a finite number. Throws
// ParseError naming `context` otherwise.
double parse_double(std::string_view field, std::string_view context);

// Opens for writing in binary mode; throws IoError with the path on failure.
std::ofstream open_output(const std::filesystem::path& path);
std::ifstream open_input(const std::filesystem::path& path);

// Reads all lines, stripping a trailing '\r' and a UTF-8 BOM on line one.
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace ilcrace::csv

#endif  // ILCRACE_SRC_CSV_HPP_
