/*
 Copyright 2026 The hvacctl Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// Minimal comma-separated table IO (no quoting; all fields are numeric or timestamps).

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hvac {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws DataError when the column is missing.
  std::size_t column(std::string_view name) const;
};

// Throws DataError on a missing file or a row whose width differs from the header.
CsvTable read_csv(const std::filesystem::path& path);

double parse_double(std::string_view text);

// Fixed six decimals; negative zero is printed as zero.
std::string fmt6(double v);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace hvac
