// Copyright 2026 The metareg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef METAREG_CSV_HPP_
#define METAREG_CSV_HPP_

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "metareg/model.hpp"

namespace metareg {

// An empty events_col reads a design-only file (events = 0).
struct ColumnMapping {
  std::string events_col;
  std::string total_col;
  std::vector<std::string> moderator_cols;
  std::optional<std::string> id_col;
};

// Comma-delimited UTF-8 with a header row. Quoted fields are supported.
// Rows must have as many fields as the header. Empty or non-numeric moderator
// cells become missing values; events and total must be integers. Throws
// DataError with the offending line number.
Dataset ingest_csv(const std::filesystem::path& path, const ColumnMapping& mapping);
Dataset ingest_csv(std::istream& in, const ColumnMapping& mapping, const std::string& source = "<stream>");

std::vector<std::string> split_csv_line(const std::string& line);

// Header names of a CSV file, for diagnostics.
std::vector<std::string> read_csv_header(const std::filesystem::path& path);

void write_dataset_csv(std::ostream& out, const Dataset& dataset);

}  // namespace metareg

#endif  // METAREG_CSV_HPP_
