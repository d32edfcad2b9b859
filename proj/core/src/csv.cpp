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

#include "metareg/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "metareg/errors.hpp"

namespace metareg {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<std::int64_t> parse_integer(std::string_view s) {
  s = trim(s);
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string format_real(double x) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

Dataset ingest_csv(std::istream& in, const ColumnMapping& mapping, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": empty file (header row expected)");
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = std::string(trim(h));

  auto column = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      std::string available;
      for (const auto& h : header) available += (available.empty() ? "" : ", ") + h;
      throw DataError(source + ": column '" + name + "' not found; available columns: " + available);
    }
    return static_cast<std::size_t>(it - header.begin());
  };

  // An empty events column means a design-only file; events are then 0.
  const std::optional<std::size_t> events_idx =
      mapping.events_col.empty() ? std::nullopt : std::optional<std::size_t>(column(mapping.events_col));
  const std::size_t total_idx = column(mapping.total_col);
  std::vector<std::size_t> moderator_idx;
  for (const auto& m : mapping.moderator_cols) moderator_idx.push_back(column(m));
  const std::optional<std::size_t> id_idx =
      mapping.id_col ? std::optional<std::size_t>(column(*mapping.id_col)) : std::nullopt;

  std::vector<StudyRecord> studies;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    auto cell = [&](std::size_t idx) { return std::string_view(fields[idx]); };
    const std::string where = source + ":" + std::to_string(line_no);
    if (fields.size() != header.size()) {
      throw DataError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }

    StudyRecord s;
    s.study_id = id_idx ? std::string(trim(cell(*id_idx))) : "row" + std::to_string(line_no - 1);
    const auto events = events_idx ? parse_integer(cell(*events_idx)) : std::optional<std::int64_t>(0);
    const auto total = parse_integer(cell(total_idx));
    if (!events) throw DataError(where + ": cannot parse events '" + std::string(cell(*events_idx)) + "' as an integer");
    if (!total) throw DataError(where + ": cannot parse total '" + std::string(cell(total_idx)) + "' as an integer");
    if (*total < 1) throw DataError(where + ": total must be >= 1");
    if (*events < 0) throw DataError(where + ": events must be >= 0");
    if (*events > *total) {
      throw DataError(where + ": events (" + std::to_string(*events) + ") exceed total (" + std::to_string(*total) + ")");
    }
    s.events = *events;
    s.total = *total;
    for (std::size_t j = 0; j < moderator_idx.size(); ++j) {
      s.moderators[mapping.moderator_cols[j]] = parse_real(cell(moderator_idx[j]));
    }
    studies.push_back(std::move(s));
  }
  if (studies.empty()) throw DataError(source + ": no data rows");
  return Dataset(std::move(studies), mapping.moderator_cols);
}

Dataset ingest_csv(const std::filesystem::path& path, const ColumnMapping& mapping) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return ingest_csv(in, mapping, path.string());
}

std::vector<std::string> read_csv_header(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line;
  if (!in || !std::getline(in, line)) return {};
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
  auto header = split_csv_line(line);
  for (auto& h : header) h = std::string(trim(h));
  return header;
}

void write_dataset_csv(std::ostream& out, const Dataset& dataset) {
  out << "study_id,events,total";
  for (const auto& m : dataset.moderator_names()) out << ',' << quote_if_needed(m);
  out << '\n';
  for (const auto& s : dataset.studies()) {
    out << quote_if_needed(s.study_id) << ',' << s.events << ',' << s.total;
    for (const auto& m : dataset.moderator_names()) {
      out << ',';
      if (const auto v = s.moderator(m)) out << format_real(*v);
    }
    out << '\n';
  }
}

}  // namespace metareg
