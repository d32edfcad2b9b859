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

#include "metareg/scenario_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "metareg/csv.hpp"
#include "metareg/errors.hpp"
#include "metareg/random.hpp"

namespace metareg {
namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class FieldError {
 public:
  FieldError(std::string source, std::size_t line, std::string key)
      : source_(std::move(source)), line_(line), key_(std::move(key)) {}

  [[noreturn]] void fail(const std::string& message) const {
    throw UsageError(source_ + ":" + std::to_string(line_) + ": field '" + key_ + "': " + message);
  }

  double real(const std::string& text) const {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
      fail("expected a real number, got '" + text + "'");
    }
    return value;
  }

  std::size_t count(const std::string& text) const {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
      fail("expected a nonnegative integer, got '" + text + "'");
    }
    return value;
  }

  bool flag(const std::string& text) const {
    if (text == "true" || text == "yes" || text == "1") return true;
    if (text == "false" || text == "no" || text == "0") return false;
    fail("expected true or false, got '" + text + "'");
  }

 private:
  std::string source_;
  std::size_t line_;
  std::string key_;
};

}  // namespace

ModelSpec parse_fit_spec(const std::string& text) {
  ModelSpec spec;
  spec.centering = Centering::kNone;
  for (const auto& token : split_list(text)) {
    if (token == "interaction") {
      spec.interaction = true;
    } else {
      spec.moderators.push_back(token);
    }
  }
  if (spec.moderators.empty()) throw UsageError("fitted model '" + text + "' names no moderators");
  spec.validate();
  return spec;
}

ScenarioConfig parse_scenario_config(std::istream& in, const std::string& source) {
  ScenarioConfig config;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const FieldError field(source, line_no, key);
    if (key != "fit" && !seen.insert(key).second) field.fail("given more than once");
    if (value.empty()) field.fail("empty value");

    if (key == "name") {
      config.name = value;
    } else if (key == "beta") {
      for (const auto& item : split_list(value)) config.beta.push_back(field.real(item));
    } else if (key == "tau2") {
      config.tau2 = field.real(value);
      if (config.tau2 < 0.0) field.fail("must be >= 0");
    } else if (key == "design") {
      config.design = value;
    } else if (key == "total") {
      config.total_col = value;
    } else if (key == "events") {
      config.events_col = value;
    } else if (key == "moderators") {
      config.moderators = split_list(value);
      if (config.moderators.empty() || config.moderators.size() > 2) field.fail("expected one or two moderators");
    } else if (key == "id") {
      config.id_col = value;
    } else if (key == "reps") {
      config.reps = field.count(value);
      if (config.reps < 1) field.fail("must be >= 1");
    } else if (key == "level") {
      config.level = field.real(value);
      if (!(config.level > 0.0 && config.level < 1.0)) field.fail("must lie in (0, 1)");
    } else if (key == "seed") {
      try {
        config.seed = parse_seed(value);
      } catch (const UsageError& e) {
        field.fail(e.what());
      }
    } else if (key == "fit") {
      try {
        config.fits.push_back(parse_fit_spec(value));
      } catch (const UsageError& e) {
        field.fail(e.what());
      }
    } else if (key == "truncate_kh") {
      config.truncate_kh = field.flag(value);
    } else {
      field.fail("unknown key");
    }
  }

  auto require = [&](const char* key) {
    if (!seen.count(key)) throw UsageError(source + ": missing required field '" + key + "'");
  };
  require("beta");
  require("tau2");
  require("design");
  require("moderators");
  if (config.fits.empty()) throw UsageError(source + ": missing required field 'fit' (at least one fitted model)");
  if (config.name.empty()) config.name = "scenario";
  return config;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open scenario config '" + path.string() + "'");
  ScenarioConfig config = parse_scenario_config(in, path.string());
  config.base_dir = path.parent_path();
  return config;
}

Scenario make_scenario(const ScenarioConfig& config) {
  Dataset dataset;
  if (config.design == "synthetic") {
    dataset = make_synthetic_design();
  } else {
    std::filesystem::path path = config.design;
    if (path.is_relative()) path = config.base_dir / path;
    ColumnMapping mapping;
    mapping.events_col = config.events_col;
    mapping.total_col = config.total_col;
    mapping.moderator_cols = config.moderators;
    mapping.id_col = config.id_col;
    dataset = ingest_csv(path, mapping);
  }

  Scenario scenario;
  scenario.name = config.name;
  scenario.true_beta = config.beta;
  scenario.tau2 = config.tau2;
  scenario.design = scenario_design_from_dataset(dataset, config.moderators);
  scenario.n_reps = config.reps;
  scenario.level = config.level;
  scenario.master_seed = config.seed;
  scenario.fitted_specs = config.fits;
  scenario.fit_settings.truncate_kh = config.truncate_kh;
  scenario.validate();
  return scenario;
}

}  // namespace metareg
