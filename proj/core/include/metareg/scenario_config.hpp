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

#ifndef METAREG_SCENARIO_CONFIG_HPP_
#define METAREG_SCENARIO_CONFIG_HPP_

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "metareg/simulation.hpp"

namespace metareg {

// Flat `key = value` file; `#` starts a comment. Keys:
//
//   name        = scenario_a
//   beta        = -1.1477, -0.0066, 0.0333, -0.0018
//   tau2        = 0.2484
//   design      = synthetic | <csv path, relative to the config file>
//   total       = n            (column names, csv designs only)
//   events      = deaths       (optional)
//   moderators  = year, age
//   id          = study        (optional)
//   reps        = 10000
//   level       = 0.95
//   seed        = 0x5EED       (decimal or hex)
//   fit         = year, age, interaction     (repeatable, one model each)
//   truncate_kh = false
struct ScenarioConfig {
  std::string name;
  std::vector<double> beta;
  double tau2 = 0.0;
  std::string design;  // "synthetic" or a path
  std::string total_col = "total";
  std::string events_col;  // optional for designs
  std::vector<std::string> moderators;
  std::optional<std::string> id_col;
  std::size_t reps = 10000;
  double level = 0.95;
  std::uint64_t seed = 0;
  std::vector<ModelSpec> fits;
  bool truncate_kh = false;
  std::filesystem::path base_dir;
};

// Throws UsageError naming the line and field on any problem.
ScenarioConfig parse_scenario_config(std::istream& in, const std::string& source = "<stream>");
ScenarioConfig load_scenario_config(const std::filesystem::path& path);

// Loads the design (dataset or synthetic) and assembles a validated Scenario.
Scenario make_scenario(const ScenarioConfig& config);

// "year, age, interaction" -> ModelSpec with centering = none.
ModelSpec parse_fit_spec(const std::string& text);

}  // namespace metareg

#endif  // METAREG_SCENARIO_CONFIG_HPP_
