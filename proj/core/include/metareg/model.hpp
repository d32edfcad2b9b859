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

#ifndef METAREG_MODEL_HPP_
#define METAREG_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace metareg {

struct StudyRecord {
  std::string study_id;
  std::int64_t events = 0;
  std::int64_t total = 1;
  std::map<std::string, std::optional<double>> moderators;

  // Missing and absent moderators are both reported as nullopt.
  std::optional<double> moderator(const std::string& name) const;
};

class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<StudyRecord> studies, std::vector<std::string> moderator_names);

  const std::vector<StudyRecord>& studies() const noexcept { return studies_; }
  const std::vector<std::string>& moderator_names() const noexcept { return moderator_names_; }
  std::size_t size() const noexcept { return studies_.size(); }
  bool has_moderator(const std::string& name) const;

 private:
  std::vector<StudyRecord> studies_;
  std::vector<std::string> moderator_names_;
};

enum class Centering { kNone, kMean };

struct ModelSpec {
  std::vector<std::string> moderators;
  bool interaction = false;
  Centering centering = Centering::kMean;

  // Throws UsageError when the interaction flag is set without exactly two
  // moderators.
  void validate() const;

  // Column labels the fitted coefficients carry: "intercept", each moderator
  // name, then "<m1>:<m2>" for the interaction.
  std::vector<std::string> coefficient_labels() const;

  // Short human-readable form, e.g. "year + age + year:age".
  std::string describe() const;
};

inline constexpr const char* kInterceptLabel = "intercept";

std::string interaction_label(const std::string& a, const std::string& b);

struct DesignMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> column_labels;
  std::vector<std::string> moderators;
  bool interaction = false;
  // Per selected moderator, aligned with `moderators`.
  std::vector<double> center_offsets;
  std::vector<double> other_medians;

  Eigen::Index rows() const noexcept { return values.rows(); }
  Eigen::Index cols() const noexcept { return values.cols(); }
};

// Which dataset rows survived complete-case filtering.
struct RowIndexMap {
  std::vector<std::size_t> retained;
  std::vector<std::size_t> dropped;
};

struct BuiltDesign {
  DesignMatrix design;
  RowIndexMap rows;
};

BuiltDesign build_design(const Dataset& dataset, const ModelSpec& spec);

// Median of each moderator column (the columns after the intercept, excluding
// the interaction column), aligned with design.moderators.
std::vector<double> column_medians(const DesignMatrix& design);

// Midpoint convention for even lengths. Throws UsageError on empty input.
double median(std::span<const double> values);

}  // namespace metareg

#endif  // METAREG_MODEL_HPP_
