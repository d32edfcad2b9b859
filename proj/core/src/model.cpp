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

#include "metareg/model.hpp"

#include <algorithm>
#include <numeric>

#include "metareg/errors.hpp"

namespace metareg {

std::optional<double> StudyRecord::moderator(const std::string& name) const {
  auto it = moderators.find(name);
  if (it == moderators.end()) return std::nullopt;
  return it->second;
}

Dataset::Dataset(std::vector<StudyRecord> studies, std::vector<std::string> moderator_names)
    : studies_(std::move(studies)), moderator_names_(std::move(moderator_names)) {
  if (studies_.empty()) throw DataError("dataset has no studies");
  for (const auto& s : studies_) {
    if (s.total < 1) throw DataError("study '" + s.study_id + "': total must be >= 1");
    if (s.events < 0) throw DataError("study '" + s.study_id + "': events must be >= 0");
    if (s.events > s.total) {
      throw DataError("study '" + s.study_id + "': events (" + std::to_string(s.events) + ") exceed total (" +
                      std::to_string(s.total) + ")");
    }
    for (const auto& [name, value] : s.moderators) {
      if (!has_moderator(name)) {
        throw DataError("study '" + s.study_id + "' references undeclared moderator '" + name + "'");
      }
    }
  }
}

bool Dataset::has_moderator(const std::string& name) const {
  return std::find(moderator_names_.begin(), moderator_names_.end(), name) != moderator_names_.end();
}

std::string interaction_label(const std::string& a, const std::string& b) { return a + ":" + b; }

void ModelSpec::validate() const {
  if (interaction && moderators.size() != 2) {
    throw UsageError("an interaction term requires exactly two moderators (got " +
                     std::to_string(moderators.size()) + ")");
  }
  for (std::size_t i = 0; i < moderators.size(); ++i) {
    for (std::size_t j = i + 1; j < moderators.size(); ++j) {
      if (moderators[i] == moderators[j]) throw UsageError("moderator '" + moderators[i] + "' listed twice");
    }
  }
}

std::vector<std::string> ModelSpec::coefficient_labels() const {
  std::vector<std::string> labels{kInterceptLabel};
  labels.insert(labels.end(), moderators.begin(), moderators.end());
  if (interaction) labels.push_back(interaction_label(moderators[0], moderators[1]));
  return labels;
}

std::string ModelSpec::describe() const {
  if (moderators.empty()) return kInterceptLabel;
  std::string out;
  for (const auto& m : moderators) {
    if (!out.empty()) out += " + ";
    out += m;
  }
  if (interaction) out += " + " + interaction_label(moderators[0], moderators[1]);
  return out;
}

double median(std::span<const double> values) {
  if (values.empty()) throw UsageError("median of an empty sequence");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

std::vector<double> column_medians(const DesignMatrix& design) {
  if (design.rows() == 0) throw UsageError("column medians of an empty design");
  std::vector<double> out;
  out.reserve(design.moderators.size());
  std::vector<double> column(static_cast<std::size_t>(design.rows()));
  for (std::size_t j = 0; j < design.moderators.size(); ++j) {
    for (Eigen::Index i = 0; i < design.rows(); ++i) {
      column[static_cast<std::size_t>(i)] = design.values(i, static_cast<Eigen::Index>(j) + 1);
    }
    out.push_back(median(column));
  }
  return out;
}

BuiltDesign build_design(const Dataset& dataset, const ModelSpec& spec) {
  spec.validate();
  for (const auto& m : spec.moderators) {
    if (!dataset.has_moderator(m)) {
      std::string available;
      for (const auto& name : dataset.moderator_names()) available += (available.empty() ? "" : ", ") + name;
      throw UsageError("unknown moderator '" + m + "'; available: " + (available.empty() ? "(none)" : available));
    }
  }

  BuiltDesign built;
  const auto& studies = dataset.studies();
  for (std::size_t i = 0; i < studies.size(); ++i) {
    const bool complete = std::all_of(spec.moderators.begin(), spec.moderators.end(),
                                      [&](const std::string& m) { return studies[i].moderator(m).has_value(); });
    (complete ? built.rows.retained : built.rows.dropped).push_back(i);
  }
  if (built.rows.retained.empty()) {
    throw DataError("no studies remain after dropping rows with missing moderators (" + spec.describe() + ")");
  }

  const auto k = static_cast<Eigen::Index>(built.rows.retained.size());
  const auto m = static_cast<Eigen::Index>(spec.moderators.size());
  const Eigen::Index p = 1 + m + (spec.interaction ? 1 : 0);

  DesignMatrix& d = built.design;
  d.values.resize(k, p);
  d.values.col(0).setOnes();
  d.column_labels = spec.coefficient_labels();
  d.moderators = spec.moderators;
  d.interaction = spec.interaction;

  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& name = spec.moderators[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < k; ++i) {
      d.values(i, j + 1) = *studies[built.rows.retained[static_cast<std::size_t>(i)]].moderator(name);
    }
    double offset = 0.0;
    if (spec.centering == Centering::kMean) {
      offset = d.values.col(j + 1).mean();
      d.values.col(j + 1).array() -= offset;
    }
    d.center_offsets.push_back(offset);
  }
  if (spec.interaction) d.values.col(3) = d.values.col(1).cwiseProduct(d.values.col(2));

  d.other_medians = column_medians(d);
  return built;
}

}  // namespace metareg
