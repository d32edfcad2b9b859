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

#include "metareg/report.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "metareg/errors.hpp"

namespace metareg {
namespace {

using nlohmann::json;

const char* method_name(RemlMethod method) {
  return method == RemlMethod::kFisherScoring ? "fisher-scoring" : "bounded-fallback";
}

std::string fixed4(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

}  // namespace

FitReport make_fit_report(const FitResult& fit, const ModelSpec& spec, double level) {
  FitReport r;
  r.model = spec.describe();
  r.level = level;
  for (const auto& ci : confidence_intervals(fit, level)) {
    r.coefficients.push_back({ci.label, ci.estimate, ci.std_error, ci.lower, ci.upper, ci.df});
  }
  r.tau2 = fit.tau2;
  r.kh_scale = fit.kh_scale;
  r.k = fit.k();
  r.p = fit.p();
  r.iterations = fit.convergence.iterations;
  r.gradient = fit.convergence.gradient;
  r.boundary = fit.convergence.boundary;
  r.method = method_name(fit.convergence.method);
  r.moderators = fit.moderators;
  r.center_offsets = fit.center_offsets;
  r.medians = fit.other_medians;
  r.dropped = fit.rows.dropped.size();
  return r;
}

std::string fit_report_to_json(const FitReport& r) {
  json coefficients = json::array();
  for (const auto& c : r.coefficients) {
    coefficients.push_back({{"label", c.label},
                            {"estimate", c.estimate},
                            {"std_error", c.std_error},
                            {"lower", c.lower},
                            {"upper", c.upper},
                            {"df", c.df}});
  }
  const json doc = {
      {"model", r.model},
      {"level", r.level},
      {"k", r.k},
      {"p", r.p},
      {"dropped", r.dropped},
      {"tau2", r.tau2},
      {"kh_scale", r.kh_scale},
      {"coefficients", coefficients},
      {"convergence", {{"iterations", r.iterations}, {"gradient", r.gradient}, {"boundary", r.boundary},
                       {"method", r.method}}},
      {"centering", {{"moderators", r.moderators}, {"offsets", r.center_offsets}, {"medians", r.medians}}},
  };
  return doc.dump(2) + "\n";
}

FitReport fit_report_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    FitReport r;
    r.model = doc.at("model").get<std::string>();
    r.level = doc.at("level").get<double>();
    r.k = doc.at("k").get<std::size_t>();
    r.p = doc.at("p").get<std::size_t>();
    r.dropped = doc.at("dropped").get<std::size_t>();
    r.tau2 = doc.at("tau2").get<double>();
    r.kh_scale = doc.at("kh_scale").get<double>();
    for (const auto& c : doc.at("coefficients")) {
      r.coefficients.push_back({c.at("label").get<std::string>(), c.at("estimate").get<double>(),
                                c.at("std_error").get<double>(), c.at("lower").get<double>(),
                                c.at("upper").get<double>(), c.at("df").get<int>()});
    }
    const auto& conv = doc.at("convergence");
    r.iterations = conv.at("iterations").get<int>();
    r.gradient = conv.at("gradient").get<double>();
    r.boundary = conv.at("boundary").get<bool>();
    r.method = conv.at("method").get<std::string>();
    const auto& centering = doc.at("centering");
    r.moderators = centering.at("moderators").get<std::vector<std::string>>();
    r.center_offsets = centering.at("offsets").get<std::vector<double>>();
    r.medians = centering.at("medians").get<std::vector<double>>();
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed fit report: ") + e.what());
  }
}

void print_fit_table(std::ostream& out, const FitReport& r) {
  const auto flags = out.flags();
  out << "Mixed-effects meta-regression: " << r.model << "\n";
  out << "k = " << r.k << " studies";
  if (r.dropped > 0) out << " (" << r.dropped << " dropped for missing moderators)";
  out << ", p = " << r.p << ", df = " << (r.k - r.p) << "\n";
  out << std::setprecision(6) << "tau^2 (REML) = " << r.tau2 << ", Knapp-Hartung scale = " << r.kh_scale << "\n\n";
  const int ci_pct = static_cast<int>(std::lround(r.level * 100.0));
  out << std::left << std::setw(16) << "coefficient" << std::right << std::setw(12) << "estimate" << std::setw(12)
      << "std.error" << std::setw(12) << ("lower " + std::to_string(ci_pct) + "%") << std::setw(12)
      << ("upper " + std::to_string(ci_pct) + "%") << "\n";
  out << std::fixed << std::setprecision(4);
  for (const auto& c : r.coefficients) {
    out << std::left << std::setw(16) << c.label << std::right << std::setw(12) << c.estimate << std::setw(12)
        << c.std_error << std::setw(12) << c.lower << std::setw(12) << c.upper << "\n";
  }
  if (!r.moderators.empty()) {
    out << "\ncentering offsets:";
    for (std::size_t j = 0; j < r.moderators.size(); ++j) {
      out << ' ' << r.moderators[j] << '=' << r.center_offsets[j];
    }
    out << "\n";
  }
  out << "REML: " << r.method << ", " << r.iterations << " iterations" << (r.boundary ? ", boundary" : "") << "\n";
  out.flags(flags);
}

std::string summary_to_csv(const SimulationSummary& summary) {
  // Coefficient rows in order of first appearance across the fitted models.
  std::vector<std::string> labels;
  for (const auto& spec : summary.specs) {
    for (const auto& c : spec.coefficients) {
      if (std::find(labels.begin(), labels.end(), c.label) == labels.end()) labels.push_back(c.label);
    }
  }
  auto order = [](const std::string& label) {
    if (label == kInterceptLabel) return 0;
    return label.find(':') == std::string::npos ? 1 : 2;
  };
  std::stable_sort(labels.begin(), labels.end(),
                   [&](const std::string& a, const std::string& b) { return order(a) < order(b); });

  std::ostringstream out;
  out << "metric,coefficient";
  for (const auto& spec : summary.specs) out << ",\"" << spec.model << '"';
  out << '\n';
  const std::pair<const char*, double CoefficientSummary::*> metrics[] = {
      {"coverage", &CoefficientSummary::coverage},
      {"median_length", &CoefficientSummary::median_length},
      {"bias", &CoefficientSummary::bias},
  };
  for (const auto& [metric, member] : metrics) {
    for (const auto& label : labels) {
      out << metric << ',' << label;
      for (const auto& spec : summary.specs) {
        out << ',';
        if (spec.empty()) {
          out << "NA";
          continue;
        }
        const auto it = std::find_if(spec.coefficients.begin(), spec.coefficients.end(),
                                     [&](const CoefficientSummary& c) { return c.label == label; });
        out << (it == spec.coefficients.end() ? std::string("-") : fixed4((*it).*member));
      }
      out << '\n';
    }
  }
  return out.str();
}

std::string summary_to_json(const SimulationSummary& summary) {
  json models = json::array();
  for (const auto& spec : summary.specs) {
    json coefficients = json::array();
    for (const auto& c : spec.coefficients) {
      coefficients.push_back({{"label", c.label},
                              {"truth", c.truth},
                              {"coverage", c.coverage},
                              {"median_length", c.median_length},
                              {"bias", c.bias}});
    }
    models.push_back({{"model", spec.model},
                      {"n_reps", spec.n_reps},
                      {"n_converged", spec.n_converged},
                      {"n_excluded", spec.n_excluded},
                      {"n_boundary", spec.n_boundary},
                      {"empty", spec.empty()},
                      {"coefficients", coefficients}});
  }
  const json doc = {{"scenario", summary.scenario},
                    {"seed", summary.master_seed},
                    {"n_reps", summary.n_reps},
                    {"level", summary.level},
                    {"models", models}};
  return doc.dump(2) + "\n";
}

void write_band_csv(std::ostream& out, const std::vector<PredictionBand>& bands) {
  const auto precision = out.precision();
  out << std::setprecision(17);
  out << "moderator,x,prediction,lower,upper,fixed_at\n";
  for (const auto& band : bands) {
    std::string fixed;
    for (const auto& [name, value] : band.fixed_at) {
      std::ostringstream os;
      os << std::setprecision(17) << name << '=' << value;
      fixed += (fixed.empty() ? "" : ";") + os.str();
    }
    for (const auto& pt : band.grid) {
      out << band.moderator << ',' << pt.x << ',' << pt.prediction << ',' << pt.lower << ',' << pt.upper << ','
          << fixed << '\n';
    }
  }
  out.precision(precision);
}

}  // namespace metareg
