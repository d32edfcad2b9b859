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

#include <benchmark/benchmark.h>

#include "metareg/estimation.hpp"
#include "metareg/inference.hpp"
#include "metareg/simulation.hpp"

namespace metareg {
namespace {

ModelSpec interaction_spec() {
  ModelSpec spec;
  spec.moderators = {"year", "age"};
  spec.interaction = true;
  return spec;
}

void BM_FitInteractionModel(benchmark::State& state) {
  const Dataset data = make_synthetic_design();
  const auto effects = dataset_effects(data);
  const ModelSpec spec = interaction_spec();
  for (auto _ : state) {
    const FitResult fit = fit_model(data, spec, effects);
    benchmark::DoNotOptimize(confidence_intervals(fit));
  }
}
BENCHMARK(BM_FitInteractionModel);

void BM_RemlTau2(benchmark::State& state) {
  const Dataset data = make_synthetic_design();
  const auto effects = dataset_effects(data);
  const BuiltDesign built = build_design(data, interaction_spec());
  for (auto _ : state) benchmark::DoNotOptimize(reml_tau2(built.design, effects));
}
BENCHMARK(BM_RemlTau2);

void BM_Simulation(benchmark::State& state) {
  Scenario s;
  s.name = "bench";
  s.true_beta = {-1.1477, -0.0066, 0.0333, -0.0018};
  s.tau2 = 0.2484;
  s.design = scenario_design_from_dataset(make_synthetic_design(), {"year", "age"});
  s.n_reps = 200;
  s.master_seed = 1;
  for (const bool interaction : {false, true}) {
    ModelSpec spec = interaction_spec();
    spec.interaction = interaction;
    spec.centering = Centering::kNone;
    s.fitted_specs.push_back(spec);
  }
  const auto threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_simulation(s, threads));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.n_reps));
}
BENCHMARK(BM_Simulation)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace metareg

BENCHMARK_MAIN();
