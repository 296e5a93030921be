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

// Serial reference vs OpenMP paths of the parallel kernels.

#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "hvac/analysis.hpp"
#include "hvac/ibex.hpp"
#include "hvac/plant.hpp"
#include "hvac/weather.hpp"

namespace {

using namespace hvac;

struct Dataset {
  std::vector<ImitationSample> samples;
  PhysicalParams state;
  QuadCostParams cost{1.0, 0.1, 1.0};
  PolicyContext ctx;
};

const Dataset& dataset() {
  static const Dataset d = [] {
    Dataset d;
    PlantConfig plant;
    d.state = plant.true_params;
    const auto weather = synthesize_weather(9, 3, climate_preset("west-lafayette-winter"));
    IbexController expert(d.state, d.cost, d.ctx, IbexHyper{}, EconomicWeights{}, {false, false, true});
    EpisodeOptions opt;
    opt.hours = 7 * 24;
    const auto schedule = SetpointSchedule::occupied_default();
    const auto run = run_episode(expert, plant, weather, schedule, {}, 3, opt);
    d.samples = log_to_imitation(run.log, weather, schedule, opt.clock);
    d.state.capacitance *= 1.2;
    return d;
  }();
  return d;
}

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::kParallel : Exec::kSerial; }

void BM_ImitationBatch(benchmark::State& st) {
  const auto& d = dataset();
  std::vector<std::size_t> idx(static_cast<std::size_t>(st.range(1)));
  std::iota(idx.begin(), idx.end(), 0);
  for (auto _ : st) {
    auto r = imitation_batch(d.state, d.cost, d.ctx, d.samples, idx, 1000.0, exec_of(st));
    benchmark::DoNotOptimize(r.loss.action);
  }
  st.SetItemsProcessed(st.iterations() * st.range(1));
  st.SetLabel(st.range(0) ? "parallel" : "serial");
}
BENCHMARK(BM_ImitationBatch)->ArgsProduct({{0, 1}, {24, 144}})->Unit(benchmark::kMillisecond);

void BM_MonteCarloSavings(benchmark::State& st) {
  SignatureFit base;
  base.beta0 = 230.0;
  base.beta1 = -10.0;
  base.cov[0][0] = 25.0;
  base.cov[0][1] = base.cov[1][0] = -1.0;
  base.cov[1][1] = 0.4;
  SignatureFit ctrl = base;
  ctrl.beta0 = 195.0;
  ctrl.beta1 = -7.5;
  MonteCarloOptions opt;
  opt.n = static_cast<std::size_t>(st.range(1));
  opt.exec = exec_of(st);
  for (auto _ : st) {
    auto r = monte_carlo_savings(base, ctrl, CopCurve{}, -7.0, 5.0, opt);
    benchmark::DoNotOptimize(r.mean);
  }
  st.SetItemsProcessed(st.iterations() * st.range(1));
  st.SetLabel(st.range(0) ? "parallel" : "serial");
}
BENCHMARK(BM_MonteCarloSavings)->ArgsProduct({{0, 1}, {100000, 1000000}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
