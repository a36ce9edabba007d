// Copyright 2026 The ebm-sphere Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <benchmark/benchmark.h>

#include "ebm/metrics.h"
#include "ebm/sampler.h"
#include "ebm/stein.h"
#include "ebm/train.h"

namespace ebm {
namespace {

ParticleModel bench_model(int d, Eigen::Index m, Rng& rng) {
  TrainConfig cfg = TrainConfig::defaults(Estimator::kMle, Regime::kF1);
  cfg.m = m;
  return init_model(cfg, d, rng);
}

void BM_Energies(benchmark::State& state) {
  Rng rng = derive_stream(1, "bench");
  const ParticleModel model = bench_model(10, state.range(0), rng);
  const Mat pts = uniform_samples(rng, 10, state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(energies(model, pts));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_Energies)->Args({200, 1000})->Args({500, 5000});

void BM_GibbsDraw(benchmark::State& state) {
  Rng rng = derive_stream(2, "bench");
  const ParticleModel model = bench_model(10, 200, rng);
  for (auto _ : state) benchmark::DoNotOptimize(gibbs_draw(model, state.range(0), MhConfig{}, rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GibbsDraw)->Arg(1000)->Arg(5000);

void BM_MleGradient(benchmark::State& state) {
  Rng rng = derive_stream(3, "bench");
  const ParticleModel model = bench_model(10, 200, rng);
  const Mat data = uniform_samples(rng, 10, state.range(0));
  const TrainConfig cfg = TrainConfig::defaults(Estimator::kMle, Regime::kF1);
  for (auto _ : state) benchmark::DoNotOptimize(mle_gradient(model, data, cfg, rng));
}
BENCHMARK(BM_MleGradient)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_KsdGradient(benchmark::State& state) {
  Rng rng = derive_stream(4, "bench");
  const ParticleModel model = bench_model(10, 200, rng);
  const Mat data = uniform_samples(rng, 10, state.range(0));
  const TrainConfig cfg = TrainConfig::defaults(Estimator::kKsd, Regime::kF1);
  for (auto _ : state) benchmark::DoNotOptimize(ksd_gradient(model, data, cfg));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KsdGradient)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_F1sdInner(benchmark::State& state) {
  Rng rng = derive_stream(5, "bench");
  const ParticleModel model = bench_model(10, 200, rng);
  const SampleSet xs = unstack(uniform_samples(rng, 10, state.range(0)));
  F1sdConfig cfg;
  cfg.steps = 20;
  for (auto _ : state) benchmark::DoNotOptimize(f1sd_inner_maximize(model, xs, cfg, rng));
}
BENCHMARK(BM_F1sdInner)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_GridKl(benchmark::State& state) {
  Rng rng = derive_stream(6, "bench");
  const BatchEnergy p = energy_fn(bench_model(10, 2, rng));
  const BatchEnergy q = energy_fn(bench_model(10, 200, rng));
  for (auto _ : state) benchmark::DoNotOptimize(grid_kl(p, q, 10, state.range(0), rng));
}
BENCHMARK(BM_GridKl)->Arg(20000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace ebm

BENCHMARK_MAIN();
