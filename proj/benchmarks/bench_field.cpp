// Copyright 2026 The smd Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "smd/coefficients.hpp"
#include "smd/measures.hpp"
#include "smd/random.hpp"
#include "smd/simulator.hpp"

namespace {

smd::EmpiricalMeasure gaussian_sample(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> xs(n);
  for (double& x : xs) x = normal(rng);
  return smd::EmpiricalMeasure::from_1d(std::move(xs));
}

void BM_FieldBesselX2(benchmark::State& state) {
  const auto pi = gaussian_sample(static_cast<std::size_t>(state.range(0)), 1);
  smd::FieldEngine engine(smd::builtin("second_moment_1d"), smd::bessel(3.0), 0.0);
  smd::SmdField field;
  for (auto _ : state) {
    engine.prepare(pi.view());
    engine.complete(field);
    benchmark::DoNotOptimize(field.b.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FieldBesselX2)->Arg(1000)->Arg(4000);

void BM_FieldMeanVariance(benchmark::State& state) {
  const auto pi = gaussian_sample(static_cast<std::size_t>(state.range(0)), 2);
  smd::FieldEngine engine(smd::builtin("mean_and_second_1d"), smd::mean_variance(3.0), 0.0);
  smd::SmdField field;
  for (auto _ : state) {
    engine.prepare(pi.view());
    engine.complete(field);
    benchmark::DoNotOptimize(field.b.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FieldMeanVariance)->Arg(1000)->Arg(4000);

void BM_ClosedFormMeanVariance(benchmark::State& state) {
  const auto pi = gaussian_sample(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) {
    auto field = smd::closed_form(smd::ClosedForm::MeanVariance, pi, {3.0, 0.0});
    benchmark::DoNotOptimize(field.b.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ClosedFormMeanVariance)->Arg(1000);

void BM_PrivateNormals(benchmark::State& state) {
  const smd::NoiseSource noise(1, 2);
  double out[2];
  std::uint64_t i = 0;
  for (auto _ : state) {
    noise.private_normals(7, i++, out);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_PrivateNormals);

void BM_Wasserstein2(benchmark::State& state) {
  const auto a = gaussian_sample(static_cast<std::size_t>(state.range(0)), 3);
  const auto b = gaussian_sample(static_cast<std::size_t>(state.range(0)) * 4, 4);
  for (auto _ : state) benchmark::DoNotOptimize(smd::wasserstein_1d(2.0, a, b));
}
BENCHMARK(BM_Wasserstein2)->Arg(1000);

void BM_RunBessel(benchmark::State& state) {
  smd::SimConfig cfg;
  cfg.n_particles = 1000;
  cfg.dt = 1e-4;
  cfg.t_final = 0.1;
  const auto obs = smd::builtin("second_moment_1d");
  const auto drv = smd::bessel(3.0);
  const auto dyn = smd::BaselineDynamics::none(1);
  for (auto _ : state) {
    auto traj = smd::run(cfg, obs, drv, dyn);
    benchmark::DoNotOptimize(traj.times.data());
  }
  state.SetItemsProcessed(state.iterations() * cfg.n_steps() * cfg.n_particles);
}
BENCHMARK(BM_RunBessel)->Unit(benchmark::kMillisecond);

void BM_RunDoubleWell(benchmark::State& state) {
  smd::SimConfig cfg;
  cfg.n_particles = 1000;
  cfg.dt = 1e-3;
  cfg.t_final = 1.0;
  cfg.gamma = 0.4;
  cfg.init = smd::GaussianInit{-1.5, 0.5};
  const auto obs = smd::builtin("mean_and_second_1d");
  const auto drv = smd::mean_variance(3.0);
  const auto dyn = smd::BaselineDynamics::granular_media(1, smd::builtin_double_well(), 0.7);
  for (auto _ : state) {
    auto traj = smd::run(cfg, obs, drv, dyn);
    benchmark::DoNotOptimize(traj.times.data());
  }
  state.SetItemsProcessed(state.iterations() * cfg.n_steps() * cfg.n_particles);
}
BENCHMARK(BM_RunDoubleWell)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
