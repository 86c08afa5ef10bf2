#include <benchmark/benchmark.h>

#include "pnr/inference.hpp"
#include "pnr/mcsim.hpp"
#include "pnr/pmatrix.hpp"

namespace {

void BM_BuildMultiplexed(benchmark::State& state) {
  const int m_max = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(pnr::build_multiplexed(pnr::DetectorConfig{}, m_max));
}
BENCHMARK(BM_BuildMultiplexed)->Arg(40)->Arg(100);

void BM_FitPoissonMu(benchmark::State& state) {
  const auto p = pnr::build_multiplexed(pnr::DetectorConfig{}, 40);
  const auto q = pnr::forward(p, pnr::poisson(2.0, 40));
  for (auto _ : state) benchmark::DoNotOptimize(pnr::fit_poisson_mu(p, q));
}
BENCHMARK(BM_FitPoissonMu);

void BM_SimulateCw(benchmark::State& state) {
  auto cfg = pnr::SimConfig::parallel28();
  cfg.workers = 1;
  const double rate = static_cast<double>(state.range(0));
  const double duration = 1e5 / rate;
  for (auto _ : state) benchmark::DoNotOptimize(pnr::simulate_cw(cfg, rate, duration));
  state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_SimulateCw)->Arg(10'000'000)->Arg(1'000'000'000)->Unit(benchmark::kMillisecond);

void BM_SimulatePulsed(benchmark::State& state) {
  auto cfg = pnr::SimConfig::parallel28();
  cfg.workers = 1;
  pnr::PulsedOptions o;
  o.mu = 3.0;
  o.shots = 100000;
  for (auto _ : state) benchmark::DoNotOptimize(pnr::simulate_pulsed(cfg, o));
  state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_SimulatePulsed)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
