#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "qtele/experiments.hpp"
#include "qtele/fit.hpp"
#include "qtele/oracle.hpp"

namespace {

const qtele::HomParams kHom{1e-3, 8e-3, 0.9, 1.2e-2, 4.5e-3};

qtele::TeleportParams teleport_point() {
  qtele::TeleportParams p;
  p.alpha2 = 1e-3;
  p.mu = 8e-3;
  p.zeta = 0.9;
  p.eta_i = 1.2e-2;
  p.eta_s = 4.5e-3;
  p.phi = std::numbers::pi / 2;
  return p;
}

void BM_ThreeFoldClosed(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(qtele::v_three_fold(kHom));
}
BENCHMARK(BM_ThreeFoldClosed);

void BM_ThreeFoldPipeline(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(qtele::p_three_fold_pipeline(kHom));
}
BENCHMARK(BM_ThreeFoldPipeline);

void BM_TeleportFixedPhase(benchmark::State& state) {
  const auto p = teleport_point();
  for (auto _ : state) benchmark::DoNotOptimize(qtele::bsm_conditional_probs(p));
}
BENCHMARK(BM_TeleportFixedPhase);

// Default 360-step phase scan.
void BM_FidelityPhaseScan(benchmark::State& state) {
  const auto p = teleport_point();
  for (auto _ : state) benchmark::DoNotOptimize(qtele::fidelity(p));
}
BENCHMARK(BM_FidelityPhaseScan)->Unit(benchmark::kMillisecond);

void BM_Heatmap(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = 1e-5 * std::pow(1e4, double(i) / double(n - 1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(qtele::visibility_surface(qtele::VisibilityKind::kThreeFold, grid, grid, 0.9, 1.2e-2, 4.5e-3));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n));
}
BENCHMARK(BM_Heatmap)->Arg(51)->Arg(201)->Unit(benchmark::kMillisecond);

void BM_OracleHom(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(qtele::oracle_hom(kHom));
}
BENCHMARK(BM_OracleHom)->Unit(benchmark::kMillisecond);

void BM_OracleTeleport(benchmark::State& state) {
  const auto p = teleport_point();
  for (auto _ : state) benchmark::DoNotOptimize(qtele::oracle_teleport(p));
}
BENCHMARK(BM_OracleTeleport)->Unit(benchmark::kMillisecond);

void BM_OptimalAlpha(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(qtele::optimal_alpha2(qtele::VisibilityKind::kThreeFold, kHom));
}
BENCHMARK(BM_OptimalAlpha)->Unit(benchmark::kMicrosecond);

void BM_TwoFoldFit(benchmark::State& state) {
  std::vector<qtele::DataPoint> data;
  for (int i = 0; i < 20; ++i) {
    const double a = 1e-5 * std::pow(1e4, i / 19.0);
    data.push_back({a, qtele::v_two_fold({a, 8e-3, 0.8, 6.9e-2, 1.0}), 0.01, qtele::DataKind::kTwoFold});
  }
  for (auto _ : state) benchmark::DoNotOptimize(qtele::fit_two_fold(data, 8e-3, 1));
}
BENCHMARK(BM_TwoFoldFit)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
