#include <benchmark/benchmark.h>

#include "stable_tmle/estimators.hpp"
#include "stable_tmle/ou_model.hpp"
#include "stable_tmle/sampling.hpp"
#include "stable_tmle/trig_projection.hpp"

using namespace stable_tmle;

static void BM_TrigMoments(benchmark::State& state) {
  const Grid grid = equidistant_grid(0.01, 5.0 / static_cast<double>(state.range(0)),
                                     static_cast<int>(state.range(0)));
  const StableParams th{0.0, 1.0, 1.3, 0.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(trig_moments(grid, th));
  }
}
BENCHMARK(BM_TrigMoments)->Arg(25)->Arg(51)->Arg(101)->Unit(benchmark::kMicrosecond);

static void BM_TmlFit(benchmark::State& state) {
  RngStream rng(1, 0);
  const auto xs = sample_stable(static_cast<std::size_t>(state.range(0)), {0.0, 1.0, 1.3, 0.0}, rng);
  const FitConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tml_fit(xs, cfg));
  }
}
BENCHMARK(BM_TmlFit)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

static void BM_ConditionalScore(benchmark::State& state) {
  RngStream rng(2, 0);
  const OUParams p{1.5, 1.0, 1.0};
  const OUPath path = sample_ou_path(p, 0.1, static_cast<std::size_t>(state.range(0)), rng);
  const Grid grid = default_ou_grid();
  for (auto _ : state) {
    benchmark::DoNotOptimize(conditional_score(path, p, grid));
  }
}
BENCHMARK(BM_ConditionalScore)->Arg(1000)->Unit(benchmark::kMicrosecond);

static void BM_ConditionalScoreReference(benchmark::State& state) {
  RngStream rng(2, 0);
  const OUParams p{1.5, 1.0, 1.0};
  const OUPath path = sample_ou_path(p, 0.1, static_cast<std::size_t>(state.range(0)), rng);
  const Grid grid = default_ou_grid();
  for (auto _ : state) {
    benchmark::DoNotOptimize(conditional_score_reference(path, p, grid));
  }
}
BENCHMARK(BM_ConditionalScoreReference)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_TcmlFit(benchmark::State& state) {
  RngStream rng(3, 0);
  const OUPath path = sample_ou_path({1.5, 1.0, 1.0}, 0.1, 1000, rng);
  const OUFitConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tcml_fit(path, cfg));
  }
}
BENCHMARK(BM_TcmlFit)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
