#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "gbbtrade/benchmarks.hpp"
#include "gbbtrade/learners.hpp"
#include "gbbtrade/random.hpp"
#include "gbbtrade/schedule.hpp"

using namespace gbbtrade;

static void BM_PrimalRound(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    const GridSpec grid(k);
    PrimalDualLearner pd(PrimalState(ActionSet(grid), 0.1, 1e-4, 2e-4), DualState(100.0, 0.01));
    LearnerRng rng(1);
    StreamRng env(2);
    for (auto _ : state) {
        const MarketOutcome o(uniform01(env), uniform01(env));
        const PriceQuote q = pd.propose(rng);
        pd.observe(observe(q, o));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PrimalRound)->Arg(8)->Arg(16)->Arg(32);

static void BM_OptDistGrid(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    StreamRng rng(3);
    std::vector<ActionScore> scores(n);
    for (std::size_t a = 0; a < n; ++a) scores[a] = {a, uniform01(rng), 2.0 * uniform01(rng) - 1.0};
    scores[0].r = 0.5;
    for (auto _ : state) benchmark::DoNotOptimize(opt_dist_grid(scores));
}
BENCHMARK(BM_OptDistGrid)->Arg(64)->Arg(256)->Arg(1024);

static void BM_SampleSequence(benchmark::State& state) {
    const int horizon = static_cast<int>(state.range(0));
    auto schedule = std::make_shared<const CorruptionSchedule>(
        Distribution(BoxMixture({{0.5, Box{0.0, 0.5, 0.5, 1.0}}, {0.5, Box{0.0, 1.0, 0.0, 1.0}}})));
    for (auto _ : state) benchmark::DoNotOptimize(sample_sequence(schedule, horizon, 7));
    state.SetItemsProcessed(state.iterations() * horizon);
}
BENCHMARK(BM_SampleSequence)->Arg(1 << 12)->Arg(1 << 16);

static void BM_ExpectedMoments(benchmark::State& state) {
    const GridSpec grid(static_cast<int>(state.range(0)));
    const Distribution d(BoxMixture({{0.3, Box{0.0, 0.4, 0.6, 1.0}}, {0.7, Box{0.0, 1.0, 0.0, 1.0}}}));
    for (auto _ : state) benchmark::DoNotOptimize(expected_moments(d, grid));
}
BENCHMARK(BM_ExpectedMoments)->Arg(16)->Arg(64);
BENCHMARK_MAIN();
