#include <benchmark/benchmark.h>

#include "fraclab/chains.hpp"
#include "fraclab/whitney.hpp"

using namespace fraclab;

static void BM_WhitneyDecompose(benchmark::State& state) {
    auto dom = make_domain<2>("l_shape");
    for (auto _ : state) {
        auto fam = whitney_decompose<2>(dom, static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(fam.cubes.size());
    }
}
BENCHMARK(BM_WhitneyDecompose)->DenseRange(5, 8);

static void BM_BuildChains(benchmark::State& state) {
    auto dom = make_domain<2>("unit_square");
    auto fam = std::make_shared<WhitneyFamily<2>>(whitney_decompose<2>(dom, static_cast<int>(state.range(0))));
    for (auto _ : state) {
        auto c = build_chains<2>(fam, 4.0);
        benchmark::DoNotOptimize(c.rho);
    }
}
BENCHMARK(BM_BuildChains)->DenseRange(5, 7);
