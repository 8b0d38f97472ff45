#include <benchmark/benchmark.h>

#include "fraclab/fixtures.hpp"
#include "fraclab/functional.hpp"

using namespace fraclab;

static void BM_SeminormFull(benchmark::State& state) {
    auto dom = make_domain<2>("unit_square");
    auto u = fixture<2>(dom, static_cast<int>(state.range(0)), "linear");
    FracParams P;
    for (auto _ : state) {
        auto v = seminorm_full(u, P);
        benchmark::DoNotOptimize(v.integral);
    }
    state.SetComplexityN(1 << state.range(0));
}
BENCHMARK(BM_SeminormFull)->DenseRange(4, 7)->Unit(benchmark::kMillisecond)->Complexity();

static void BM_SeminormTau(benchmark::State& state) {
    auto dom = make_domain<2>("unit_square");
    auto u = fixture<2>(dom, static_cast<int>(state.range(0)), "linear");
    FracParams P;
    for (auto _ : state) {
        auto v = seminorm_tau(u, P);
        benchmark::DoNotOptimize(v.integral);
    }
}
BENCHMARK(BM_SeminormTau)->DenseRange(4, 8)->Unit(benchmark::kMillisecond);
