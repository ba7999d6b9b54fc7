#include <benchmark/benchmark.h>

#include <random>

#include "spstgcn/dtw.hpp"
#include "spstgcn/graph.hpp"
#include "spstgcn/struct_adj.hpp"
#include "spstgcn/synthetic.hpp"

using namespace spstgcn;

namespace {

Series random_series(std::size_t t, std::size_t dims, std::mt19937_64& rng) {
    Series s(t, dims);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (double& v : s.values) v = dist(rng);
    return s;
}

} // namespace

static void BM_DtwExact(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const auto t = static_cast<std::size_t>(state.range(0));
    const Series a = random_series(t, 3, rng);
    const Series b = random_series(t, 3, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(dtw_exact(a, b).total_cost);
    }
}
BENCHMARK(BM_DtwExact)->Arg(32)->Arg(64)->Arg(128)->Arg(256);

static void BM_FastDtw(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const auto t = static_cast<std::size_t>(state.range(0));
    const int radius = static_cast<int>(state.range(1));
    const Series a = random_series(t, 3, rng);
    const Series b = random_series(t, 3, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fastdtw(a, b, radius).total_cost);
    }
}
BENCHMARK(BM_FastDtw)->Args({64, 1})->Args({256, 1})->Args({256, 4})->Args({1024, 1});

static void BM_StructuralAdjacency(benchmark::State& state) {
    const GraphSpec g = ntu_graph();
    SyntheticSpec spec;
    spec.samples_per_class = 1;
    spec.frames = static_cast<std::size_t>(state.range(0));
    const SyntheticDataset data = generate_synthetic_dataset(spec, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(structural_adjacency_for(data.tensors[0], g).as.data());
    }
}
BENCHMARK(BM_StructuralAdjacency)->Arg(64)->Arg(128);
