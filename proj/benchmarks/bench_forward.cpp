#include <benchmark/benchmark.h>

#include <random>

#include "spstgcn/nn.hpp"

using namespace spstgcn;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng) {
    Tensor t(std::move(shape));
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
    return t;
}

Tensor identity_as(std::size_t n, std::size_t v) {
    Tensor as({n, v, v});
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t i = 0; i < v; ++i) as[s * v * v + i * v + i] = 1.0;
    }
    return as;
}

} // namespace

static void BM_SpStLayerForward(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const GraphSpec g = ntu_graph();
    const SpatialAdjacency adj = build_spatial_adjacency(g, 2, 1e-3);
    const auto c = static_cast<std::size_t>(state.range(0));
    SpStGcnLayer layer(c, c, adj, true, "bench");
    layer.init_params(rng);
    const Tensor x = random_tensor({16, c, 64, 25, 1}, rng);
    const Tensor as = identity_as(16, 25);
    for (auto _ : state) {
        benchmark::DoNotOptimize(layer.forward(x, as).data());
    }
}
BENCHMARK(BM_SpStLayerForward)->Arg(8)->Arg(16)->Arg(32);

static void BM_BlockForwardBackward(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const GraphSpec g = ntu_graph();
    const SpatialAdjacency adj = build_spatial_adjacency(g, 2, 1e-3);
    const auto c = static_cast<std::size_t>(state.range(0));
    GcnBlock block(c, c, 1, 5, adj, true, "bench");
    block.init_params(rng);
    const Tensor x = random_tensor({16, c, 64, 25, 1}, rng);
    const Tensor as = identity_as(16, 25);
    const Tensor gout = random_tensor({16, c, 64, 25, 1}, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(block.forward(x, as, true).data());
        benchmark::DoNotOptimize(block.backward(gout).data());
    }
}
BENCHMARK(BM_BlockForwardBackward)->Arg(8)->Arg(16);

static void BM_ModelForward(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const GraphSpec g = ntu_graph();
    ModelConfig cfg = state.range(0) == 0 ? ModelConfig::desk(3) : ModelConfig::defaults(3);
    cfg.bodies = 1;
    SpStGcnModel model(cfg, g, 1);
    model.set_training(false);
    const Tensor x = random_tensor({16, 6, 64, 25, 1}, rng);
    const Tensor as = identity_as(16, 25);
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.forward(x, as).data());
    }
}
BENCHMARK(BM_ModelForward)->Arg(0)->Arg(1);

BENCHMARK_MAIN();
