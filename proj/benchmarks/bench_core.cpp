#include <benchmark/benchmark.h>

#include "revhelp/ops.hpp"
#include "revhelp/rng.hpp"

using namespace revhelp;

static void bm_matmul(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    RngStream rng(1);
    Tensor a = Tensor::uniform({n, n}, -1, 1, rng);
    Tensor b = Tensor::uniform({n, n}, -1, 1, rng);
    for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b).data().data());
    state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(bm_matmul)->Arg(64)->Arg(128)->Arg(256);

static void bm_softmax_rows(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    RngStream rng(2);
    Tensor x = Tensor::uniform({n, n}, -5, 5, rng);
    for (auto _ : state) benchmark::DoNotOptimize(softmax_rows(x).data().data());
}
BENCHMARK(bm_softmax_rows)->Arg(100)->Arg(400);

static void bm_conv1d(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    RngStream rng(3);
    Tensor x = Tensor::uniform({n, 100}, -1, 1, rng);
    Tensor k = Tensor::uniform({3, 100, 64}, -1, 1, rng);
    Tensor b = Tensor::uniform({64}, -1, 1, rng);
    for (auto _ : state) benchmark::DoNotOptimize(conv1d(x, 3, k, b).data().data());
}
BENCHMARK(bm_conv1d)->Arg(100)->Arg(400);

static void bm_backward_attention(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0)), d = 50;
    RngStream rng(4);
    Tensor q = Tensor::uniform({n, d}, -1, 1, rng, true);
    Tensor k = Tensor::uniform({n, d}, -1, 1, rng, true);
    Tensor v = Tensor::uniform({n, d}, -1, 1, rng, true);
    for (auto _ : state) {
        Tensor att = matmul(softmax_rows(scale(matmul(q, transpose(k)), 0.1414)), v);
        Tensor loss = sum(att);
        backward(loss);
        q.clear_grad();
        k.clear_grad();
        v.clear_grad();
    }
}
BENCHMARK(bm_backward_attention)->Arg(100)->Arg(400);

BENCHMARK_MAIN();
