// Microbenchmarks for the hot paths: the convolutional encoder, a full
// forward pass per variant, and one optimizer step.

#include <benchmark/benchmark.h>

#include "roirank/adam.hpp"
#include "roirank/model.hpp"
#include "roirank/ops.hpp"

using namespace roirank;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng) {
    Tensor t(std::move(shape));
    for (double& v : t.values()) v = rng.uniform(-1.0, 1.0);
    return t;
}

void BM_Conv1dForward(benchmark::State& state) {
    Rng rng(1);
    Value x = make_constant(random_tensor({32, 32, 64}, rng));
    Value w = make_constant(random_tensor({64, 32, 3}, rng));
    Value b = make_constant(random_tensor({64}, rng));
    NoGradGuard off;
    for (auto _ : state) {
        benchmark::DoNotOptimize(conv1d(x, w, b, 1));
    }
}
BENCHMARK(BM_Conv1dForward);

void BM_Conv1dBackward(benchmark::State& state) {
    Rng rng(1);
    Tensor xt = random_tensor({32, 32, 64}, rng);
    Tensor wt = random_tensor({64, 32, 3}, rng);
    Tensor bt = random_tensor({64}, rng);
    for (auto _ : state) {
        Value x = make_leaf(xt, true);
        Value w = make_leaf(wt, true);
        Value b = make_leaf(bt, true);
        Value y = conv1d(x, w, b, 1);
        Value loss = mean_lastdim(reshape(y, {1, y->value.size()}));
        backward(loss);
        benchmark::DoNotOptimize(w->grad.data());
    }
}
BENCHMARK(BM_Conv1dBackward);

void BM_ClassifyForward(benchmark::State& state) {
    ModelConfig cfg;
    cfg.variant = static_cast<Variant>(state.range(0));
    Model model(cfg, 1);
    Rng rng(2);
    Tensor batch = random_tensor({8, 16, 32}, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.classify_forward(batch, false));
    }
}
BENCHMARK(BM_ClassifyForward)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
    ModelConfig cfg;
    Model model(cfg, 1);
    Rng rng(3);
    Tensor batch = random_tensor({8, 16, 32}, rng);
    std::vector<int> labels;
    for (int i = 0; i < 8; ++i) labels.push_back(i % 2);
    Adam opt;
    for (auto _ : state) {
        Value x = make_constant(batch);
        Value loss = softmax_cross_entropy(model.classify_forward(x, true), labels);
        backward(loss);
        opt.step(model.params().params(), 0.0005);
        benchmark::DoNotOptimize(loss->value.data());
    }
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
