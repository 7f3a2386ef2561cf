// Microbenchmarks for the pipeline's hot paths: the forward pass, greedy
// generation, probe training, and one selector training step.
#include <benchmark/benchmark.h>

#include "lito/directions.hpp"
#include "lito/lm.hpp"
#include "lito/selector.hpp"
#include "lito/sweep.hpp"

using namespace lito;

namespace {

ModelWeights bench_model() {
    static ModelWeights w = init_model(ModelConfig{2, 2, 32, 16, 128, 64}, 42);
    return w;
}

std::vector<int> bench_prompt() { return encode_bytes("Q: code f?\nA:"); }

InterventionSet bench_intervention() {
    SeededRng rng(7);
    Vector d(16);
    for (auto& x : d) x = rng.normal();
    InterventionSet iv;
    iv.entries.push_back({{1, 0}, normalized(d), 10.0});
    return iv;
}

void bm_forward_step(benchmark::State& state) {
    ModelWeights w = bench_model();
    std::vector<int> prompt = bench_prompt();
    InterventionSet none = InterventionSet::none();
    for (auto _ : state) {
        benchmark::DoNotOptimize(forward_step(w, prompt, none));
    }
}
BENCHMARK(bm_forward_step);

void bm_forward_step_intervened(benchmark::State& state) {
    ModelWeights w = bench_model();
    std::vector<int> prompt = bench_prompt();
    InterventionSet iv = bench_intervention();
    for (auto _ : state) {
        benchmark::DoNotOptimize(forward_step(w, prompt, iv));
    }
}
BENCHMARK(bm_forward_step_intervened);

void bm_generate(benchmark::State& state) {
    ModelWeights w = bench_model();
    std::vector<int> prompt = bench_prompt();
    InterventionSet iv = bench_intervention();
    for (auto _ : state) {
        benchmark::DoNotOptimize(generate(w, prompt, iv, 8, '\n'));
    }
}
BENCHMARK(bm_generate);

void bm_train_probe(benchmark::State& state) {
    SeededRng rng(5);
    Vector axis(16);
    for (auto& x : axis) x = rng.normal();
    axis = normalized(axis);
    ProbeDataset data;
    for (int i = 0; i < 200; ++i) {
        Vector a(16);
        for (auto& x : a) x = rng.normal();
        data.items.push_back({a, dot(axis, a) > 0.0 ? 1 : 0});
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(train_probe(data, 3));
    }
}
BENCHMARK(bm_train_probe);

void bm_selector_step(benchmark::State& state) {
    SeededRng rng(9);
    SelectorModel m = SelectorModel::random_init(32, SelectorVariant::recurrent, rng);
    std::vector<Vector> seq(5, Vector(32));
    std::vector<int> labels = {0, 1, 0, 1, 1};
    for (auto& h : seq)
        for (auto& x : h) x = rng.normal();
    for (auto _ : state) {
        benchmark::DoNotOptimize(selector_backward(m, seq, labels, 0.001));
    }
}
BENCHMARK(bm_selector_step);

}  // namespace

BENCHMARK_MAIN();
