#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "cdae/cdae.hpp"

using namespace cdae;

namespace {

Tensor random_tensor(const Shape& s, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  Tensor t(s);
  for (double& v : t.values()) v = u(gen);
  return t;
}

// args: channels in, channels out, kernel, height, width
void conv_args(benchmark::internal::Benchmark* b) {
  b->Args({1, 16, 9, 96, 48})->Args({16, 1, 9, 48, 24})->Args({1, 32, 9, 300, 140})->Args({32, 32, 5, 75, 35});
}

template <ConvAlgo Algo>
void BM_ConvForward(benchmark::State& state) {
  const auto ci = static_cast<std::size_t>(state.range(0)), co = static_cast<std::size_t>(state.range(1));
  const auto k = static_cast<std::size_t>(state.range(2));
  const Tensor x = random_tensor(Shape{1, ci, static_cast<std::size_t>(state.range(3)),
                                       static_cast<std::size_t>(state.range(4))}, 1);
  Rng rng(2);
  const ConvParams p = ConvParams::he_uniform(co, ci, k, k, rng);
  for (auto _ : state) benchmark::DoNotOptimize(conv_forward(x, p, Algo));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size() / ci * co * ci * k * k));
}
BENCHMARK(BM_ConvForward<ConvAlgo::Direct>)->Apply(conv_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvForward<ConvAlgo::Im2col>)->Apply(conv_args)->Unit(benchmark::kMillisecond);

template <ConvAlgo Algo>
void BM_ConvBackward(benchmark::State& state) {
  const auto ci = static_cast<std::size_t>(state.range(0)), co = static_cast<std::size_t>(state.range(1));
  const auto k = static_cast<std::size_t>(state.range(2));
  const Shape s{1, ci, static_cast<std::size_t>(state.range(3)), static_cast<std::size_t>(state.range(4))};
  const Tensor x = random_tensor(s, 1);
  const Tensor g = random_tensor(Shape{1, co, s.h, s.w}, 3);
  Rng rng(2);
  const ConvParams p = ConvParams::he_uniform(co, ci, k, k, rng);
  for (auto _ : state) benchmark::DoNotOptimize(conv_backward(x, p, g, Algo));
}
BENCHMARK(BM_ConvBackward<ConvAlgo::Direct>)->Apply(conv_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvBackward<ConvAlgo::Im2col>)->Apply(conv_args)->Unit(benchmark::kMillisecond);

void BM_MaxPool(benchmark::State& state) {
  const Tensor x = random_tensor(Shape{1, 32, 300, 140}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(maxpool_forward(x));
}
BENCHMARK(BM_MaxPool);

void BM_Unpool(benchmark::State& state) {
  const Tensor x = random_tensor(Shape{1, 32, 150, 70}, 5);
  for (auto _ : state) benchmark::DoNotOptimize(unpool_forward(x));
}
BENCHMARK(BM_Unpool);

void BM_TrainStepDesk(benchmark::State& state) {
  const ArchitectureSpec spec = parse_spec(preset_text("desk"));
  const Model m = Model::initialize(spec, 1);
  const Tensor x = random_tensor(Shape{1, 1, spec.input_h, spec.input_w}, 6);
  for (auto _ : state) {
    const ForwardTrace t = m.trace(x);
    const LossAndGrad lg = mse_loss(t.output(), x);
    benchmark::DoNotOptimize(m.backward(t, lg.grad));
  }
}
BENCHMARK(BM_TrainStepDesk)->Unit(benchmark::kMillisecond);

void BM_RocAuc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937 gen(7);
  std::uniform_int_distribution<int> tie(0, 99);
  std::vector<double> s(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = tie(gen), y[i] = static_cast<int>(i % 3 == 0);
  for (auto _ : state) benchmark::DoNotOptimize(roc_auc(s, y));
}
BENCHMARK(BM_RocAuc)->Arg(50)->Arg(1000)->Arg(100000);

}  // namespace
BENCHMARK_MAIN();
