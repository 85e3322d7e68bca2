// Serial reference vs OpenMP kernels at the shapes the trainer actually hits.
// The two variants must stay bit-identical; this target tracks what the
// parallel split buys (run with --benchmark_counters_tabular=true).

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "etd/kernels.hpp"
#include "etd/rng.hpp"

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  etd::Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

template <typename F>
void run_matmul_bias(benchmark::State& state, F fn) {
  const std::size_t n = std::size_t(state.range(0));
  const std::size_t k = std::size_t(state.range(1));
  const std::size_t m = std::size_t(state.range(2));
  const std::vector<double> x = random_values(n * k, 1);
  const std::vector<double> w = random_values(k * m, 2);
  const std::vector<double> b = random_values(m, 3);
  std::vector<double> y(n * m);
  for (auto _ : state) {
    fn(x.data(), n, k, w.data(), m, b.data(), y.data());
    benchmark::DoNotOptimize(y.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(std::int64_t(state.iterations()) * std::int64_t(n * k * m));
}

void BM_MatmulBiasSerial(benchmark::State& state) {
  run_matmul_bias(state, etd::kernels::serial::matmul_bias);
}

void BM_MatmulBiasOmp(benchmark::State& state) {
  run_matmul_bias(state, etd::kernels::matmul_bias);
}

template <typename F>
void run_conv_forward(benchmark::State& state, F fn) {
  const std::size_t n = std::size_t(state.range(0));
  const std::size_t ci = std::size_t(state.range(1));
  const std::size_t co = std::size_t(state.range(2));
  const std::size_t h = 6, w = 8;
  const std::vector<double> x = random_values(n * h * w * ci, 4);
  const std::vector<double> kern = random_values(9 * ci * co, 5);
  const std::vector<double> bias = random_values(co, 6);
  std::vector<double> y(n * h * w * co);
  for (auto _ : state) {
    fn(x.data(), n, h, w, ci, kern.data(), co, bias.data(), y.data());
    benchmark::DoNotOptimize(y.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(std::int64_t(state.iterations()) *
                          std::int64_t(n * h * w * 9 * ci * co));
}

void BM_Conv2dForwardSerial(benchmark::State& state) {
  run_conv_forward(state, etd::kernels::serial::conv2d_forward);
}

void BM_Conv2dForwardOmp(benchmark::State& state) {
  run_conv_forward(state, etd::kernels::conv2d_forward);
}

template <typename F>
void run_conv_backward_params(benchmark::State& state, F fn) {
  const std::size_t n = std::size_t(state.range(0));
  const std::size_t ci = std::size_t(state.range(1));
  const std::size_t co = std::size_t(state.range(2));
  const std::size_t h = 6, w = 8;
  const std::vector<double> x = random_values(n * h * w * ci, 7);
  const std::vector<double> dy = random_values(n * h * w * co, 8);
  std::vector<double> dkern(9 * ci * co);
  std::vector<double> dbias(co);
  for (auto _ : state) {
    fn(x.data(), n, h, w, ci, dy.data(), co, dkern.data(), dbias.data());
    benchmark::DoNotOptimize(dkern.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(std::int64_t(state.iterations()) *
                          std::int64_t(n * h * w * 9 * ci * co));
}

void BM_Conv2dBackwardParamsSerial(benchmark::State& state) {
  run_conv_backward_params(state, etd::kernels::serial::conv2d_backward_params);
}

void BM_Conv2dBackwardParamsOmp(benchmark::State& state) {
  run_conv_backward_params(state, etd::kernels::conv2d_backward_params);
}

}  // namespace

// batch x in-features x out-features of the dense layers at full width.
BENCHMARK(BM_MatmulBiasSerial)->Args({128, 48, 128})->Args({128, 128, 256})->Args({512, 256, 128});
BENCHMARK(BM_MatmulBiasOmp)->Args({128, 48, 128})->Args({128, 128, 256})->Args({512, 256, 128});
// batch x in-channels x filters on the 6x8 grid.
BENCHMARK(BM_Conv2dForwardSerial)->Args({128, 1, 128})->Args({128, 128, 128});
BENCHMARK(BM_Conv2dForwardOmp)->Args({128, 1, 128})->Args({128, 128, 128});
BENCHMARK(BM_Conv2dBackwardParamsSerial)->Args({128, 128, 128});
BENCHMARK(BM_Conv2dBackwardParamsOmp)->Args({128, 128, 128});

BENCHMARK_MAIN();
