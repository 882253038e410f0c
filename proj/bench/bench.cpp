#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "tscale/kernels.hpp"
#include "tscale/microformer.hpp"

using namespace tscale;

namespace {

std::vector<double> random_values(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

void BM_Matmul(benchmark::State& state, kernels::Exec exec) {
  const std::int64_t n = state.range(0);
  const auto a = random_values(static_cast<std::size_t>(n * n));
  const auto b = random_values(static_cast<std::size_t>(n * n));
  std::vector<double> c(static_cast<std::size_t>(n * n));
  for (auto _ : state) {
    kernels::matmul(exec, a, b, c, n, n, n);
    benchmark::DoNotOptimize(c.data());
  }
  state.counters["flops"] =
      benchmark::Counter(2.0 * n * n * n, benchmark::Counter::kIsIterationInvariantRate);
}

void BM_Attention(benchmark::State& state, kernels::Exec exec) {
  const std::int64_t seq = state.range(0), d = 64;
  const auto q = random_values(static_cast<std::size_t>(seq * d));
  const auto k = random_values(static_cast<std::size_t>(seq * d));
  const auto v = random_values(static_cast<std::size_t>(seq * d));
  std::vector<double> out(static_cast<std::size_t>(seq * d));
  for (auto _ : state) {
    kernels::attention(exec, q, k, v, out, seq, d, false);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_Forward(benchmark::State& state, kernels::Exec exec) {
  const std::int64_t h = state.range(0);
  const ShapeConfig shape{h / 64, h, 4, 128, 4};
  const auto model =
      microformer::materialize(shape, ArchVariant(Objective::gpt2), {1024, 128, 0}, {}, 1);
  std::vector<std::int64_t> ids(128);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::int64_t>(i * 7 % 1024);
  for (auto _ : state) benchmark::DoNotOptimize(microformer::forward(model, ids, exec));
}

}  // namespace

BENCHMARK_CAPTURE(BM_Matmul, serial, kernels::Exec::serial)->Arg(128)->Arg(256);
BENCHMARK_CAPTURE(BM_Matmul, parallel, kernels::Exec::parallel)->Arg(128)->Arg(256);
BENCHMARK_CAPTURE(BM_Attention, serial, kernels::Exec::serial)->Arg(128)->Arg(512);
BENCHMARK_CAPTURE(BM_Attention, parallel, kernels::Exec::parallel)->Arg(128)->Arg(512);
BENCHMARK_CAPTURE(BM_Forward, serial, kernels::Exec::serial)->Arg(256);
BENCHMARK_CAPTURE(BM_Forward, parallel, kernels::Exec::parallel)->Arg(256);

BENCHMARK_MAIN();
