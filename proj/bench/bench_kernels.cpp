// Serial reference kernels against their OpenMP variants, plus end-to-end
// front solving with and without the parallel preference loop.

#include <benchmark/benchmark.h>

#include <vector>

#include "moco/inference.hpp"
#include "moco/kernels.hpp"
#include "moco/rng.hpp"

namespace {

std::vector<float> random_matrix(int rows, int cols, std::uint64_t seed) {
  moco::Rng rng(seed);
  std::vector<float> out(static_cast<std::size_t>(rows) * cols);
  for (auto& x : out) x = static_cast<float>(moco::uniform01(rng) - 0.5);
  return out;
}

template <bool Parallel>
void BM_matmul_nn(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int k = 128, m = 128;
  const auto a = random_matrix(n, k, 1);
  const auto b = random_matrix(k, m, 2);
  std::vector<float> c(static_cast<std::size_t>(n) * m);
  for (auto _ : state) {
    if constexpr (Parallel)
      moco::kernels::parallel::matmul_nn(a.data(), b.data(), c.data(), n, k, m, false);
    else
      moco::kernels::serial::matmul_nn(a.data(), b.data(), c.data(), n, k, m, false);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n) * k * m);
}

template <bool Parallel>
void BM_matmul_nt(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int k = 128, m = n;
  const auto a = random_matrix(n, k, 3);
  const auto b = random_matrix(m, k, 4);
  std::vector<float> c(static_cast<std::size_t>(n) * m);
  for (auto _ : state) {
    if constexpr (Parallel)
      moco::kernels::parallel::matmul_nt(a.data(), b.data(), c.data(), n, k, m, false);
    else
      moco::kernels::serial::matmul_nt(a.data(), b.data(), c.data(), n, k, m, false);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n) * k * m);
}

template <bool Parallel>
void BM_solve_front(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto policy =
      moco::Policy<float>::initialized(moco::ModelConfig::desk(), moco::ProblemKind::motsp, 2, 7);
  const auto inst = moco::sample_instance(moco::ProblemKind::motsp, n, 2, 11);
  const auto enc = moco::encode_instance(policy, inst, false);
  const auto prefs = moco::uniform_grid(16);
  moco::InferenceOptions opt;
  opt.parallel = Parallel;
  for (auto _ : state) benchmark::DoNotOptimize(moco::solve_front(policy, enc, prefs, opt));
}

}  // namespace

BENCHMARK(BM_matmul_nn<false>)->Name("matmul_nn/serial")->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_matmul_nn<true>)->Name("matmul_nn/openmp")->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_matmul_nt<false>)->Name("matmul_nt/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_matmul_nt<true>)->Name("matmul_nt/openmp")->Arg(64)->Arg(256);
BENCHMARK(BM_solve_front<false>)->Name("solve_front/serial")->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_solve_front<true>)->Name("solve_front/openmp")->Arg(20)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
