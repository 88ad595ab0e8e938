#include <benchmark/benchmark.h>

#include "detgeom/involution.hpp"
#include "detgeom/random.hpp"

using namespace detgeom;

namespace {

Tensor4 input(Shape4 s) {
  Rng rng(2);
  std::vector<double> d(s.size());
  for (double& v : d) v = rng.uniform(-1.0, 1.0);
  return Tensor4(s, std::move(d));
}

// Args: spatial size, kernel size. 16 channels in 4 groups.
void BM_Involute(benchmark::State& state) {
  const auto hw = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const Tensor4 x = input({1, 16, hw, hw});
  const InvolutionKernel ker = InvolutionKernel::random(1, hw, hw, k, 4, 3);
  for (auto _ : state) benchmark::DoNotOptimize(involute(x, ker));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}
BENCHMARK(BM_Involute)->Args({20, 3})->Args({40, 3})->Args({40, 7})->Args({80, 3});

void BM_InvoluteReference(benchmark::State& state) {
  const auto hw = static_cast<std::size_t>(state.range(0));
  const Tensor4 x = input({1, 16, hw, hw});
  const InvolutionKernel ker = InvolutionKernel::random(1, hw, hw, 3, 4, 3);
  for (auto _ : state) benchmark::DoNotOptimize(involute_reference(x, ker));
}
BENCHMARK(BM_InvoluteReference)->Arg(20)->Arg(40);

void BM_GenerateKernel(benchmark::State& state) {
  const auto hw = static_cast<std::size_t>(state.range(0));
  const Tensor4 x = input({1, 16, hw, hw});
  const KernelGenSpec spec = KernelGenSpec::random(16, 7, 4, 4, 5);
  for (auto _ : state) benchmark::DoNotOptimize(generate_kernel(x, spec));
}
BENCHMARK(BM_GenerateKernel)->Arg(20)->Arg(40);

}  // namespace
