#include <benchmark/benchmark.h>

#include <vector>

#include "detgeom/losses.hpp"
#include "detgeom/random.hpp"

using namespace detgeom;

namespace {

std::vector<std::pair<BBox, BBox>> pairs(std::size_t n) {
  Rng rng(1);
  std::vector<std::pair<BBox, BBox>> out;
  for (std::size_t i = 0; i < n; ++i) {
    const BBox g(rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8), rng.uniform(0.05, 0.3), rng.uniform(0.05, 0.3));
    const BBox p(g.cx() + rng.uniform(-0.1, 0.1), g.cy() + rng.uniform(-0.1, 0.1), rng.uniform(0.05, 0.3),
                 rng.uniform(0.05, 0.3));
    out.emplace_back(g, p);
  }
  return out;
}

void BM_LossValue(benchmark::State& state) {
  LossSpec spec;
  spec.kind = kAllLossKinds[static_cast<std::size_t>(state.range(0))];
  const auto data = pairs(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [g, p] = data[i++ & 1023];
    benchmark::DoNotOptimize(loss_value(g, p, spec));
  }
  state.SetLabel(std::string(to_string(spec.kind)));
}
BENCHMARK(BM_LossValue)->DenseRange(0, static_cast<int>(kAllLossKinds.size()) - 1);

void BM_LossWithGradient(benchmark::State& state) {
  LossSpec spec;
  spec.kind = kAllLossKinds[static_cast<std::size_t>(state.range(0))];
  const auto data = pairs(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [g, p] = data[i++ & 1023];
    benchmark::DoNotOptimize(evaluate_loss(g, p, spec));
  }
  state.SetLabel(std::string(to_string(spec.kind)));
}
BENCHMARK(BM_LossWithGradient)->DenseRange(0, static_cast<int>(kAllLossKinds.size()) - 1);

}  // namespace
