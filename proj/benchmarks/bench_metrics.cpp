#include <benchmark/benchmark.h>

#include <cmath>

#include "detgeom/detect_geom.hpp"
#include "detgeom/metrics.hpp"
#include "detgeom/random.hpp"

using namespace detgeom;

namespace {

std::vector<ScoredBox> crowd(std::size_t n) {
  Rng rng(4);
  std::vector<ScoredBox> d;
  for (std::size_t i = 0; i < n; ++i) {
    d.push_back({BBox(rng.uniform(50, 590), rng.uniform(50, 590), rng.uniform(10, 120), rng.uniform(10, 120)),
                 static_cast<int>(rng.below(10)), rng.uniform()});
  }
  return d;
}

void BM_Nms(benchmark::State& state) {
  const auto d = crowd(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(nms(d, 0.45));
}
BENCHMARK(BM_Nms)->Arg(50)->Arg(300)->Arg(1000);

struct Dataset {
  GroundTruthSet gt;
  DetectionSet det;
};

Dataset dataset(std::size_t images) {
  Rng rng(6);
  Dataset d;
  for (std::size_t i = 0; i < images; ++i) {
    const std::string id = "im" + std::to_string(i);
    for (int t = 0; t < 20; ++t) {
      const BBox b(rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.02, 0.1), rng.uniform(0.02, 0.1));
      const int cls = static_cast<int>(rng.below(10));
      d.gt.entries.push_back({id, cls, b});
      for (int k = 0; k < 2; ++k) {
        d.det.entries.push_back({id, cls,
                                 BBox(b.cx() + rng.uniform(-0.01, 0.01), b.cy() + rng.uniform(-0.01, 0.01), b.w(),
                                      b.h()),
                                 rng.uniform()});
      }
    }
  }
  return d;
}

void BM_MeanApCoco(benchmark::State& state) {
  const Dataset d = dataset(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mean_ap(d.gt, d.det, coco_thresholds()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.det.entries.size()));
}
BENCHMARK(BM_MeanApCoco)->Arg(50)->Arg(500);

void BM_CurveBundle(benchmark::State& state) {
  const Dataset d = dataset(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(curve_bundle(d.gt, d.det, 0.5));
}
BENCHMARK(BM_CurveBundle)->Arg(500);

}  // namespace
