#include <vector>

#include <benchmark/benchmark.h>

#include "footcast/costmap.hpp"
#include "footcast/planner.hpp"
#include "footcast/predictor.hpp"
#include "footcast/rng.hpp"
#include "footcast/training.hpp"

using namespace footcast;

namespace {

TrainingSample random_sample(rng::Stream& s) {
  TrainingSample t;
  for (int i = 0; i < kMainInputSize; ++i) t.x.values(i) = s.uniform(-0.2, 0.2);
  for (int i = 0; i < kUncertaintyInputSize; ++i) t.u.values(i) = s.uniform(-0.5, 0.5);
  for (int i = 0; i < kOutputSize; ++i) t.y(i) = s.uniform(-0.3, 0.3);
  return t;
}

void BM_Predict(benchmark::State& state) {
  const auto ens = init_ensemble(Architecture{}, 3, 1);
  rng::Stream s(2);
  const auto t = random_sample(s);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(predict(ens, t.x, t.u, static_cast<int>(state.range(0)), ++seed));
}
BENCHMARK(BM_Predict)->Arg(5)->Arg(20);

void BM_Backward(benchmark::State& state) {
  const auto ens = init_ensemble(Architecture{}, 3, 1);
  rng::Stream s(3);
  std::vector<TrainingSample> batch;
  for (int i = 0; i < state.range(0); ++i) batch.push_back(random_sample(s));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(backward(batch, ens, LossWeights{}, 5, ++seed));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Backward)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_MppiStep(benchmark::State& state) {
  Costmap map(GridSpec{60, 120, 0.1, 0.0, 0.0});
  rng::Stream s(4);
  for (int r = 0; r < 60; ++r)
    for (int c = 0; c < 120; ++c) map.at(r, c) = s.uniform(0, 50);
  const MppiConfig cfg;
  const ControlSequence nominal(static_cast<std::size_t>(cfg.horizon), Control{0.5, 0.0});
  std::uint64_t step = 0;
  for (auto _ : state) benchmark::DoNotOptimize(mppi_step({1.0, 3.0, 0.0, 0.0}, {10.0, 3.0}, map, nominal, cfg, ++step));
}
BENCHMARK(BM_MppiStep)->Unit(benchmark::kMicrosecond);

void BM_UncertaintyCostmap(benchmark::State& state) {
  rng::Stream s(5);
  std::vector<FootPrediction> preds(static_cast<std::size_t>(state.range(0)));
  for (auto& p : preds) {
    p.feet.frame = Frame::world;
    const double x = s.uniform(0.5, 11.5), y = s.uniform(0.5, 5.5);
    for (std::size_t i = 0; i < 4; ++i) p.feet.feet[i] = {x + s.uniform(-0.2, 0.2), y + s.uniform(-0.15, 0.15), 0.0};
    for (auto& v : p.leg_variance) v = s.uniform(1e-4, 1e-2);
  }
  const CostmapConfig cfg;
  const GridSpec grid{60, 120, 0.1, 0.0, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(uncertainty_costmap(preds, cfg, grid));
}
BENCHMARK(BM_UncertaintyCostmap)->Arg(45)->Arg(450)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
