#include <benchmark/benchmark.h>

#include "stpen/autograd.hpp"
#include "stpen/evaluation.hpp"
#include "stpen/experiment.hpp"
#include "stpen/model.hpp"
#include "stpen/ops.hpp"
#include "stpen/random.hpp"
#include "stpen/synthetic.hpp"
#include "stpen/training.hpp"

namespace stpen {
namespace {

Tensor random_tensor(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.storage()) v = uniform(rng, -1.0, 1.0);
  return t;
}

void BM_Conv2d(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Var x = Var::constant(random_tensor({16, c, 8, 8}, rng));
  const Var k = Var::constant(random_tensor({c, c, 3, 3}, rng));
  const Var b = Var::constant(random_tensor({c}, rng));
  for (auto _ : state) benchmark::DoNotOptimize(ops::conv2d(x, k, b, 1, 1).value().storage().data());
  state.SetItemsProcessed(state.iterations() * 16 * static_cast<std::int64_t>(c * c * 64 * 9));
}
BENCHMARK(BM_Conv2d)->Arg(8)->Arg(16)->Arg(32);

std::vector<DualRateSample> smoke_samples(std::size_t clips) {
  SyntheticDatasetConfig cfg;
  cfg.clips = clips;
  const SyntheticDataset ds = make_synthetic_dataset(cfg);
  return build_samples(ds.stores, ds.clips, sampling_for(desk_preset()));
}

void BM_DeskForward(benchmark::State& state) {
  const Model model(desk_preset(), 0);
  const auto samples = smoke_samples(1);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(samples[0]));
}
BENCHMARK(BM_DeskForward)->Unit(benchmark::kMillisecond);

void BM_DeskForwardBackward(benchmark::State& state) {
  const Model model(desk_preset(), 0);
  const auto samples = smoke_samples(1);
  for (auto _ : state) {
    ParamBinding bind(model.params());
    BatchLoss loss = batch_loss(model, bind, {&samples[0]});
    backward(loss.loss);
    benchmark::DoNotOptimize(bind.gradients());
  }
}
BENCHMARK(BM_DeskForwardBackward)->Unit(benchmark::kMillisecond);

void BM_MeanAp(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  std::vector<PredictionRecord> recs;
  for (std::size_t i = 0; i < n; ++i) {
    PredictionRecord r{"v", static_cast<int>(i / 8), static_cast<int>(i % 8), std::vector<double>(13),
                       std::vector<int>(13)};
    for (auto& s : r.scores) s = uniform01(rng);
    for (auto& t : r.targets) t = uniform01(rng) < 0.2;
    recs.push_back(std::move(r));
  }
  for (auto _ : state) benchmark::DoNotOptimize(mean_ap(recs).map);
}
BENCHMARK(BM_MeanAp)->Arg(100)->Arg(1000)->Arg(10000);

}  // namespace
}  // namespace stpen

BENCHMARK_MAIN();
