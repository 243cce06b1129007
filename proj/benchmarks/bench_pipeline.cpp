#include <benchmark/benchmark.h>

#include "liveguard/inference.hpp"
#include "liveguard/synthdata.hpp"
#include "liveguard/trainer.hpp"

using namespace liveguard;

namespace {

SynthConfig bench_synth() {
  SynthConfig cfg = SynthConfig::desk_default();
  cfg.train_count_per_cell = 50;
  cfg.test_count_per_cell = 25;
  return cfg;
}

TrainConfig bench_train(std::size_t epochs) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  return cfg;
}

}  // namespace

static void BM_TrainEpoch(benchmark::State& state) {
  const GeneratedData data = generate(bench_synth());
  const TrainConfig cfg = bench_train(1);
  for (auto _ : state) {
    TrainResult result = train(data.train, cfg);
    benchmark::DoNotOptimize(result.checkpoint.epochs_completed);
  }
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

static void BM_Decide(benchmark::State& state) {
  const GeneratedData data = generate(bench_synth());
  const Checkpoint cp = train(data.train, bench_train(2)).checkpoint;
  const auto threshold = ConfidenceThreshold::fixed(-50.0);
  const Dataset& test = data.tests.front().second;
  std::size_t i = 0;
  for (auto _ : state) {
    Decision d = decide(cp.model, cp.prototypes, test.samples[i % test.samples.size()].x,
                        threshold);
    benchmark::DoNotOptimize(&d);
    ++i;
  }
}
BENCHMARK(BM_Decide);
