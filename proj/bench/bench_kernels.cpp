// Serial reference vs OpenMP kernels. Arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include "shapetweak/evaluation.hpp"
#include "shapetweak/synthetic.hpp"
#include "shapetweak/tweak.hpp"

using namespace shapetweak;

namespace {

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

const std::vector<LabeledSeries>& rows() {
  static const auto data = [] {
    PlantedShapeConfig c;
    c.per_class = 60;
    c.seed = 3;
    return make_planted_dataset(c);
  }();
  return data;
}

ForestParams params() {
  ForestParams p;
  p.n_trees = 40;
  p.shapelets_per_node = 30;
  p.seed = 7;
  return p;
}

const ShapeletForest& forest() {
  static const auto f = train(rows(), params());
  return f;
}

void BM_Train(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(train(rows(), params(), mode(state)));
}

void BM_PredictBatch(benchmark::State& state) {
  std::vector<TimeSeries> series;
  for (const auto& r : rows()) series.push_back(r.series);
  forest();  // trained outside the timed loop
  for (auto _ : state) benchmark::DoNotOptimize(predict_batch(forest(), series, mode(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(series.size()));
}

void BM_PrunedTweak(benchmark::State& state) {
  TweakConfig cfg;
  cfg.execution = mode(state);
  const auto& row = rows().front();
  const std::string desired = predict(forest(), row.series) == "1" ? "-1" : "1";
  for (auto _ : state) benchmark::DoNotOptimize(tweak_reversible_pruned(forest(), row.series, desired, cfg));
}

void BM_Experiment(benchmark::State& state) {
  ExperimentConfig cfg;
  cfg.seed = 1;
  cfg.forest = params();
  cfg.forest.n_trees = 15;
  cfg.execution = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment("bench", rows(), cfg));
}

}  // namespace

BENCHMARK(BM_Train)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_PrunedTweak)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Experiment)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
