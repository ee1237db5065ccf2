#include <benchmark/benchmark.h>

#include "ilgov/config_space.hpp"
#include "ilgov/models.hpp"
#include "ilgov/oracle.hpp"
#include "ilgov/policy.hpp"
#include "ilgov/rng.hpp"
#include "ilgov/workload.hpp"

using namespace ilgov;

namespace {

PlatformModels fitted_models() {
  const ConfigSpace space;
  std::vector<EpochObservation> obs;
  for (const char* profile : {"compute-bound", "memory-bound", "parallel", "mixed"}) {
    const Workload w = generate_workload(profile, 40, 7);
    for (std::size_t k = 0; k < w.epochs.size(); k += 10)
      for (std::size_t i = 0; i < space.size(); ++i) obs.push_back(w.execute(k, space.at(i)));
  }
  return PlatformModels::fit_offline(obs);
}

// One RLS step on both models.
void BM_ModelUpdate(benchmark::State& state) {
  PlatformModels models = fitted_models();
  const Workload w = generate_workload("mixed", 64, 3);
  const ConfigSpace space;
  std::vector<EpochObservation> obs;
  for (std::size_t k = 0; k < w.epochs.size(); ++k) obs.push_back(w.execute(k, space.at((k * 97) % 640)));
  std::size_t k = 0;
  for (auto _ : state) {
    models.update(obs[k++ % obs.size()]);
    benchmark::DoNotOptimize(models.power().theta.data());
  }
}
BENCHMARK(BM_ModelUpdate);

// Budgeted search, argument is the evaluation budget.
void BM_OnlineOracle(benchmark::State& state) {
  const PlatformModels models = fitted_models();
  const ConfigSpace space;
  const Workload w = generate_workload("parallel", 32, 5);
  OnlineOracleOptions opts;
  opts.budget = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  std::size_t evals = 0;
  for (auto _ : state) {
    const std::size_t k = rng.index(w.epochs.size());
    const CounterVector h = w.execute(k, space.at(rng.index(space.size()))).counters;
    const SearchResult r = online_oracle(space, space.at(rng.index(space.size())), h, models, opts);
    evals += r.evaluations;
    benchmark::DoNotOptimize(r.index);
  }
  state.counters["evals/search"] =
      benchmark::Counter(static_cast<double>(evals), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_OnlineOracle)->Arg(40)->Arg(640);

// Policy inference from raw counters.
void BM_PolicyPredict(benchmark::State& state) {
  const ConfigSpace space;
  const PolicyBundle policy(space, 1);
  const Workload w = generate_workload("mixed", 16, 9);
  const CounterVector h = w.execute(3, {2, 2, 1000, 1000}).counters;
  for (auto _ : state) benchmark::DoNotOptimize(policy.predict(h, space));
}
BENCHMARK(BM_PolicyPredict);

// A retrain on a full buffer of 100 disagreements.
void BM_Retrain(benchmark::State& state) {
  const ConfigSpace space;
  const Workload w = generate_workload("memory-bound", 100, 11);
  const auto labels = offline_oracle(w, space, 1.0);
  const auto examples = rollout_examples(w, labels, space, nullptr);
  PolicyBundle policy(space, 2);
  std::vector<Eigen::VectorXd> raw;
  for (const auto& e : examples) raw.push_back(e.raw);
  policy.scaler.fit(raw);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    TrainingBuffer buffer(examples.size());
    for (const auto& e : examples) buffer.push(e);
    benchmark::DoNotOptimize(retrain_online(policy, buffer, {}, ++seed));
  }
}
BENCHMARK(BM_Retrain)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
