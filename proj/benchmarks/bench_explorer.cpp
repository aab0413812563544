#include <benchmark/benchmark.h>

#include "rmwsnap/explorer.hpp"
#include "rmwsnap/linearizability.hpp"

namespace {

using namespace rmwsnap;

void BM_ExploreN2Basic(benchmark::State& state) {
  auto s = load_scenario_file(std::string(RMWSNAP_SCENARIO_DIR) + "/n2_basic.yaml");
  std::uint64_t states = 0;
  for (auto _ : state) states = explore(s).states;
  state.counters["states"] = static_cast<double>(states);
  state.counters["states/s"] = benchmark::Counter(static_cast<double>(states) * state.iterations(),
                                                  benchmark::Counter::kIsRate);
}
BENCHMARK(BM_ExploreN2Basic)->Unit(benchmark::kMillisecond);

void BM_RandomRuns(benchmark::State& state) {
  auto s = load_scenario_file(std::string(RMWSNAP_SCENARIO_DIR) + "/n3_bounded.yaml");
  s.explore.mode = ExploreMode::Random;
  s.explore.count = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(explore(s).violations);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RandomRuns)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_CheckRandomHistory(benchmark::State& state) {
  auto s = load_scenario_file(std::string(RMWSNAP_SCENARIO_DIR) + "/n3_bounded.yaml");
  // one round-robin run, checked repeatedly
  Simulation sim(s, SimOptions{});
  while (!sim.terminal()) sim.apply(sim.choices(0)[sim.steps() % sim.choices(0).size()]);
  for (auto _ : state) benchmark::DoNotOptimize(check_linearizable(sim.history(), sim.spec()).verdict);
}
BENCHMARK(BM_CheckRandomHistory);

}  // namespace
