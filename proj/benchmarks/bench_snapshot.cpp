#include <benchmark/benchmark.h>

#include "rmwsnap/atomic_memory.hpp"
#include "rmwsnap/scenario.hpp"

namespace {

using namespace rmwsnap;

const Variant kVariants[] = {Variant::SoloWaitFree, Variant::ConcurrentLockFree, Variant::ConcurrentWaitFree,
                             Variant::Unbounded};

AlgorithmConfig config(std::int64_t v) {
  AlgorithmConfig c;
  c.variant = kVariants[v];
  return c;
}

// range(0): variant index, range(1): m
void BM_QuiescentScan(benchmark::State& state) {
  auto m = static_cast<std::size_t>(state.range(1));
  SnapshotObject object(make_layout(std::vector<std::string>(m, "counter")), config(state.range(0)), 4);
  if (kVariants[state.range(0)] == Variant::Unbounded) object.join(ProcessId(1));
  for (auto _ : state) benchmark::DoNotOptimize(object.scan(ProcessId(1)));
  state.SetLabel(std::string(to_string(kVariants[state.range(0)])));
}
BENCHMARK(BM_QuiescentScan)->ArgsProduct({{0, 1, 2, 3}, {1, 8, 64}});

void BM_Update(benchmark::State& state) {
  SnapshotObject object(make_layout({"counter", "counter", "counter", "counter"}), config(state.range(0)), 4);
  if (kVariants[state.range(0)] == Variant::Unbounded) object.join(ProcessId(1));
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(object.update(ProcessId(1), k, {"add", {1}}));
    k = (k + 1) % 4;
  }
  state.SetLabel(std::string(to_string(kVariants[state.range(0)])));
}
BENCHMARK(BM_Update)->DenseRange(0, 3);

// Threaded mix: thread 0 scans, the rest update.
void BM_ContendedScan(benchmark::State& state) {
  static SnapshotObject* shared = nullptr;
  if (state.thread_index() == 0) {
    shared = new SnapshotObject(make_layout({"counter", "counter", "counter", "counter"}),
                                config(state.range(0)), static_cast<std::size_t>(state.threads()));
  }
  // the framework starts timing only after every thread reaches here
  for (auto _ : state) {
    auto self = ProcessId(static_cast<std::uint32_t>(state.thread_index() + 1));
    if (state.thread_index() == 0) {
      benchmark::DoNotOptimize(shared->scan(self));
    } else {
      benchmark::DoNotOptimize(shared->update(self, state.thread_index() % 4, {"add", {1}}));
    }
  }
  if (state.thread_index() == 0) {
    delete shared;
    shared = nullptr;
  }
}
BENCHMARK(BM_ContendedScan)->Arg(1)->Arg(2)->Threads(2)->Threads(4)->UseRealTime();

}  // namespace
