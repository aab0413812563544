#include <gtest/gtest.h>

#include <thread>

#include "rmwsnap/atomic_memory.hpp"
#include "rmwsnap/scenario.hpp"
#include "rmwsnap/complexity.hpp"
#include "rmwsnap/concurrent.hpp"
#include "rmwsnap/stress.hpp"

namespace rmwsnap {
namespace {

Scenario stress_scenario(const std::string& variant, const std::string& memory, std::uint32_t threads,
                         std::uint64_t ops, double scan_ratio = 0.5) {
  return parse_scenario("version: 1\nname: s\nvariant: " + variant + "\nmemory: " + memory +
                        "\nprocesses:\n  - ops: [scan]\nstress:\n  threads: " + std::to_string(threads) +
                        "\n  ops_per_thread: " + std::to_string(ops) + "\n  scan_ratio: " + std::to_string(scan_ratio) +
                        "\n  round_ops: 2\n  seed: 3\n");
}

TEST(Stress, FourThreadsCounters) {
  auto r = stress(stress_scenario("conc-wf", "[counter, counter, counter]", 4, 1000));
  EXPECT_EQ(r.operations, 4000u);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_EQ(r.segments, 500u);
  EXPECT_EQ(r.segments_checked + r.segments_skipped, r.segments);
  EXPECT_LT(r.segments_skipped, r.segments / 10);
  EXPECT_LE(r.max_iterations["scan"], wait_free_iteration_bound(4));
}

TEST(Stress, MixedObjectsEveryVariant) {
  for (const char* variant : {"conc-lf", "conc-wf", "unbounded"}) {
    auto r = stress(stress_scenario(variant, "[counter, register, max-register, log]", 4, 300, 0.6));
    EXPECT_EQ(r.violations, 0u) << variant;
    EXPECT_GT(r.scans, 0u);
    EXPECT_GT(r.updates, 0u);
  }
}

TEST(Stress, SoloUpdaterLoopsAtMostTwice) {
  auto r = stress(stress_scenario("solo-wf", "[counter, max-register]", 4, 1000));
  EXPECT_EQ(r.violations, 0u);
  EXPECT_LE(r.max_iterations["scan"], 2u);
}

TEST(Stress, WorkloadIsSeeded) {
  auto s = stress_scenario("conc-wf", "[counter, log]", 3, 50);
  auto a = generate_workload(s, 3, 50, 17);
  auto b = generate_workload(s, 3, 50, 17);
  auto c = generate_workload(s, 3, 50, 18);
  EXPECT_EQ(a, b);
  EXPECT_EQ(workload_digest(a), workload_digest(b));
  EXPECT_NE(workload_digest(a), workload_digest(c));

  auto solo = stress_scenario("solo-lf", "[counter]", 3, 50);
  auto w = generate_workload(solo, 3, 50, 1);
  for (std::size_t t = 1; t < w.size(); ++t) {
    for (const auto& op : w[t]) EXPECT_TRUE(op.is_scan());
  }
}

TEST(Stress, RejectsZeroThreads) {
  auto s = stress_scenario("conc-wf", "[counter]", 1, 10);
  s.stress.threads = 0;
  EXPECT_THROW(stress(s), ConfigError);
}

TEST(SnapshotObject, ConcurrentCountersAddUp) {
  auto layout = make_layout({"counter", "counter"});
  SnapshotObject object(layout, AlgorithmConfig{}, 4);
  std::vector<std::jthread> pool;
  for (std::uint32_t t = 0; t < 4; ++t) {
    pool.emplace_back([&, t] {
      for (int i = 0; i < 200; ++i) {
        object.update(ProcessId(t + 1), t % 2, {"add", {1}});
        auto view = object.scan(ProcessId(t + 1));
        // counters only grow
        EXPECT_GE(std::get<std::int64_t>((*view)[t % 2]), 1);
      }
    });
  }
  pool.clear();
  auto final = object.scan(ProcessId(1));
  EXPECT_EQ(*final, SnapshotView({std::int64_t{400}, std::int64_t{400}}));
}

// ---- step counts

TEST(Complexity, QuiescentSoloLockFreeOneObject) {
  ComplexityOptions o;
  o.config.variant = Variant::SoloLockFree;
  o.ns = {1};
  o.ms = {1};
  o.contention = false;
  auto r = measure_steps(o);
  ASSERT_EQ(r.cells.size(), 1u);
  EXPECT_EQ(r.cells[0].max_steps, 3u);
}

TEST(Complexity, QuiescentGrowthIsLinearInM) {
  ComplexityOptions o;
  o.ns = {4};
  o.ms = {2, 4, 8};
  o.contention = false;
  auto r = measure_steps(o);
  ASSERT_EQ(r.cells.size(), 3u);
  // 2n counter reads plus m object reads
  for (const auto& c : r.cells) EXPECT_EQ(c.max_steps, 2 * 4 + c.m);
  EXPECT_EQ(r.cells[1].max_steps - r.cells[0].max_steps, 2u);
  EXPECT_EQ(r.cells[2].max_steps - r.cells[1].max_steps, 4u);
}

TEST(Complexity, ContentionFitHoldsOnEveryCell) {
  ComplexityOptions o;
  o.runs = 10;
  auto r = measure_steps(o);
  ASSERT_EQ(r.cells.size(), 9u);
  ASSERT_TRUE(r.analytic_c.has_value());
  for (const auto& c : r.cells) {
    EXPECT_LE(static_cast<double>(c.max_steps), r.fitted_c * c.n * c.n * c.m + 1e-9);
    ASSERT_TRUE(c.bound.has_value());
    EXPECT_LE(c.max_steps, *c.bound);
  }
  EXPECT_LE(r.fitted_c, *r.analytic_c);
}

TEST(Complexity, StepBounds) {
  // 8 passes of (3*2 + 2 + 1*2) reads, plus the help read
  EXPECT_EQ(wait_free_scan_step_bound(2, 2), 8u * 10u + 1u);
  EXPECT_EQ(wait_free_scan_step_bound(1, 3), 1u * 6u + 1u);
  EXPECT_EQ(solo_wait_free_scan_step_bound(4), 2u * 6u + 1u);
}

TEST(Complexity, RejectsEmptyGrid) {
  ComplexityOptions o;
  o.ms = {};
  EXPECT_THROW(measure_steps(o), ConfigError);
}

}  // namespace
}  // namespace rmwsnap
