#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "rmwsnap/scenario.hpp"
#include "support.hpp"

namespace rmwsnap {
namespace {

using testing::ints;
using testing::TraceMemory;

std::vector<std::size_t> ascending(std::size_t n) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  return order;
}

std::shared_ptr<const MemoryLayout> counters(std::size_t m, std::vector<std::int64_t> init = {}) {
  std::vector<std::optional<ObjectState>> initial;
  for (auto v : init) initial.emplace_back(ObjectState{v});
  return make_layout(std::vector<std::string>(m, "counter"), initial);
}

TEST(ObjectTypes, CounterAddReturnsNewValue) {
  auto type = bundled_object_type("counter");
  auto [state, result] = type->apply(ObjectState{std::int64_t{0}}, {"add", {5}});
  EXPECT_EQ(state, ObjectState{std::int64_t{5}});
  EXPECT_EQ(result, 5);
}

TEST(ObjectTypes, FetchAddReturnsOldValue) {
  auto [state, result] = bundled_object_type("counter")->apply(ObjectState{std::int64_t{4}}, {"fetch_add", {2}});
  EXPECT_EQ(state, ObjectState{std::int64_t{6}});
  EXPECT_EQ(result, 4);
}

TEST(ObjectTypes, RegisterWrite) {
  auto [state, result] = bundled_object_type("register")->apply(ObjectState{std::int64_t{3}}, {"write", {7}});
  EXPECT_EQ(state, ObjectState{std::int64_t{7}});
  EXPECT_EQ(result, 0);
}

TEST(ObjectTypes, MaxWriteBelowIsNoOp) {
  auto [state, result] = bundled_object_type("max-register")->apply(ObjectState{std::int64_t{9}}, {"maxwrite", {2}});
  EXPECT_EQ(state, ObjectState{std::int64_t{9}});
  EXPECT_EQ(result, 0);
}

TEST(ObjectTypes, LogAppend) {
  auto type = bundled_object_type("log");
  auto [state, result] = type->apply(type->initial(), {"append", {42}});
  EXPECT_EQ(state, ObjectState{std::vector<std::int64_t>{42}});
  EXPECT_EQ(result, 1);
}

TEST(ObjectTypes, RejectsUnknownOperationAndArity) {
  auto type = bundled_object_type("counter");
  EXPECT_THROW(type->apply(type->initial(), {"write", {1}}), std::invalid_argument);
  EXPECT_THROW(type->apply(type->initial(), {"add", {}}), std::invalid_argument);
  EXPECT_FALSE(type->validate({"nope", {}}).empty());
  EXPECT_EQ(bundled_object_type("queue"), nullptr);
}

TEST(MemoryLayout, ValidateRejectsBeforeAnyStep) {
  auto layout = make_layout({"counter", "register"});
  EXPECT_NO_THROW(layout->validate(1, {"write", {7}}));
  EXPECT_THROW(layout->validate(2, {"add", {1}}), std::invalid_argument);
  EXPECT_THROW(layout->validate(0, {"write", {1}}), std::invalid_argument);
  EXPECT_THROW(make_layout({"counter", "stack"}), ConfigError);
}

TEST(ApplyObjectOp, Examples) {
  TraceMemory mem(make_layout({"counter", "register"}, {std::nullopt, ObjectState{std::int64_t{3}}}), 0);
  EXPECT_EQ(mem.apply_object(0, {"add", {5}}), 5);
  mem.apply_object(1, {"write", {7}});
  EXPECT_EQ(mem.mem(), ints({5, 7}));
  EXPECT_EQ(mem.steps(), 2u);

  TraceMemory max(make_layout({"max-register"}, {ObjectState{std::int64_t{9}}}), 0);
  max.apply_object(0, {"maxwrite", {2}});
  EXPECT_EQ(max.mem(), ints({9}));
}

TEST(CollectMem, Quiescent) {
  TraceMemory mem(counters(2), 0);
  auto order = ascending(2);
  EXPECT_EQ(collect_mem(mem, order), ints({0, 0}));
  EXPECT_EQ(mem.steps(), 2u);
}

TEST(CollectMem, SingleMutationIsStillASnapshot) {
  // entry 3 is read before its increment
  TraceMemory mem(counters(4, {1, 2, 3, 4}), 0);
  mem.before_step(4, [](TraceMemory& m) { m.mutate(2, {"add", {1}}); });
  auto order = ascending(4);
  EXPECT_EQ(collect_mem(mem, order), ints({1, 2, 3, 4}));
  EXPECT_EQ(mem.mem(), ints({1, 2, 4, 4}));
}

TEST(CollectMem, TwoMutationsCanMissEveryInstant) {
  TraceMemory mem(counters(4, {1, 2, 3, 4}), 0);
  // entry 2 changes after it was read, then entry 3 changes before it is read
  mem.before_step(3, [](TraceMemory& m) {
    m.mutate(1, {"add", {1}});
    m.mutate(2, {"add", {1}});
  });
  auto order = ascending(4);
  auto view = collect_mem(mem, order);
  EXPECT_EQ(view, ints({1, 2, 4, 4}));
  // the memory held [1,2,3,4], [1,3,3,4] and [1,3,4,4], never the view
  for (auto held : {ints({1, 2, 3, 4}), ints({1, 3, 3, 4}), ints({1, 3, 4, 4})}) EXPECT_NE(view, held);
}

TEST(CollectMem, FollowsConfiguredOrder) {
  TraceMemory mem(counters(3, {1, 2, 3}), 0);
  mem.before_step(2, [](TraceMemory& m) { m.mutate(0, {"add", {10}}); });
  std::vector<std::size_t> desc{2, 1, 0};
  EXPECT_EQ(collect_mem(mem, desc), ints({11, 2, 3}));
}

TEST(CollectCounters, Examples) {
  TraceMemory quiet(counters(1), 2);
  auto order = ascending(2);
  EXPECT_EQ(collect_counters(quiet, order), (std::vector<Counter>{0, 0}));
  quiet.set_counter(0, 2);
  quiet.set_counter(1, 3);
  EXPECT_EQ(collect_counters(quiet, order), (std::vector<Counter>{2, 3}));
}

TEST(CollectCounters, ConcurrentTransitionEitherValue) {
  // the two interleavings of one 0 -> 1 write against the read of entry 1
  std::set<Counter> seen;
  for (StepIndex when : {1, 2}) {
    TraceMemory mem(counters(1), 2);
    mem.before_step(when, [](TraceMemory& m) { m.set_counter(0, 1); });
    auto order = ascending(2);
    seen.insert(collect_counters(mem, order)[0]);
  }
  EXPECT_EQ(seen, (std::set<Counter>{0, 1}));
}

TEST(CollectParticipants, Examples) {
  TraceMemory none(counters(1), 0);
  EXPECT_TRUE(collect_participants(none).empty());

  TraceMemory two(counters(1), 0);
  two.set_counter(0, 2);
  two.set_counter(1, 0);
  EXPECT_EQ(collect_participants(two), (ParticipantCollect{{ProcessId(1), 2}, {ProcessId(2), 0}}));
}

TEST(CollectParticipants, ConcurrentJoinIncludedOrNot) {
  std::set<std::size_t> sizes;
  for (StepIndex when = 1; when <= 4; ++when) {
    TraceMemory mem(counters(1), 0);
    mem.set_counter(0, 1);
    mem.set_counter(1, 0);
    mem.before_step(when, [](TraceMemory& m) { m.set_counter(2, 0); });
    auto c = collect_participants(mem);
    ASSERT_GE(c.size(), 2u);
    if (c.size() == 3) {
      EXPECT_EQ(c[ProcessId(3)], 0);
    }
    sizes.insert(c.size());
  }
  EXPECT_EQ(sizes, (std::set<std::size_t>{2, 3}));
}

TEST(ParticipantCollect, OnePairPerId) {
  ParticipantCollect c{{ProcessId(2), 5}, {ProcessId(1), 0}};
  EXPECT_THROW(c.add(ProcessId(1), 3), std::invalid_argument);
  EXPECT_EQ(c.ids(), (std::vector<ProcessId>{ProcessId(1), ProcessId(2)}));
  EXPECT_EQ(c[ProcessId(2)], 5);
  EXPECT_THROW((void)c[ProcessId(3)], std::out_of_range);
}

TEST(CollectOrder, ParseAndPermutation) {
  EXPECT_EQ(CollectOrder::parse("asc"), CollectOrder::ascending());
  EXPECT_EQ(CollectOrder::parse("desc"), CollectOrder::descending());
  EXPECT_EQ(CollectOrder::parse("random:7"), CollectOrder::random(7));
  EXPECT_THROW(CollectOrder::parse("sideways"), std::invalid_argument);
  EXPECT_EQ(CollectOrder::descending().permutation(3, ProcessId(1), 0), (std::vector<std::size_t>{2, 1, 0}));

  auto r = CollectOrder::random(7);
  auto p = r.permutation(8, ProcessId(2), 0);
  EXPECT_EQ(p, r.permutation(8, ProcessId(2), 0));
  auto sorted = p;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, ascending(8));
}

TEST(SnapshotView, EqualityIgnoresProvenance) {
  SnapshotView a(ints({1, 2}), {ProcessId(1), 3, 4});
  SnapshotView b(ints({1, 2}), {ProcessId(2), 9, 9});
  EXPECT_EQ(a, b);
  EXPECT_EQ(to_string(std::make_shared<const SnapshotView>(a)), "[1,2]");
  EXPECT_EQ(to_string(HelpSlot{}), "bottom");
}

}  // namespace
}  // namespace rmwsnap
