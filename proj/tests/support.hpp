#pragma once

// Plain in-memory SharedAccess for hand traces. Every access is one step;
// a hook may run before any step to interleave foreign mutations.

#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "rmwsnap/model.hpp"

namespace rmwsnap::testing {

class TraceMemory final : public SharedAccess {
 public:
  TraceMemory(std::shared_ptr<const MemoryLayout> layout, std::size_t slots, Counter counter_init = 0)
      : layout_(std::move(layout)), mem_(layout_->initial), counters_(slots, counter_init), help_(slots) {}

  Counter read_counter(std::size_t slot) override {
    tick();
    return slot < counters_.size() ? counters_[slot] : -1;
  }
  void write_counter(std::size_t slot, Counter value) override {
    tick();
    if (slot >= counters_.size()) counters_.resize(slot + 1, -1);
    counters_[slot] = value;
  }
  HelpSlot read_help(std::size_t slot) override {
    tick();
    return slot < help_.size() ? help_[slot] : nullptr;
  }
  void write_help(std::size_t slot, HelpSlot view) override {
    tick();
    if (slot >= help_.size()) help_.resize(slot + 1);
    help_[slot] = std::move(view);
  }
  ObjectState read_object(std::size_t k) override {
    tick();
    return mem_[k];
  }
  OpResult apply_object(std::size_t k, const ObjectOp& op) override {
    tick();
    return mutate(k, op);
  }
  StepIndex now() const override { return steps_; }

  // outside the step count
  OpResult mutate(std::size_t k, const ObjectOp& op) {
    auto [next, result] = layout_->types[k]->apply(mem_[k], op);
    mem_[k] = std::move(next);
    return result;
  }
  void set_counter(std::size_t slot, Counter v) {
    if (slot >= counters_.size()) counters_.resize(slot + 1, -1);
    counters_[slot] = v;
  }
  void set_help(std::size_t slot, HelpSlot v) {
    if (slot >= help_.size()) help_.resize(slot + 1);
    help_[slot] = std::move(v);
  }

  /// Runs before step number `step` (1-based) is performed.
  void before_step(StepIndex step, std::function<void(TraceMemory&)> hook) { hooks_[step] = std::move(hook); }

  std::uint64_t steps() const { return steps_; }
  const std::vector<ObjectState>& mem() const { return mem_; }
  const std::vector<Counter>& counters() const { return counters_; }
  const HelpSlot& help(std::size_t slot) const { return help_[slot]; }

 private:
  void tick() {
    ++steps_;
    if (auto it = hooks_.find(steps_); it != hooks_.end()) it->second(*this);
  }

  std::shared_ptr<const MemoryLayout> layout_;
  std::vector<ObjectState> mem_;
  std::vector<Counter> counters_;
  std::vector<HelpSlot> help_;
  std::map<StepIndex, std::function<void(TraceMemory&)>> hooks_;
  std::uint64_t steps_ = 0;
};

/// Drives a step machine to completion.
template <class M>
void run(M& machine, SharedAccess& shared, std::uint64_t limit = 100000) {
  for (std::uint64_t i = 0; i < limit && !machine.done(); ++i) machine.step(shared);
}

inline std::vector<ObjectState> ints(std::initializer_list<std::int64_t> values) {
  return {values.begin(), values.end()};
}

}  // namespace rmwsnap::testing
