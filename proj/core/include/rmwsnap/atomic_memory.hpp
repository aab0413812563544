#pragma once

// Native-thread shared memory and a blocking-call facade over the step
// machines, for using the snapshot objects directly from threads.

#include <array>
#include <atomic>
#include <memory>
#include <mutex>
#include <optional>

#include "rmwsnap/machine.hpp"

namespace rmwsnap {

/// Counter and help registers plus MEM for native threads. Every register
/// access is sequentially consistent; each MEM entry is a mutex-guarded
/// object, so applies and reads are atomic. Registers live in lazily
/// allocated segments, so the unbounded registry grows without moving cells.
class AtomicSharedMemory final : public SharedAccess {
 public:
  explicit AtomicSharedMemory(std::shared_ptr<const MemoryLayout> layout,
                              Counter unjoined_counter = 0);
  ~AtomicSharedMemory() override;

  AtomicSharedMemory(const AtomicSharedMemory&) = delete;
  AtomicSharedMemory& operator=(const AtomicSharedMemory&) = delete;

  Counter read_counter(std::size_t slot) override;
  void write_counter(std::size_t slot, Counter value) override;
  HelpSlot read_help(std::size_t slot) override;
  void write_help(std::size_t slot, HelpSlot view) override;
  ObjectState read_object(std::size_t k) override;
  OpResult apply_object(std::size_t k, const ObjectOp& op) override;
  StepIndex now() const override { return 0; }

  const MemoryLayout& layout() const { return *layout_; }
  /// Current MEM states, read entry by entry. Only meaningful at quiescence.
  std::vector<ObjectState> quiescent_states();

  static constexpr std::size_t kSegmentSize = 64;
  static constexpr std::size_t kMaxSegments = 1024;

 private:
  struct HelpCell {
    std::mutex lock;
    HelpSlot value;
  };
  struct Segment {
    explicit Segment(Counter initial);
    std::array<std::atomic<Counter>, kSegmentSize> counters;
    std::array<HelpCell, kSegmentSize> help;
  };
  struct Object {
    std::mutex lock;
    ObjectState state;
  };

  Segment& segment_for(std::size_t slot);
  Segment* find_segment(std::size_t slot) const;

  std::shared_ptr<const MemoryLayout> layout_;
  Counter unjoined_;
  std::array<std::atomic<Segment*>, kMaxSegments> segments_{};
  std::unique_ptr<Object[]> objects_;
};

/// A snapshot object shared by native threads. Each call runs one step
/// machine to completion on the calling thread.
class SnapshotObject {
 public:
  /// `processes` is n for the fixed-size variants; ignored by Unbounded.
  SnapshotObject(std::shared_ptr<const MemoryLayout> layout, AlgorithmConfig config,
                 std::size_t processes);

  /// Unbounded variant only: the calling process's first step.
  void join(ProcessId self);
  std::optional<OpResult> update(ProcessId self, std::size_t k, const ObjectOp& op);
  /// Like update() but also reports the helping scan's statistics, if the
  /// variant runs one.
  std::optional<OpResult> update(ProcessId self, std::size_t k, const ObjectOp& op,
                                 std::optional<ScanStats>& inner);
  std::shared_ptr<const SnapshotView> scan(ProcessId self);
  /// Like scan() but also reports loop statistics.
  std::shared_ptr<const SnapshotView> scan(ProcessId self, ScanStats& stats);

  AtomicSharedMemory& memory() { return memory_; }
  const MachineContext& context() const { return context_; }

 private:
  MachineContext context_;
  AtomicSharedMemory memory_;
};

}  // namespace rmwsnap
