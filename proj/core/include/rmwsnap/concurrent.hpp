#pragma once

// Concurrent-updater snapshot for a fixed number n of processes. Process p
// owns counter slot p.slot() and help slot p.slot(); a counter is odd exactly
// while its owner is between announcing and retiring an Update.

#include <optional>

#include "rmwsnap/machine.hpp"

namespace rmwsnap {

/// Upper bound on the processes that can modify MEM between the two counter
/// collects: n minus the processes whose counter stayed at the same even
/// value. Requires after[j] - before[j] <= 1 for every j.
std::size_t compute_modifier_bound(std::span<const Counter> before, std::span<const Counter> after);

/// moves[j] += after[j] - before[j].
void update_moves(std::span<Counter> moves, std::span<const Counter> before,
                  std::span<const Counter> after);

/// Loop bound of the wait-free scan for n processes: 4 * 2 * (n - 1).
constexpr std::uint32_t wait_free_iteration_bound(std::size_t n) {
  return static_cast<std::uint32_t>(8 * (n > 0 ? n - 1 : 0));
}

class ConcurrentScan {
 public:
  ConcurrentScan(const MachineContext& ctx, ProcessId self);

  StepStatus step(SharedAccess& shared);
  bool done() const { return phase_ == ScanPhase::Done; }
  ScanPhase phase() const { return phase_; }
  /// Entries of the current collect already read.
  std::size_t cursor() const { return cursor_; }

  const HelpSlot& result() const { return result_; }
  const ScanStats& stats() const { return stats_; }
  std::span<const Counter> moves() const { return moves_; }

  void encode(StateWriter& out) const;

 private:
  void begin_iteration();
  void end_iteration();
  void after_counters_read();
  void finish_with_view(ReturnPath path);

  const MachineContext* ctx_;
  ProcessId self_;
  ScanPhase phase_ = ScanPhase::CollectBefore;
  std::vector<Counter> moves_;
  std::vector<Counter> before_;
  std::vector<Counter> after_;
  std::vector<Counter> final_;
  std::vector<ObjectState> view_;
  std::vector<ObjectState> again_;
  std::size_t cursor_ = 0;
  std::size_t extra_left_ = 0;
  std::size_t helper_ = 0;
  CollectWindow window_;
  HelpSlot result_;
  ScanStats stats_;
};

class ConcurrentUpdate {
 public:
  enum class Phase : std::uint8_t { ReadCounter, Announce, Scan, PublishHelp, Apply, Retire, Done };

  ConcurrentUpdate(const MachineContext& ctx, ProcessId self, std::size_t k, ObjectOp op);

  StepStatus step(SharedAccess& shared);
  bool done() const { return phase_ == Phase::Done; }
  Phase phase() const { return phase_; }

  std::optional<OpResult> result() const;
  std::uint64_t steps() const { return steps_; }
  /// The helping scan, once started.
  const std::optional<ConcurrentScan>& scan() const { return scan_; }

  void encode(StateWriter& out) const;

 private:
  const MachineContext* ctx_;
  ProcessId self_;
  std::size_t k_;
  ObjectOp op_;
  Phase phase_ = Phase::ReadCounter;
  Counter seen_ = 0;
  std::optional<ConcurrentScan> scan_;
  OpResult result_ = 0;
  std::uint64_t steps_ = 0;
};

}  // namespace rmwsnap
