#pragma once

// Wait-free snapshot under unbounded concurrency. Processes join by writing 0
// to their counter slot; ids are registered densely (id i joins only after
// ids 1..i-1), so a collect reads slots upward until the first unjoined one.

#include <functional>
#include <optional>

#include "rmwsnap/machine.hpp"

namespace rmwsnap {

/// True iff every old participant moved by at most one and every newly
/// joined participant has a counter of at most 2.
bool check_quiet_condition_unbounded(const ParticipantCollect& before,
                                     const ParticipantCollect& after);

/// |after.ids| - |old participants still at the same even value|
///             - |new participants whose help slot is absent|.
std::size_t compute_modifier_bound_unbounded(const ParticipantCollect& before,
                                             const ParticipantCollect& after,
                                             const std::function<bool(ProcessId)>& help_absent);

/// Sparse per-process move counters; unseen ids count as 0.
class MoveCounts {
 public:
  Counter operator[](ProcessId id) const;
  void add(ProcessId id, Counter delta);
  std::span<const Counter> raw() const { return counts_; }
  bool operator==(const MoveCounts&) const = default;

 private:
  std::vector<Counter> counts_;
};

/// Old participants gain after[j] - before[j]; new ones gain after[j].
void update_moves_unbounded(MoveCounts& moves, const ParticipantCollect& before,
                            const ParticipantCollect& after);

/// The join step: T[i] <- 0.
class Join {
 public:
  explicit Join(ProcessId self) : self_(self) {}
  StepStatus step(SharedAccess& shared);
  bool done() const { return done_; }
  void encode(StateWriter& out) const { out.put(done_ ? 1u : 0u); }

 private:
  ProcessId self_;
  bool done_ = false;
};

class UnboundedScan {
 public:
  UnboundedScan(const MachineContext& ctx, ProcessId self);

  StepStatus step(SharedAccess& shared);
  bool done() const { return phase_ == ScanPhase::Done; }
  ScanPhase phase() const { return phase_; }
  std::size_t cursor() const { return cursor_; }

  const HelpSlot& result() const { return result_; }
  const ScanStats& stats() const { return stats_; }
  const ParticipantCollect& initial_participants() const { return init_; }

  void encode(StateWriter& out) const;

 private:
  void begin_iteration();
  void check_help_from(std::size_t index);
  void start_collect(ScanPhase phase);
  void after_counters_read();
  void probe_joiners_from(std::size_t index);
  void decide_after_probe();
  void end_iteration();
  void finish_with_view(ReturnPath path);

  const MachineContext* ctx_;
  ProcessId self_;
  ScanPhase phase_ = ScanPhase::CollectBefore;
  MoveCounts moves_;
  ParticipantCollect init_;
  ParticipantCollect curr_;
  ParticipantCollect before_;
  ParticipantCollect after_;
  ParticipantCollect final_;
  std::vector<ObjectState> view_;
  std::vector<ObjectState> again_;
  std::size_t cursor_ = 0;
  std::size_t probe_index_ = 0;
  std::vector<ProcessId> absent_joiners_;
  std::size_t extra_left_ = 0;
  ProcessId helper_;
  bool probing_ = false;
  CollectWindow window_;
  HelpSlot result_;
  ScanStats stats_;
};

class UnboundedUpdate {
 public:
  enum class Phase : std::uint8_t { ReadCounter, Announce, Scan, PublishHelp, Apply, Retire, Done };

  UnboundedUpdate(const MachineContext& ctx, ProcessId self, std::size_t k, ObjectOp op);

  StepStatus step(SharedAccess& shared);
  bool done() const { return phase_ == Phase::Done; }
  Phase phase() const { return phase_; }

  std::optional<OpResult> result() const;
  std::uint64_t steps() const { return steps_; }
  const std::optional<UnboundedScan>& scan() const { return scan_; }

  void encode(StateWriter& out) const;

 private:
  const MachineContext* ctx_;
  ProcessId self_;
  std::size_t k_;
  ObjectOp op_;
  Phase phase_ = Phase::ReadCounter;
  Counter seen_ = 0;
  std::optional<UnboundedScan> scan_;
  OpResult result_ = 0;
  std::uint64_t steps_ = 0;
};

}  // namespace rmwsnap
