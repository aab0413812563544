#pragma once

// Solo-updater snapshot: correct only while no two Updates overlap. One
// counter register T and, in the wait-free variant, one help register H.
// Both live in slot 0.

#include <optional>

#include "rmwsnap/machine.hpp"

namespace rmwsnap {

class SoloUpdate {
 public:
  enum class Phase : std::uint8_t { ReadCounter, Announce, CollectHelp, PublishHelp, Apply, Retire, Done };

  SoloUpdate(const MachineContext& ctx, ProcessId self, std::size_t k, ObjectOp op);

  StepStatus step(SharedAccess& shared);
  bool done() const { return phase_ == Phase::Done; }
  Phase phase() const { return phase_; }

  /// The object operation's result; empty under strict OK results.
  std::optional<OpResult> result() const;
  std::uint64_t steps() const { return steps_; }

  void encode(StateWriter& out) const;

 private:
  const MachineContext* ctx_;
  ProcessId self_;
  std::size_t k_;
  ObjectOp op_;
  Phase phase_ = Phase::ReadCounter;
  Counter seen_ = 0;
  std::vector<ObjectState> collected_;
  std::size_t cursor_ = 0;
  CollectWindow window_;
  OpResult result_ = 0;
  std::uint64_t steps_ = 0;
};

class SoloScan {
 public:
  SoloScan(const MachineContext& ctx, ProcessId self);

  StepStatus step(SharedAccess& shared);
  bool done() const { return phase_ == ScanPhase::Done; }
  ScanPhase phase() const { return phase_; }

  const HelpSlot& result() const { return result_; }
  const ScanStats& stats() const { return stats_; }

  void encode(StateWriter& out) const;

 private:
  void begin_iteration();
  void finish(ReturnPath path);

  const MachineContext* ctx_;
  ProcessId self_;
  ScanPhase phase_ = ScanPhase::CollectBefore;
  Counter moves_ = 0;
  Counter before_ = 0;
  Counter after_ = 0;
  std::vector<ObjectState> view_;
  std::size_t cursor_ = 0;
  CollectWindow window_;
  HelpSlot result_;
  ScanStats stats_;
};

}  // namespace rmwsnap
