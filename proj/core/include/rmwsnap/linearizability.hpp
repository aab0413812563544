#pragma once

// Sequential specification of the snapshot object and the checkers run over
// recorded histories.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rmwsnap/history.hpp"
#include "rmwsnap/machine.hpp"

namespace rmwsnap {

/// The abstract object: MEM states. Update transitions one entry and yields
/// the transformer's result; Scan yields a copy of the state.
class SequentialSnapshotSpec {
 public:
  explicit SequentialSnapshotSpec(std::shared_ptr<const MemoryLayout> layout)
      : layout_(std::move(layout)) {}

  const MemoryLayout& layout() const { return *layout_; }
  std::vector<ObjectState> initial() const { return layout_->initial; }

  /// Applies `op` to `state`. Returns the result for updates.
  OpResult apply_update(std::vector<ObjectState>& state, const Operation& op) const;

  /// Whether `op` with the recorded outcome is legal from `state`, and if so
  /// the successor state. Pending operations have no outcome and always match.
  bool step(std::vector<ObjectState>& state, const OperationRecord& op) const;

 private:
  std::shared_ptr<const MemoryLayout> layout_;
};

struct CheckOptions {
  /// Accept only linearizations that end in this state (used for threaded
  /// segments whose closing state was observed at a barrier).
  std::optional<std::vector<ObjectState>> final_state;
  /// Abort with Verdict::Unknown after this many search nodes.
  std::uint64_t node_budget = 50'000'000;
  /// Search for the shortest non-linearizable prefix on failure.
  bool minimize = true;
};

enum class Verdict : std::uint8_t { Linearizable, Violation, Unknown };

std::string_view to_string(Verdict verdict);

struct LinearizabilityResult {
  Verdict verdict = Verdict::Unknown;
  /// Operation ids (OperationRecord::id) in linearization order.
  std::vector<std::size_t> witness;
  /// Number of events in the shortest violating prefix.
  std::size_t violating_prefix = 0;
  std::uint64_t nodes = 0;
  std::string message;

  bool linearizable() const { return verdict == Verdict::Linearizable; }
};

/// Wing-Gong search with a cache of (linearized set, state) configurations.
/// Throws std::invalid_argument on a malformed history.
LinearizabilityResult check_linearizable(const History& history, const SequentialSnapshotSpec& spec,
                                         const CheckOptions& options = {});

struct TimelineResult {
  bool pass = true;
  /// Operation id of the first offending operation.
  std::optional<std::size_t> operation;
  StepIndex from = 0;
  StepIndex to = 0;
  std::string message;
};

/// Each completed Scan view must equal the MEM state at some step index in
/// its interval; each Update must own exactly one mutation (at most one if
/// pending) inside its interval, with a result matching the response.
TimelineResult timeline_oracle_check(const History& history, const SequentialSnapshotSpec& spec);

struct CrossValidation {
  TimelineResult timeline;
  LinearizabilityResult checker;
  /// False when the timeline oracle passes but the checker does not.
  bool agree = true;

  bool clean() const { return timeline.pass && checker.linearizable() && agree; }
};

CrossValidation cross_validate(const History& history, const SequentialSnapshotSpec& spec);

/// Exact online linearizability monitor. It keeps every reachable
/// configuration (abstract state plus the outcomes of operations that are
/// linearized but not yet responded) and extends them lazily at responses.
class LinearizabilityMonitor {
 public:
  LinearizabilityMonitor(const SequentialSnapshotSpec& spec, std::size_t max_processes);

  void invoke(ProcessId p, const Operation& op);
  /// Returns false once no configuration explains the history.
  bool respond(ProcessId p, const std::optional<OpResult>& result, const HelpSlot& view);

  bool ok() const { return !configs_.empty(); }
  std::size_t configurations() const { return configs_.size(); }
  void encode(StateWriter& out) const;

 private:
  struct Outcome {
    std::int8_t status = 0;  // 0 idle, 1 pending, 2 linearized
    OpResult result = 0;
    std::vector<ObjectState> view;
    auto operator<=>(const Outcome&) const = default;
  };
  struct Config {
    std::vector<ObjectState> state;
    std::vector<Outcome> procs;
    auto operator<=>(const Config&) const = default;
  };

  void linearize(Config& c, std::size_t slot) const;

  const SequentialSnapshotSpec* spec_;
  std::vector<Operation> pending_;
  std::vector<Config> configs_;
};

}  // namespace rmwsnap
