#pragma once

// Deterministic step-granular execution of a scenario. A Simulation is a
// copyable value: the explorer forks it at every scheduling choice.

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rmwsnap/concurrent.hpp"
#include "rmwsnap/linearizability.hpp"
#include "rmwsnap/scenario.hpp"
#include "rmwsnap/solo.hpp"
#include "rmwsnap/unbounded.hpp"

namespace rmwsnap {

/// One scheduling decision: `process` takes its next step, or crashes.
struct Choice {
  ProcessId process;
  bool crash = false;

  bool operator==(const Choice&) const = default;
};

/// "3" for a step of p3, "x3" for its crash.
std::string to_string(const Choice& choice);
Choice parse_choice(const std::string& text);

using Machine = std::variant<std::monostate, Join, SoloUpdate, SoloScan, ConcurrentUpdate,
                             ConcurrentScan, UnboundedUpdate, UnboundedScan>;

/// What a policy may observe about a process.
struct ProcessView {
  bool joined = true;
  bool crashed = false;
  bool finished = false;
  bool busy = false;
  bool updating = false;
  /// Operations completed so far.
  std::size_t completed = 0;
  /// Update phase as its enum value; Scan counts as the update's scan phase.
  int update_phase = -1;
  /// The running scan (top-level or inside an update), if any.
  std::optional<ScanPhase> scan_phase;
  std::size_t scan_cursor = 0;
  std::uint32_t scan_iterations = 0;
};

/// A finished scan, top-level or the helping scan of an update.
struct ScanRecord {
  ProcessId process;
  bool top_level = true;
  /// Operation id of the enclosing top-level operation.
  std::size_t operation = 0;
  /// Step index before the scan's first step, and of its last step.
  StepIndex begin = 0;
  StepIndex end = 0;
  ScanStats stats;
  HelpSlot result;
};

struct SimOptions {
  /// Keep the history and per-scan records.
  bool record = true;
  /// Run the incremental linearizability monitor and timeline tracker.
  bool monitor = true;
  std::uint32_t iteration_budget = 64;
};

/// Result of one step, for statistics.
struct StepOutcome {
  bool completed = false;
  bool was_scan = false;
  bool top_level = true;
  std::uint32_t iterations = 0;
  ReturnPath path = ReturnPath::None;
};

class Simulation {
 public:
  Simulation(const Scenario& scenario, SimOptions options);

  std::size_t process_count() const { return procs_.size(); }
  bool enabled(ProcessId p) const;
  /// Steps first in id order, then crashes if the crash budget allows.
  std::vector<Choice> choices(std::uint32_t crash_budget) const;
  bool terminal() const;

  /// Throws ConfigError when the choice is not available.
  StepOutcome apply(const Choice& choice);

  ProcessView view(ProcessId p) const;
  std::uint32_t crashes() const { return crashes_; }
  bool over_budget() const { return over_budget_; }
  /// Set once the incremental linearizability monitor rejects the run; the
  /// run stops there.
  const std::string& violation() const { return violation_; }
  /// Set once the timeline tracker sees a view MEM never held during its
  /// scan, or an update without exactly one mutation. The run continues.
  const std::string& timeline_violation() const { return timeline_; }
  bool monitor_ok() const { return violation_.empty() && timeline_.empty(); }

  const History& history() const { return history_; }
  const std::vector<ScanRecord>& scans() const { return scans_; }
  const std::vector<Choice>& trail() const { return trail_; }
  std::uint64_t steps() const { return index_; }
  const std::vector<ObjectState>& memory() const { return mem_; }
  const Scenario& scenario() const { return *shared_->scenario; }
  const SequentialSnapshotSpec& spec() const { return shared_->spec; }

  /// Encoding of everything that determines future behaviour and verdicts.
  void encode(StateWriter& out) const;

 private:
  friend class SimAccess;

  struct Process {
    std::size_t next_op = 0;
    bool joined = true;
    bool crashed = false;
    Machine machine;
    /// Index of the current top-level operation in the operation list.
    std::size_t op_id = 0;
    StepIndex scan_begin = 0;
    bool inner_started = false;
    std::uint32_t mutations = 0;
  };

  struct Shared {
    std::shared_ptr<const Scenario> scenario;
    MachineContext context;
    SequentialSnapshotSpec spec;
  };

  struct Tracker {
    /// MEM states seen since the invocation of each pending top-level scan.
    std::vector<std::vector<std::vector<ObjectState>>> seen;
  };

  Machine start_operation(ProcessId p, const Operation& op) const;
  void emit(Event e);
  void note_mutation();
  void finish_operation(ProcessId p, StepOutcome& out);
  void flag(std::string why);

  std::shared_ptr<const Shared> shared_;
  SimOptions options_;
  std::vector<Process> procs_;
  std::vector<Counter> counters_;
  std::vector<HelpSlot> help_;
  std::vector<ObjectState> mem_;
  StepIndex index_ = 0;
  std::uint32_t crashes_ = 0;
  bool over_budget_ = false;
  std::string violation_;
  std::string timeline_;
  std::size_t next_op_id_ = 0;
  std::optional<LinearizabilityMonitor> monitor_;
  Tracker tracker_;
  History history_;
  std::vector<ScanRecord> scans_;
  std::vector<Choice> trail_;
};

/// Offline checks of a recorded run: cross validation of the two checkers,
/// helping nesting, collect-window soundness and absent borrowed views.
struct RunFinding {
  std::string kind;
  std::string message;
};

std::vector<RunFinding> check_run(const Simulation& sim);

}  // namespace rmwsnap
