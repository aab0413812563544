#pragma once

// Definitions shared by the step machines of all three snapshot algorithms.
//
// An algorithm operation is a resumable machine: each call to step() performs
// exactly one shared access through SharedAccess and then runs the local
// computation up to the next shared access. The same machines run under the
// deterministic scheduler and on native threads.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rmwsnap/model.hpp"

namespace rmwsnap {

enum class Variant : std::uint8_t {
  SoloLockFree,
  SoloWaitFree,
  ConcurrentLockFree,
  ConcurrentWaitFree,
  /// Lock-free concurrent algorithm without the repeated-collect fallback;
  /// linearizable but blocking.
  ConcurrentBlocking,
  Unbounded,
};

/// Deliberately broken algorithm versions used to test the checkers.
enum class Mutant : std::uint8_t {
  None,
  /// Update skips taking and publishing its helping snapshot.
  DropHelpPublish,
  /// Scan returns after the equal extra collects without re-reading T.
  DropThirdCollect,
  /// Help is borrowed after 2 observed moves instead of 4.
  WeakHelpThreshold,
  /// Unbounded quiet check ignores the bound on newly joined processes.
  SkipJoinerClause,
};

std::string_view to_string(Variant variant);
std::string_view to_string(Mutant mutant);
/// Accepts solo-lf, solo-wf, conc-lf, conc-wf, conc-blocking, unbounded.
std::optional<Variant> parse_variant(std::string_view text);
/// Accepts none, drop-help-publish, drop-third-collect, weak-help-threshold,
/// skip-joiner-clause.
std::optional<Mutant> parse_mutant(std::string_view text);

bool is_solo(Variant variant);
bool is_wait_free(Variant variant);

struct AlgorithmConfig {
  Variant variant = Variant::ConcurrentWaitFree;
  Mutant mutant = Mutant::None;
  CollectOrder order;
  /// Updates return OK (no result) instead of the object operation's result.
  bool strict_ok_result = false;

  Counter help_threshold() const { return mutant == Mutant::WeakHelpThreshold ? 2 : 4; }
  bool publishes_help() const { return is_wait_free(variant) && mutant != Mutant::DropHelpPublish; }
};

/// Per-run constants shared by every machine: sizes, configuration and the
/// precomputed collect orders of each process.
class MachineContext {
 public:
  /// `processes` is n for the fixed-size algorithms and ignored by the
  /// unbounded one. `max_processes` bounds the ids that collect orders are
  /// precomputed for.
  MachineContext(AlgorithmConfig config, std::size_t processes, std::size_t objects,
                 std::size_t max_processes);

  const AlgorithmConfig& config() const { return config_; }
  std::size_t processes() const { return processes_; }
  std::size_t objects() const { return objects_; }

  std::span<const std::size_t> mem_order(ProcessId who) const;
  std::span<const std::size_t> counter_order(ProcessId who) const;

 private:
  AlgorithmConfig config_;
  std::size_t processes_;
  std::size_t objects_;
  std::vector<std::vector<std::size_t>> mem_orders_;
  std::vector<std::vector<std::size_t>> counter_orders_;
  std::vector<std::size_t> ascending_mem_;
};

enum class StepStatus : std::uint8_t { Running, Done };

/// How a scan produced its result.
enum class ReturnPath : std::uint8_t {
  None,
  /// A collect during which at most one modification could occur.
  Quiet,
  /// Repeated equal collects confirmed by an unchanged counter collect.
  Repeated,
  /// Help borrowed from a process observed moving enough times.
  Borrowed,
  /// Help borrowed from a process that joined after the scan began.
  BorrowedJoiner,
};

std::string_view to_string(ReturnPath path);
std::optional<ReturnPath> parse_return_path(std::string_view text);

/// Phase of a scan machine; the access performed by its next step.
enum class ScanPhase : std::uint8_t {
  ReadHelp,
  ProbeHelp,
  CollectBefore,
  CollectMem,
  CollectAfter,
  ProbeJoiners,
  CollectAgain,
  CollectFinal,
  Done,
};

/// Interval between the first and last read of one MEM collect.
struct CollectWindow {
  StepIndex first = 0;
  StepIndex last = 0;
};

struct ScanStats {
  /// Number of times the main loop began a fresh counter collect.
  std::uint32_t iterations = 0;
  std::uint64_t steps = 0;
  ReturnPath path = ReturnPath::None;
  /// MEM collects that back a Quiet or Repeated result, oldest first.
  std::vector<CollectWindow> windows;
  /// Whose help slot was returned, and the step that read it.
  ProcessId helper;
  StepIndex help_read = 0;
};

/// Byte encoding of machine state, used to recognise revisited states
/// during exploration. Statistics with step indices are not encoded.
class StateWriter {
 public:
  void put(std::uint64_t value);
  void put_signed(std::int64_t value) { put(static_cast<std::uint64_t>(value)); }
  void put(const ObjectState& state);
  void put(std::span<const ObjectState> states);
  void put(std::span<const Counter> values);
  void put(const HelpSlot& view);
  void put(const ParticipantCollect& collect);

  const std::string& bytes() const { return bytes_; }
  void clear() { bytes_.clear(); }

 private:
  std::string bytes_;
};

}  // namespace rmwsnap
