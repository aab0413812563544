#pragma once

// Schedule exploration over a Simulation: exhaustive, preemption-bounded and
// seeded random, plus replay of recorded schedules and scripted adversaries.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rmwsnap/simulator.hpp"

namespace rmwsnap {

struct Counterexample {
  std::string kind;
  std::string message;
  std::vector<Choice> schedule;
  /// Serialized history of the replayed schedule.
  std::string history;
};

struct ExploreOptions {
  /// Merge schedules that reach the same state. Off only for counting tests.
  bool memoize = true;
  /// Run the offline checks on every distinct terminal state (exhaustive and
  /// bounded) rather than only on runs flagged online.
  bool offline_checks = true;
  /// Counterexamples kept per finding kind.
  std::size_t max_counterexamples = 5;
};

struct ExploreReport {
  ExploreMode mode = ExploreMode::Exhaustive;
  /// False when the state limit cut the search.
  bool complete = true;
  /// Schedules covered; saturates at 2^64 - 1.
  std::uint64_t schedules = 0;
  bool schedules_saturated = false;
  std::uint64_t states = 0;
  std::uint64_t terminal_states = 0;
  std::uint64_t histories_checked = 0;
  /// Runs with any finding. Under memoization a run stands for every
  /// schedule reaching the same final state.
  std::uint64_t violations = 0;
  /// Runs the linearizability monitor rejected.
  std::uint64_t linearizability_violations = 0;
  /// Runs with a view MEM never held during its scan.
  std::uint64_t timeline_violations = 0;
  std::uint64_t disagreements = 0;
  /// Runs cut because a scan exceeded the iteration budget.
  std::uint64_t budget_exceeded = 0;
  std::vector<Counterexample> counterexamples;
  /// Largest loop iteration count per kind ("scan", "update-scan").
  std::map<std::string, std::uint32_t> max_iterations;
  /// Scan completions per return path.
  std::map<std::string, std::uint64_t> return_paths;
  double seconds = 0;
};

/// Runs the scenario's exploration mode (settings taken from the scenario).
ExploreReport explore(const Scenario& scenario, const ExploreOptions& options = {});

/// Total number of interleavings of processes taking the given step counts.
/// Saturates at 2^64 - 1.
std::uint64_t multinomial(const std::vector<std::uint64_t>& steps);

struct ReplayResult {
  std::string history;
  std::vector<RunFinding> findings;
  std::string online_violation;
  bool over_budget = false;
  bool terminal = false;
};

/// Re-executes a schedule. Throws ConfigError if a choice is unavailable.
ReplayResult replay(const Scenario& scenario, const std::vector<Choice>& schedule);

/// A policy picks the next choice, or nullopt to stop.
using Policy = std::function<std::optional<Choice>(const Simulation&)>;

struct PolicyRun {
  Simulation sim;
  std::vector<RunFinding> findings;
};

/// Drives a recorded simulation with a policy until it stops, the run ends,
/// or `max_steps` steps were taken.
PolicyRun run_policy(const Scenario& scenario, const Policy& policy, SimOptions options,
                     std::uint64_t max_steps = 1'000'000);

/// Scripted adversaries. Each expects the scenario shape named in its
/// comment and returns the policy for it.
namespace adversary {

/// Unbounded: p1 scans, p2 is an initial participant that has crashed with
/// its counter odd, p3.. are late joiners each holding one update. Before
/// every MEM collect of p1 a fresh joiner joins, runs its update through the
/// MEM mutation and crashes.
Policy fresh_joiners();

/// n = 2, lock-free: p1 holds updates, p2 one scan. p1 completes a whole
/// update before every MEM collect of p2.
Policy starve_lock_free();

/// n = 3: p1 and p2 hold updates, p3 one scan. p1 and p2 stay between
/// announce and retire during each scanner iteration and finish one update
/// (and announce the next) between iterations.
Policy keep_updaters_odd();

/// n = 2, wait-free: p2 holds one update, p1 holds many. p2's helping scan
/// runs with p1 announced across its counter collects; p1 completes its
/// update and announces the next just before each of p2's extra collects.
Policy defeat_help_counting();

/// n = 5 over two counters: p1 and p2 hold one update each (on MEM[1] and
/// MEM[2]), p3 one scan, p4 and p5 two updates each. p1 and p2 change MEM
/// inside p3's first collect, p2 crashing with its counter odd; p4 then
/// p5 undo those changes around the reads of p3's extra collect so that it
/// matches a view MEM never held.
Policy hide_aba();

/// Looks a policy up by its command-line name (fresh-joiners, starve-lock-free,
/// keep-updaters-odd, defeat-help-counting, hide-aba).
std::optional<Policy> named(std::string_view name);
std::vector<std::string_view> names();

}  // namespace adversary

}  // namespace rmwsnap
