#pragma once

// Native-thread stress runs. Threads advance in rounds separated by a
// barrier; each round is one segment whose history is checked on its own,
// starting and ending at the MEM state observed at the barrier.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rmwsnap/history.hpp"
#include "rmwsnap/scenario.hpp"

namespace rmwsnap {

struct StressOptions {
  /// Checker node budget per segment; larger segments are skipped.
  std::uint64_t node_budget = 2'000'000;
  /// Keep the history of at most this many violating segments.
  std::size_t max_counterexamples = 3;
};

struct StressViolation {
  std::size_t segment = 0;
  std::string message;
  std::string history;
};

struct StressReport {
  std::uint32_t threads = 0;
  std::uint64_t operations = 0;
  std::uint64_t scans = 0;
  std::uint64_t updates = 0;
  double seconds = 0;
  double throughput = 0;
  std::uint64_t segments = 0;
  std::uint64_t segments_checked = 0;
  std::uint64_t segments_skipped = 0;
  std::uint64_t violations = 0;
  std::vector<StressViolation> counterexamples;
  /// Largest loop iteration count per kind ("scan", "update-scan").
  std::map<std::string, std::uint32_t> max_iterations;
  /// Iteration count -> number of top-level scans.
  std::map<std::uint32_t, std::uint64_t> scan_iterations;
  std::map<std::string, std::uint64_t> return_paths;
  /// FNV-1a of the generated workload; equal seeds give equal digests.
  std::string workload_digest;
};

/// One thread's operation script.
using Workload = std::vector<std::vector<Operation>>;

/// Seeded workload for `threads` threads of `ops` operations each. In solo
/// variants only the first thread updates.
Workload generate_workload(const Scenario& scenario, std::uint32_t threads, std::uint64_t ops,
                           std::uint64_t seed);
std::string workload_digest(const Workload& workload);

/// Runs the scenario's stress settings. Throws ConfigError on bad settings.
StressReport stress(const Scenario& scenario, const StressOptions& options = {});

}  // namespace rmwsnap
