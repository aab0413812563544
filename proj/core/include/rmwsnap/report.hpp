#pragma once

// Machine-readable output: JSON run reports and schedule files. A schedule
// file carries the scenario text it was recorded against and the effective
// algorithm configuration, so it replays without the original file.

#include <string>
#include <vector>

#include "rmwsnap/complexity.hpp"
#include "rmwsnap/explorer.hpp"
#include "rmwsnap/stress.hpp"

namespace rmwsnap {

inline constexpr const char* kToolVersion = "0.1.0";

struct ScheduleFile {
  std::string scenario_text;
  std::string digest;
  AlgorithmConfig config;
  std::vector<Choice> choices;
  /// Finding kind the schedule is expected to produce; empty for a clean run.
  std::string expect;
};

ScheduleFile make_schedule_file(const Scenario& scenario, std::vector<Choice> choices,
                                std::string expect = {});
std::string to_json(const ScheduleFile& file);
/// Throws ConfigError on malformed input or a digest that does not match
/// the embedded scenario text.
ScheduleFile parse_schedule_file(const std::string& text);
/// The embedded scenario with the recorded configuration applied.
Scenario scenario_of(const ScheduleFile& file);

/// Counterexample schedules embedded in a report (explore reports carry
/// them under "counterexamples"). Throws ConfigError if `text` is neither a
/// report nor a schedule file.
std::vector<ScheduleFile> schedules_in(const std::string& text);

std::string explore_report_json(const Scenario& scenario, const ExploreReport& report);
std::string stress_report_json(const Scenario& scenario, const StressReport& report);
std::string bench_report_json(const ComplexityReport& report);

/// Kind recorded as a schedule's expectation: linearizability if present,
/// else the first finding's kind, else empty.
std::string headline_kind(const std::vector<RunFinding>& findings);

/// A scripted adversary run. The trail is embedded as a schedule, and as a
/// counterexample when the run was flagged.
std::string adversary_report_json(const Scenario& scenario, const std::string& policy, const PolicyRun& run,
                                  double seconds);

struct ReplayOutcome {
  std::string expect;
  ReplayResult result;
};
std::string replay_report_json(const std::vector<ScheduleFile>& files,
                               const std::vector<ReplayOutcome>& outcomes, double seconds);

}  // namespace rmwsnap
