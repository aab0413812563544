#include "rmwsnap/report.hpp"

#include <map>

#include "json.hpp"

namespace rmwsnap {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kScheduleFormat = "rmwsnap-schedule";

ordered_json header(const char* command) {
  ordered_json j;
  j["tool"] = "rmwsnap";
  j["version"] = kToolVersion;
  j["command"] = command;
  return j;
}

ordered_json config_json(const AlgorithmConfig& c) {
  ordered_json j;
  j["variant"] = std::string(to_string(c.variant));
  j["mutant"] = std::string(to_string(c.mutant));
  j["collect_order"] = c.order.to_string();
  j["strict_ok"] = c.strict_ok_result;
  return j;
}

ordered_json scenario_json(const Scenario& s) {
  ordered_json j;
  j["name"] = s.name;
  j["digest"] = s.digest();
  auto config = config_json(s.config);
  for (auto& [k, v] : config.items()) j[k] = v;
  j["processes"] = s.process_count();
  j["objects"] = s.objects();
  return j;
}

ordered_json schedule_json(const ScheduleFile& f) {
  ordered_json j;
  j["format"] = kScheduleFormat;
  j["version"] = 1;
  j["scenario_digest"] = f.digest;
  j["scenario"] = f.scenario_text;
  j["config"] = config_json(f.config);
  std::vector<std::string> choices;
  choices.reserve(f.choices.size());
  for (const auto& c : f.choices) choices.push_back(to_string(c));
  j["choices"] = choices;
  j["expect"] = f.expect;
  return j;
}

template <class Map>
ordered_json map_json(const Map& m) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, v] : m) {
    if constexpr (std::is_convertible_v<decltype(k), std::string>) {
      j[k] = v;
    } else {
      j[std::to_string(k)] = v;
    }
  }
  return j;
}

std::string field_string(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw ConfigError(std::string("schedule file: missing or non-string field '") + key + "'");
  }
  return j[key].get<std::string>();
}

ScheduleFile schedule_from(const json& j) {
  if (!j.is_object()) throw ConfigError("schedule file: expected a JSON object");
  if (field_string(j, "format") != kScheduleFormat) throw ConfigError("schedule file: unknown format");
  if (!j.contains("version") || j["version"] != 1) throw ConfigError("schedule file: unsupported version");
  ScheduleFile f;
  f.scenario_text = field_string(j, "scenario");
  f.digest = field_string(j, "scenario_digest");
  if (fnv1a_hex(f.scenario_text) != f.digest) {
    throw ConfigError("schedule file: scenario digest does not match the embedded scenario");
  }
  if (!j.contains("config") || !j["config"].is_object()) throw ConfigError("schedule file: missing config");
  const auto& c = j["config"];
  auto variant = parse_variant(field_string(c, "variant"));
  if (!variant) throw ConfigError("schedule file: unknown variant");
  auto mutant = parse_mutant(field_string(c, "mutant"));
  if (!mutant) throw ConfigError("schedule file: unknown mutant");
  f.config.variant = *variant;
  f.config.mutant = *mutant;
  try {
    f.config.order = CollectOrder::parse(field_string(c, "collect_order"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("schedule file: ") + e.what());
  }
  if (!c.contains("strict_ok") || !c["strict_ok"].is_boolean()) {
    throw ConfigError("schedule file: missing strict_ok");
  }
  f.config.strict_ok_result = c["strict_ok"].get<bool>();
  if (!j.contains("choices") || !j["choices"].is_array()) throw ConfigError("schedule file: missing choices");
  for (const auto& c : j["choices"]) {
    if (!c.is_string()) throw ConfigError("schedule file: choices must be strings");
    f.choices.push_back(parse_choice(c.get<std::string>()));
  }
  if (j.contains("expect")) f.expect = field_string(j, "expect");
  return f;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

ScheduleFile make_schedule_file(const Scenario& scenario, std::vector<Choice> choices, std::string expect) {
  return {scenario.source, scenario.digest(), scenario.config, std::move(choices), std::move(expect)};
}

std::string to_json(const ScheduleFile& file) { return schedule_json(file).dump(2) + "\n"; }

ScheduleFile parse_schedule_file(const std::string& text) { return schedule_from(parse_json(text)); }

Scenario scenario_of(const ScheduleFile& file) {
  auto s = parse_scenario(file.scenario_text, "schedule:" + file.digest);
  s.config = file.config;
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("schedule file: ") + e.what());
  }
  return s;
}

std::vector<ScheduleFile> schedules_in(const std::string& text) {
  auto j = parse_json(text);
  if (j.is_object() && j.contains("format")) return {schedule_from(j)};
  if (j.is_object() && j.contains("counterexamples") && j["counterexamples"].is_array()) {
    std::vector<ScheduleFile> out;
    for (const auto& c : j["counterexamples"]) {
      if (!c.is_object() || !c.contains("schedule")) continue;
      out.push_back(schedule_from(c["schedule"]));
    }
    return out;
  }
  throw ConfigError("neither a schedule file nor a report with counterexamples");
}

std::string explore_report_json(const Scenario& scenario, const ExploreReport& r) {
  auto j = header("explore");
  j["scenario"] = scenario_json(scenario);
  j["mode"] = std::string(to_string(r.mode));
  j["complete"] = r.complete;
  j["schedules"] = r.schedules;
  j["schedules_saturated"] = r.schedules_saturated;
  j["states"] = r.states;
  j["terminal_states"] = r.terminal_states;
  j["histories_checked"] = r.histories_checked;
  j["violations"] = r.violations;
  j["linearizability_violations"] = r.linearizability_violations;
  j["timeline_violations"] = r.timeline_violations;
  j["disagreements"] = r.disagreements;
  j["budget_exceeded"] = r.budget_exceeded;
  j["max_iterations"] = map_json(r.max_iterations);
  j["return_paths"] = map_json(r.return_paths);
  auto list = ordered_json::array();
  for (const auto& c : r.counterexamples) {
    ordered_json e;
    e["kind"] = c.kind;
    e["message"] = c.message;
    e["history"] = c.history;
    e["schedule"] = schedule_json(make_schedule_file(scenario, c.schedule, c.kind));
    list.push_back(std::move(e));
  }
  j["counterexamples"] = std::move(list);
  j["seconds"] = r.seconds;
  return j.dump(2) + "\n";
}

std::string stress_report_json(const Scenario& scenario, const StressReport& r) {
  auto j = header("stress");
  j["scenario"] = scenario_json(scenario);
  j["mode"] = "stress";
  j["threads"] = r.threads;
  j["operations"] = r.operations;
  j["scans"] = r.scans;
  j["updates"] = r.updates;
  j["seconds"] = r.seconds;
  j["throughput"] = r.throughput;
  j["segments"] = r.segments;
  j["segments_checked"] = r.segments_checked;
  j["segments_skipped"] = r.segments_skipped;
  j["violations"] = r.violations;
  j["max_iterations"] = map_json(r.max_iterations);
  j["scan_iterations"] = map_json(r.scan_iterations);
  j["return_paths"] = map_json(r.return_paths);
  j["workload_digest"] = r.workload_digest;
  auto list = ordered_json::array();
  for (const auto& c : r.counterexamples) {
    ordered_json e;
    e["segment"] = c.segment;
    e["message"] = c.message;
    e["history"] = c.history;
    list.push_back(std::move(e));
  }
  j["counterexamples"] = std::move(list);
  return j.dump(2) + "\n";
}

std::string bench_report_json(const ComplexityReport& r) {
  auto j = header("bench");
  j["mode"] = r.contention ? "contention" : "quiescent";
  j["variant"] = std::string(to_string(r.variant));
  auto cells = ordered_json::array();
  for (const auto& c : r.cells) {
    ordered_json e;
    e["n"] = c.n;
    e["m"] = c.m;
    e["scans"] = c.scans;
    e["max_steps"] = c.max_steps;
    e["mean_steps"] = c.mean_steps;
    e["max_iterations"] = c.max_iterations;
    e["ratio"] = c.ratio;
    e["bound"] = c.bound ? ordered_json(*c.bound) : ordered_json(nullptr);
    cells.push_back(std::move(e));
  }
  j["cells"] = std::move(cells);
  j["fitted_c"] = r.fitted_c;
  j["analytic_c"] = r.analytic_c ? ordered_json(*r.analytic_c) : ordered_json(nullptr);
  j["violations"] = 0;
  j["seconds"] = r.seconds;
  return j.dump(2) + "\n";
}

std::string headline_kind(const std::vector<RunFinding>& findings) {
  for (const auto& f : findings) {
    if (f.kind == "linearizability") return f.kind;
  }
  return findings.empty() ? std::string() : findings.front().kind;
}

std::string adversary_report_json(const Scenario& scenario, const std::string& policy, const PolicyRun& run,
                                  double seconds) {
  const auto& sim = run.sim;
  auto j = header("adversary");
  j["scenario"] = scenario_json(scenario);
  j["mode"] = "adversary";
  j["policy"] = policy;
  j["steps"] = sim.steps();
  j["crashes"] = sim.crashes();
  j["terminal"] = sim.terminal();
  j["over_budget"] = sim.over_budget();
  j["violations"] = run.findings.size();
  auto findings = ordered_json::array();
  for (const auto& f : run.findings) findings.push_back({{"kind", f.kind}, {"message", f.message}});
  j["findings"] = std::move(findings);
  std::map<std::string, std::uint32_t> max_iterations;
  auto scans = ordered_json::array();
  for (const auto& s : sim.scans()) {
    ordered_json e;
    e["process"] = s.process.index();
    e["top_level"] = s.top_level;
    e["iterations"] = s.stats.iterations;
    e["steps"] = s.stats.steps;
    e["path"] = std::string(to_string(s.stats.path));
    scans.push_back(std::move(e));
    auto& best = max_iterations[s.top_level ? "scan" : "update-scan"];
    best = std::max(best, s.stats.iterations);
  }
  j["max_iterations"] = map_json(max_iterations);
  j["scans"] = std::move(scans);
  auto expect = headline_kind(run.findings);
  auto schedule = make_schedule_file(scenario, sim.trail(), expect);
  j["schedule"] = schedule_json(schedule);
  auto list = ordered_json::array();
  if (!run.findings.empty()) {
    ordered_json e;
    e["kind"] = expect;
    for (const auto& f : run.findings) {
      if (f.kind == expect) {
        e["message"] = f.message;
        break;
      }
    }
    e["history"] = sim.history().serialize();
    e["schedule"] = schedule_json(schedule);
    list.push_back(std::move(e));
  }
  j["counterexamples"] = std::move(list);
  j["history"] = sim.history().serialize();
  j["seconds"] = seconds;
  return j.dump(2) + "\n";
}

std::string replay_report_json(const std::vector<ScheduleFile>& files, const std::vector<ReplayOutcome>& outcomes,
                               double seconds) {
  auto j = header("replay");
  j["mode"] = "replay";
  std::uint64_t violations = 0;
  auto runs = ordered_json::array();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    ordered_json e;
    e["scenario_digest"] = files[i].digest;
    e["expect"] = o.expect;
    e["verdict"] = o.result.findings.empty() ? "clean" : "violation";
    auto findings = ordered_json::array();
    for (const auto& f : o.result.findings) findings.push_back({{"kind", f.kind}, {"message", f.message}});
    e["findings"] = std::move(findings);
    e["terminal"] = o.result.terminal;
    e["over_budget"] = o.result.over_budget;
    e["history"] = o.result.history;
    if (!o.result.findings.empty()) ++violations;
    runs.push_back(std::move(e));
  }
  j["violations"] = violations;
  j["runs"] = std::move(runs);
  j["seconds"] = seconds;
  return j.dump(2) + "\n";
}

}  // namespace rmwsnap
