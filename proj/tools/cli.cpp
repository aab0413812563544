#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "rmwsnap/report.hpp"

namespace rmwsnap::cli {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

struct Common {
  std::string out;
  std::string variant;
  std::string mutant;
  std::string collect_order;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--out", c.out, "Write the JSON report to this path");
  app->add_option("--variant", c.variant, "solo-lf, solo-wf, conc-lf, conc-wf, conc-blocking or unbounded");
  app->add_option("--mutant", c.mutant,
                  "none, drop-help-publish, drop-third-collect, weak-help-threshold or skip-joiner-clause");
  app->add_option("--collect-order", c.collect_order, "asc, desc or random:<seed>");
}

AlgorithmConfig apply_common(const Common& c, AlgorithmConfig config) {
  if (!c.variant.empty()) {
    auto v = parse_variant(c.variant);
    if (!v) throw ConfigError("--variant: unknown variant '" + c.variant + "'");
    config.variant = *v;
  }
  if (!c.mutant.empty()) {
    auto m = parse_mutant(c.mutant);
    if (!m) throw ConfigError("--mutant: unknown mutant '" + c.mutant + "'");
    config.mutant = *m;
  }
  if (!c.collect_order.empty()) {
    try {
      config.order = CollectOrder::parse(c.collect_order);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("--collect-order: ") + e.what());
    }
  }
  return config;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError(path.string() + ": cannot write file");
  out << text;
}

std::vector<std::size_t> parse_list(const std::string& text, const char* flag) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      auto v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError(std::string(flag) + ": bad list item '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError(std::string(flag) + ": empty list");
  return out;
}

struct ExploreFlags {
  Common common;
  std::string scenario;
  std::string mode;
  std::optional<std::uint32_t> preemptions;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> count;
  std::optional<std::uint32_t> crashes;
  std::optional<std::uint32_t> budget;
  std::optional<std::uint64_t> state_limit;
  std::string save_schedules;
};

int cmd_explore(const ExploreFlags& f, std::ostream& out) {
  auto scenario = load_scenario_file(f.scenario);
  scenario.config = apply_common(f.common, scenario.config);
  if (!f.mode.empty()) {
    auto m = parse_explore_mode(f.mode);
    if (!m) throw ConfigError("--mode: expected exhaustive, bounded or random");
    scenario.explore.mode = *m;
  }
  if (f.preemptions) scenario.explore.preemption_bound = *f.preemptions;
  if (f.seed) scenario.explore.seed = *f.seed;
  if (f.count) scenario.explore.count = *f.count;
  if (f.crashes) scenario.explore.crashes = *f.crashes;
  if (f.budget) scenario.explore.iteration_budget = *f.budget;
  if (f.state_limit) scenario.explore.state_limit = *f.state_limit;
  scenario.validate();

  auto report = explore(scenario);
  if (!f.common.out.empty()) write_file(f.common.out, explore_report_json(scenario, report));
  if (!f.save_schedules.empty()) {
    for (std::size_t i = 0; i < report.counterexamples.size(); ++i) {
      const auto& c = report.counterexamples[i];
      auto file = make_schedule_file(scenario, c.schedule, c.kind);
      write_file(std::filesystem::path(f.save_schedules) / ("counterexample-" + std::to_string(i + 1) + ".json"),
                 to_json(file));
    }
  }
  out << "explore " << scenario.name << " [" << to_string(scenario.config.variant);
  if (scenario.config.mutant != Mutant::None) out << ", " << to_string(scenario.config.mutant);
  out << "] mode=" << to_string(report.mode) << " complete=" << (report.complete ? "yes" : "no")
      << " schedules=" << report.schedules << (report.schedules_saturated ? "+" : "") << " states=" << report.states
      << " violations=" << report.violations << " (linearizability " << report.linearizability_violations
      << ", timeline " << report.timeline_violations << ") disagreements=" << report.disagreements;
  for (const auto& [kind, n] : report.max_iterations) out << " max-" << kind << "=" << n;
  out << " seconds=" << std::fixed << std::setprecision(2) << report.seconds << "\n";
  for (const auto& c : report.counterexamples) out << "  " << c.kind << ": " << c.message << "\n";
  return report.violations > 0 ? kViolation : kClean;
}

struct StressFlags {
  Common common;
  std::string scenario;
  std::optional<std::uint32_t> threads;
  std::optional<std::uint64_t> ops;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> round_ops;
  std::optional<double> scan_ratio;
};

int cmd_stress(const StressFlags& f, std::ostream& out) {
  auto scenario = load_scenario_file(f.scenario);
  scenario.config = apply_common(f.common, scenario.config);
  scenario.validate();
  auto& st = scenario.stress;
  if (f.threads) st.threads = *f.threads;
  if (f.ops) {
    if (*f.ops == 0) throw ConfigError("--ops must be positive");
    st.ops_per_thread = (*f.ops + std::max<std::uint32_t>(st.threads, 1) - 1) / std::max<std::uint32_t>(st.threads, 1);
  }
  if (f.seed) st.seed = *f.seed;
  if (f.round_ops) st.round_ops = *f.round_ops;
  if (f.scan_ratio) st.scan_ratio = *f.scan_ratio;
  if (st.threads == 0) throw ConfigError("--threads must be positive");
  if (st.scan_ratio < 0 || st.scan_ratio > 1) throw ConfigError("--scan-ratio must lie in [0, 1]");

  auto report = stress(scenario);
  if (!f.common.out.empty()) write_file(f.common.out, stress_report_json(scenario, report));
  out << "stress " << scenario.name << " [" << to_string(scenario.config.variant) << "] threads=" << report.threads
      << " ops=" << report.operations << " segments=" << report.segments_checked << "/" << report.segments
      << " skipped=" << report.segments_skipped << " violations=" << report.violations;
  for (const auto& [kind, n] : report.max_iterations) out << " max-" << kind << "=" << n;
  out << " ops/s=" << std::fixed << std::setprecision(0) << report.throughput << "\n";
  return report.violations > 0 ? kViolation : kClean;
}

struct ReplayFlags {
  Common common;
  std::string file;
  std::string scenario;
  std::string history_out;
};

int cmd_replay(const ReplayFlags& f, std::ostream& out) {
  auto files = schedules_in(read_file(f.file));
  if (files.empty()) throw ConfigError(f.file + ": no schedules to replay");
  std::optional<std::string> digest;
  if (!f.scenario.empty()) digest = load_scenario_file(f.scenario).digest();
  std::vector<ReplayOutcome> outcomes;
  auto start = Clock::now();
  for (const auto& file : files) {
    if (digest && *digest != file.digest) {
      throw ConfigError("schedule was recorded against scenario " + file.digest + ", not " + *digest);
    }
    // The schedule binds the configuration; flags may only restate it.
    auto bound = apply_common(f.common, file.config);
    if (!(bound.order == file.config.order)) {
      throw ConfigError("schedule binds collect order " + file.config.order.to_string());
    }
    if (bound.variant != file.config.variant || bound.mutant != file.config.mutant) {
      throw ConfigError("schedule binds variant " + std::string(to_string(file.config.variant)) + " and mutant " +
                        std::string(to_string(file.config.mutant)));
    }
    auto scenario = scenario_of(file);
    outcomes.push_back({file.expect, replay(scenario, file.choices)});
  }
  if (!f.common.out.empty()) write_file(f.common.out, replay_report_json(files, outcomes, since(start)));
  if (!f.history_out.empty()) write_file(f.history_out, outcomes.front().result.history);
  std::size_t violating = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& r = outcomes[i].result;
    out << "replay " << (i + 1) << "/" << outcomes.size() << " steps=" << files[i].choices.size()
        << " verdict=" << (r.findings.empty() ? "clean" : "violation");
    if (!outcomes[i].expect.empty()) out << " expected=" << outcomes[i].expect;
    out << "\n";
    for (const auto& finding : r.findings) out << "  " << finding.kind << ": " << finding.message << "\n";
    if (!r.findings.empty()) ++violating;
  }
  return violating > 0 ? kViolation : kClean;
}

struct BenchFlags {
  Common common;
  std::string n = "2,4,8";
  std::string m = "2,4,8";
  bool quiescent = false;
  std::uint32_t runs = 20;
  std::uint64_t seed = 1;
};

int cmd_bench(const BenchFlags& f, std::ostream& out) {
  ComplexityOptions o;
  o.config = apply_common(f.common, o.config);
  o.ns = parse_list(f.n, "--n");
  o.ms = parse_list(f.m, "--m");
  o.contention = !f.quiescent;
  o.runs = f.runs;
  o.seed = f.seed;
  auto report = measure_steps(o);
  if (!f.common.out.empty()) write_file(f.common.out, bench_report_json(report));
  out << "bench [" << to_string(report.variant) << "] " << (report.contention ? "contention" : "quiescent") << "\n";
  out << std::setw(4) << "n" << std::setw(4) << "m" << std::setw(8) << "scans" << std::setw(11) << "max-steps"
      << std::setw(12) << "mean-steps" << std::setw(8) << "iters" << std::setw(10) << "ratio" << std::setw(10)
      << "bound"
      << "\n";
  for (const auto& c : report.cells) {
    out << std::setw(4) << c.n << std::setw(4) << c.m << std::setw(8) << c.scans << std::setw(11) << c.max_steps
        << std::setw(12) << std::fixed << std::setprecision(1) << c.mean_steps << std::setw(8) << c.max_iterations
        << std::setw(10) << std::setprecision(3) << c.ratio << std::setw(10)
        << (c.bound ? std::to_string(*c.bound) : std::string("-")) << "\n";
  }
  out << "fitted c = " << std::setprecision(3) << report.fitted_c;
  if (report.analytic_c) out << " (bound c = " << *report.analytic_c << ")";
  out << "\n";
  return kClean;
}

struct AdversaryFlags {
  Common common;
  std::string policy;
  std::string scenario;
  std::optional<std::uint32_t> budget;
  std::uint64_t max_steps = 1'000'000;
  std::string save_schedule;
};

int cmd_adversary(const AdversaryFlags& f, std::ostream& out) {
  auto policy = adversary::named(f.policy);
  if (!policy) {
    std::string known;
    for (auto n : adversary::names()) known += (known.empty() ? "" : ", ") + std::string(n);
    throw ConfigError("unknown adversary '" + f.policy + "' (known: " + known + ")");
  }
  auto scenario = load_scenario_file(f.scenario);
  scenario.config = apply_common(f.common, scenario.config);
  if (f.budget) scenario.explore.iteration_budget = *f.budget;
  scenario.validate();

  SimOptions options;
  options.iteration_budget = scenario.explore.iteration_budget;
  auto start = Clock::now();
  auto run = run_policy(scenario, *policy, options, f.max_steps);
  auto seconds = since(start);
  if (!f.common.out.empty()) write_file(f.common.out, adversary_report_json(scenario, f.policy, run, seconds));
  if (!f.save_schedule.empty()) {
    write_file(f.save_schedule, to_json(make_schedule_file(scenario, run.sim.trail(), headline_kind(run.findings))));
  }
  std::uint32_t iterations = 0;
  for (const auto& s : run.sim.scans()) {
    if (s.top_level) iterations = std::max(iterations, s.stats.iterations);
  }
  out << "adversary " << f.policy << " on " << scenario.name << " [" << to_string(scenario.config.variant);
  if (scenario.config.mutant != Mutant::None) out << ", " << to_string(scenario.config.mutant);
  out << "] steps=" << run.sim.steps() << " crashes=" << run.sim.crashes()
      << " terminal=" << (run.sim.terminal() ? "yes" : "no") << " over-budget=" << (run.sim.over_budget() ? "yes" : "no")
      << " max-scan-iterations=" << iterations << " violations=" << run.findings.size() << "\n";
  for (const auto& finding : run.findings) out << "  " << finding.kind << ": " << finding.message << "\n";
  return run.findings.empty() ? kClean : kViolation;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"RMWable snapshot algorithms: exploration, stress, replay and benchmarks", "rmwsnap"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  ExploreFlags ef;
  auto* explore_cmd = app.add_subcommand("explore", "Explore schedules of a scenario");
  explore_cmd->add_option("scenario", ef.scenario, "Scenario file (YAML)")->required();
  add_common(explore_cmd, ef.common);
  explore_cmd->add_option("--mode", ef.mode, "exhaustive, bounded or random");
  explore_cmd->add_option("--preemptions", ef.preemptions, "Preemption bound (bounded mode)");
  explore_cmd->add_option("--seed", ef.seed, "Seed (random mode)");
  explore_cmd->add_option("--count", ef.count, "Number of schedules (random mode)");
  explore_cmd->add_option("--crashes", ef.crashes, "Crashes injected per run");
  explore_cmd->add_option("--iteration-budget", ef.budget, "Loop iterations after which a scan is cut");
  explore_cmd->add_option("--state-limit", ef.state_limit, "Distinct states before the search stops");
  explore_cmd->add_option("--save-schedules", ef.save_schedules, "Directory for counterexample schedule files");

  StressFlags sf;
  auto* stress_cmd = app.add_subcommand("stress", "Run the scenario's objects on native threads");
  stress_cmd->add_option("scenario", sf.scenario, "Scenario file (YAML)")->required();
  add_common(stress_cmd, sf.common);
  stress_cmd->add_option("--threads", sf.threads, "Thread count");
  stress_cmd->add_option("--ops", sf.ops, "Total operations across threads");
  stress_cmd->add_option("--seed", sf.seed, "Workload seed");
  stress_cmd->add_option("--round-ops", sf.round_ops, "Operations per thread between barriers");
  stress_cmd->add_option("--scan-ratio", sf.scan_ratio, "Fraction of scans");

  ReplayFlags rf;
  auto* replay_cmd = app.add_subcommand("replay", "Replay a schedule file or a report's counterexamples");
  replay_cmd->add_option("schedule", rf.file, "Schedule file or explore report")->required();
  add_common(replay_cmd, rf.common);
  replay_cmd->add_option("--scenario", rf.scenario, "Reject the schedule unless it was recorded against this file");
  replay_cmd->add_option("--history-out", rf.history_out, "Write the first replayed history here");

  BenchFlags bf;
  auto* bench_cmd = app.add_subcommand("bench", "Measure Scan step counts over an n x m grid");
  add_common(bench_cmd, bf.common);
  bench_cmd->add_option("--n", bf.n, "Comma-separated process counts");
  bench_cmd->add_option("--m", bf.m, "Comma-separated object counts");
  bench_cmd->add_flag("--quiescent", bf.quiescent, "Measure a lone scanner");
  bench_cmd->add_option("--runs", bf.runs, "Random schedules per cell");
  bench_cmd->add_option("--seed", bf.seed, "Schedule seed");

  AdversaryFlags af;
  auto* adversary_cmd = app.add_subcommand("adversary", "Drive a scenario with a scripted adversary");
  adversary_cmd->add_option("policy", af.policy, "fresh-joiners, starve-lock-free, keep-updaters-odd, defeat-help-counting or hide-aba")
      ->required();
  adversary_cmd->add_option("scenario", af.scenario, "Scenario file (YAML)")->required();
  add_common(adversary_cmd, af.common);
  adversary_cmd->add_option("--iteration-budget", af.budget, "Loop iterations after which a scan is cut");
  adversary_cmd->add_option("--max-steps", af.max_steps, "Stop after this many steps");
  adversary_cmd->add_option("--save-schedule", af.save_schedule, "Write the run's schedule file here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kClean;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kClean;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kClean;
  } catch (const CLI::ParseError& e) {
    err << "rmwsnap: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (*explore_cmd) return cmd_explore(ef, out);
    if (*stress_cmd) return cmd_stress(sf, out);
    if (*replay_cmd) return cmd_replay(rf, out);
    if (*bench_cmd) return cmd_bench(bf, out);
    if (*adversary_cmd) return cmd_adversary(af, out);
  } catch (const ConfigError& e) {
    err << "rmwsnap: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "rmwsnap: " << e.what() << "\n";
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace rmwsnap::cli
