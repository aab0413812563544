#include "rmwsnap/explorer.hpp"

#include <chrono>
#include <limits>
#include <memory>
#include <random>
#include <unordered_map>

namespace rmwsnap {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) { return a > kSaturated - b ? kSaturated : a + b; }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

struct Key {
  std::uint64_t a;
  std::uint64_t b;
  bool operator==(const Key&) const = default;
};

struct KeyHash {
  std::size_t operator()(const Key& k) const { return k.a ^ (k.b * 0x9e3779b97f4a7c15ull); }
};

Key fingerprint(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return {std::hash<std::string>{}(bytes), h};
}

std::pair<std::string, std::string> split_violation(const std::string& violation) {
  auto colon = violation.find(": ");
  if (colon == std::string::npos) return {violation, violation};
  return {violation.substr(0, colon), violation.substr(colon + 2)};
}

SimOptions sim_options(const Scenario& s, bool record) {
  SimOptions o;
  o.record = record;
  o.monitor = true;
  o.iteration_budget = s.explore.iteration_budget;
  return o;
}

class Recorder {
 public:
  Recorder(const Scenario& scenario, const ExploreOptions& options, ExploreReport& report)
      : scenario_(scenario), options_(options), report_(report) {}

  void note(const StepOutcome& out) {
    if (!out.completed || !out.was_scan) return;
    auto& slot = report_.max_iterations[out.top_level ? "scan" : "update-scan"];
    slot = std::max(slot, out.iterations);
    ++report_.return_paths[std::string(to_string(out.path))];
  }

  // Checks one finished run. `sim` may have been run without recording, in
  // which case the schedule is replayed to obtain its history.
  void finish(const Simulation& sim, const std::vector<Choice>& schedule, bool recorded) {
    if (sim.over_budget()) ++report_.budget_exceeded;
    bool online = !sim.monitor_ok();
    if (online) {
      ++report_.violations;
      if (!sim.violation().empty()) ++report_.linearizability_violations;
      if (!sim.timeline_violation().empty()) ++report_.timeline_violations;
      const auto& first = sim.violation().empty() ? sim.timeline_violation() : sim.violation();
      auto [kind, message] = split_violation(first);
      keep(kind, message, schedule);
    }
    if (!options_.offline_checks) return;
    ++report_.histories_checked;
    auto run = [&](const Simulation& rec) {
      auto findings = check_run(rec);
      bool counted = online;
      for (const auto& f : findings) {
        if (f.kind == "disagreement") {
          ++report_.disagreements;
          keep(f.kind, f.message, schedule);
        } else if (!counted) {
          // Only the offline checks object: nesting or collect windows.
          counted = true;
          ++report_.violations;
          keep(f.kind, f.message, schedule);
        }
      }
    };
    if (recorded) {
      run(sim);
      return;
    }
    Simulation copy(scenario_, sim_options(scenario_, true));
    for (const auto& c : schedule) copy.apply(c);
    run(copy);
  }

 private:
  void keep(const std::string& kind, const std::string& message, const std::vector<Choice>& schedule) {
    if (kept_[kind]++ >= options_.max_counterexamples) return;
    Simulation recorded(scenario_, sim_options(scenario_, true));
    for (const auto& c : schedule) recorded.apply(c);
    report_.counterexamples.push_back({kind, message, schedule, recorded.history().serialize()});
  }

  std::map<std::string, std::size_t> kept_;
  const Scenario& scenario_;
  const ExploreOptions& options_;
  ExploreReport& report_;
};

class Systematic {
 public:
  Systematic(const Scenario& scenario, const ExploreOptions& options, ExploreReport& report)
      : scenario_(scenario),
        options_(options),
        report_(report),
        recorder_(scenario, options, report),
        bounded_(scenario.explore.mode == ExploreMode::Bounded) {}

  void run() {
    Simulation root(scenario_, sim_options(scenario_, false));
    auto paths = dfs(root, ProcessId{}, 0);
    report_.schedules = paths;
    report_.schedules_saturated = paths == kSaturated;
    report_.states = memo_.size();
  }

 private:
  std::uint64_t dfs(const Simulation& sim, ProcessId last, std::uint32_t preemptions) {
    Key key{};
    if (options_.memoize) {
      StateWriter w;
      sim.encode(w);
      if (bounded_) {
        w.put(last.index());
        w.put(preemptions);
      }
      key = fingerprint(w.bytes());
      if (auto it = memo_.find(key); it != memo_.end()) return it->second;
      if (memo_.size() >= scenario_.explore.state_limit) {
        report_.complete = false;
        return 0;
      }
    }

    std::uint64_t paths = 0;
    if (sim.terminal()) {
      ++report_.terminal_states;
      recorder_.finish(sim, trail_, false);
      paths = 1;
    } else {
      for (const auto& c : sim.choices(scenario_.explore.crashes)) {
        std::uint32_t cost = 0;
        if (bounded_ && !c.crash && last.valid() && c.process != last && sim.enabled(last)) cost = 1;
        if (preemptions + cost > scenario_.explore.preemption_bound) continue;
        Simulation child = sim;
        recorder_.note(child.apply(c));
        trail_.push_back(c);
        paths = sat_add(paths, dfs(child, c.crash ? last : c.process, preemptions + cost));
        trail_.pop_back();
      }
    }
    if (options_.memoize) memo_.emplace(key, paths);
    return paths;
  }

  const Scenario& scenario_;
  const ExploreOptions& options_;
  ExploreReport& report_;
  Recorder recorder_;
  bool bounded_;
  std::unordered_map<Key, std::uint64_t, KeyHash> memo_;
  std::vector<Choice> trail_;
};

void random_runs(const Scenario& scenario, const ExploreOptions& options, ExploreReport& report) {
  Recorder recorder(scenario, options, report);
  for (std::uint64_t i = 0; i < scenario.explore.count; ++i) {
    std::mt19937_64 rng(splitmix64(scenario.explore.seed * 0x100000001b3ull + i));
    Simulation sim(scenario, sim_options(scenario, true));
    std::vector<Choice> steps;
    while (!sim.terminal()) {
      auto choices = sim.choices(0);
      Choice pick = choices[std::uniform_int_distribution<std::size_t>(0, choices.size() - 1)(rng)];
      if (sim.crashes() < scenario.explore.crashes && rng() % 32 == 0) {
        auto crashable = sim.choices(scenario.explore.crashes);
        crashable.erase(crashable.begin(), crashable.begin() + static_cast<std::ptrdiff_t>(choices.size()));
        if (!crashable.empty()) {
          pick = crashable[std::uniform_int_distribution<std::size_t>(0, crashable.size() - 1)(rng)];
        }
      }
      recorder.note(sim.apply(pick));
    }
    ++report.terminal_states;
    recorder.finish(sim, sim.trail(), true);
  }
  report.schedules = scenario.explore.count;
}

}  // namespace

std::uint64_t multinomial(const std::vector<std::uint64_t>& steps) {
  unsigned __int128 result = 1;
  std::uint64_t total = 0;
  for (auto s : steps) {
    for (std::uint64_t i = 1; i <= s; ++i) {
      ++total;
      result = result * total / i;
      if (result > kSaturated) return kSaturated;
    }
  }
  return static_cast<std::uint64_t>(result);
}

ExploreReport explore(const Scenario& scenario, const ExploreOptions& options) {
  ExploreReport report;
  report.mode = scenario.explore.mode;
  auto start = std::chrono::steady_clock::now();
  if (scenario.explore.mode == ExploreMode::Random) {
    random_runs(scenario, options, report);
  } else {
    Systematic(scenario, options, report).run();
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

ReplayResult replay(const Scenario& scenario, const std::vector<Choice>& schedule) {
  Simulation sim(scenario, sim_options(scenario, true));
  for (const auto& c : schedule) sim.apply(c);
  ReplayResult r;
  r.history = sim.history().serialize();
  r.online_violation = sim.violation().empty() ? sim.timeline_violation() : sim.violation();
  r.over_budget = sim.over_budget();
  r.terminal = sim.terminal();
  r.findings = check_run(sim);
  if (!r.online_violation.empty() && r.findings.empty()) {
    auto [kind, message] = split_violation(r.online_violation);
    r.findings.push_back({kind, message});
  }
  return r;
}

PolicyRun run_policy(const Scenario& scenario, const Policy& policy, SimOptions options,
                     std::uint64_t max_steps) {
  options.record = true;
  PolicyRun run{Simulation(scenario, options), {}};
  for (std::uint64_t i = 0; i < max_steps && !run.sim.terminal(); ++i) {
    auto c = policy(run.sim);
    if (!c) break;
    run.sim.apply(*c);
  }
  run.findings = check_run(run.sim);
  return run;
}

namespace adversary {

namespace {

constexpr int kUpdateScan = 2;
constexpr int kUpdateApply = 4;
constexpr int kUpdateRetire = 5;

Choice step(std::uint32_t p) { return {ProcessId(p), false}; }

bool has_work(const ProcessView& v) { return !v.crashed && (v.busy || !v.finished); }

// Announced but not yet applied: the counter is odd and MEM is untouched.
bool parked(const ProcessView& v) {
  return v.busy && v.updating && v.update_phase >= kUpdateScan && v.update_phase <= kUpdateApply;
}

}  // namespace

Policy fresh_joiners() {
  struct State {
    std::uint32_t active = 0;
    bool injected = false;
  };
  auto st = std::make_shared<State>();
  return [st](const Simulation& sim) -> std::optional<Choice> {
    auto n = static_cast<std::uint32_t>(sim.process_count());
    auto p2 = sim.view(ProcessId(2));
    if (!p2.crashed) {
      if (parked(p2)) return Choice{ProcessId(2), true};
      return step(2);
    }
    if (st->active != 0) {
      auto j = sim.view(ProcessId(st->active));
      if (!j.joined || !j.busy || j.update_phase < kUpdateRetire) {
        if (j.joined && !j.busy && j.completed > 0) {
          st->active = 0;
        } else {
          return step(st->active);
        }
      } else {
        auto who = st->active;
        st->active = 0;
        return Choice{ProcessId(who), true};
      }
    }
    auto p1 = sim.view(ProcessId(1));
    if (p1.finished) return std::nullopt;
    bool collect_start = p1.scan_phase &&
                         (*p1.scan_phase == ScanPhase::CollectMem || *p1.scan_phase == ScanPhase::CollectAgain) &&
                         p1.scan_cursor == 0;
    if (collect_start && !st->injected) {
      for (std::uint32_t q = 3; q <= n; ++q) {
        if (!sim.view(ProcessId(q)).joined) {
          st->active = q;
          st->injected = true;
          return step(q);
        }
      }
    }
    st->injected = false;
    return step(1);
  };
}

Policy starve_lock_free() {
  struct State {
    bool injected = false;
    std::optional<std::size_t> target;
  };
  auto st = std::make_shared<State>();
  return [st](const Simulation& sim) -> std::optional<Choice> {
    auto p1 = sim.view(ProcessId(1));
    auto p2 = sim.view(ProcessId(2));
    if (st->target) {
      if (p1.completed < *st->target) return step(1);
      st->target.reset();
    }
    if (p2.finished) return std::nullopt;
    bool collect_start = p2.scan_phase && *p2.scan_phase == ScanPhase::CollectMem && p2.scan_cursor == 0;
    if (collect_start && !st->injected && has_work(p1) && !p1.busy) {
      st->injected = true;
      st->target = p1.completed + 1;
      return step(1);
    }
    st->injected = false;
    return step(2);
  };
}

Policy keep_updaters_odd() {
  struct State {
    std::optional<std::uint32_t> arranged;
    std::size_t target[2] = {0, 0};
    bool planning = false;
  };
  auto st = std::make_shared<State>();
  return [st](const Simulation& sim) -> std::optional<Choice> {
    auto scanner = sim.view(ProcessId(3));
    if (scanner.finished) return std::nullopt;
    bool boundary = !scanner.busy ||
                    (scanner.scan_phase == ScanPhase::CollectBefore && scanner.scan_cursor == 0);
    auto iteration = scanner.busy ? scanner.scan_iterations : 0;
    if (boundary && st->arranged != iteration) {
      if (!st->planning) {
        st->planning = true;
        for (std::uint32_t q = 1; q <= 2; ++q) {
          auto v = sim.view(ProcessId(q));
          st->target[q - 1] = v.completed + (parked(v) ? 1 : 0);
        }
      }
      for (std::uint32_t q = 1; q <= 2; ++q) {
        auto v = sim.view(ProcessId(q));
        if (v.completed < st->target[q - 1]) return step(q);
        if (!parked(v) && has_work(v)) return step(q);
      }
      st->planning = false;
      st->arranged = iteration;
    }
    return step(3);
  };
}

Policy defeat_help_counting() {
  struct State {
    std::optional<std::uint32_t> injected;
    std::optional<std::size_t> target;
  };
  auto st = std::make_shared<State>();
  return [st](const Simulation& sim) -> std::optional<Choice> {
    auto p1 = sim.view(ProcessId(1));
    auto p2 = sim.view(ProcessId(2));
    if (p2.finished) return std::nullopt;
    if (st->target) {
      if (p1.completed < *st->target) return step(1);
      if (has_work(p1) && !(p1.busy && p1.update_phase == kUpdateScan && p1.scan_iterations == 1 &&
                            p1.scan_phase == ScanPhase::CollectBefore && p1.scan_cursor == 0)) {
        return step(1);
      }
      st->target.reset();
    }
    // p2 announces first; p1 announces before p2's helping scan starts.
    if (!p2.busy || p2.update_phase < kUpdateScan) return step(2);
    if (!p1.busy && p1.completed == 0) return step(1);
    if (p1.busy && p1.update_phase < kUpdateScan) return step(1);
    if (p2.update_phase == kUpdateScan && p2.scan_phase == ScanPhase::CollectAgain && p2.scan_cursor == 0 &&
        st->injected != p2.scan_iterations && has_work(p1)) {
      st->injected = p2.scan_iterations;
      st->target = p1.completed + 1;
      return step(1);
    }
    return step(2);
  };
}

Policy hide_aba() {
  auto stage = std::make_shared<int>(0);
  return [stage](const Simulation& sim) -> std::optional<Choice> {
    auto p1 = sim.view(ProcessId(1));
    auto p2 = sim.view(ProcessId(2));
    auto p3 = sim.view(ProcessId(3));
    auto at = [&](ScanPhase phase, std::size_t cursor) {
      return p3.busy && !p3.updating && p3.scan_phase == phase && p3.scan_cursor == cursor;
    };
    if (p3.finished) return std::nullopt;
    switch (*stage) {
      case 0:
        if (!(p1.busy && p1.update_phase == kUpdateApply)) return step(1);
        *stage = 1;
        [[fallthrough]];
      case 1:
        if (!at(ScanPhase::CollectMem, 1)) return step(3);
        *stage = 2;
        [[fallthrough]];
      case 2:
        if (has_work(p1)) return step(1);
        *stage = 3;
        [[fallthrough]];
      case 3:
        if (!(p2.busy && p2.update_phase > kUpdateApply)) return step(2);
        *stage = 4;
        return Choice{ProcessId(2), true};
      case 4:
        if (!at(ScanPhase::CollectAgain, 0)) return step(3);
        *stage = 5;
        [[fallthrough]];
      case 5:
        if (has_work(sim.view(ProcessId(4)))) return step(4);
        *stage = 6;
        [[fallthrough]];
      case 6:
        if (!at(ScanPhase::CollectAgain, 1)) return step(3);
        *stage = 7;
        [[fallthrough]];
      case 7:
        if (has_work(sim.view(ProcessId(5)))) return step(5);
        *stage = 8;
        [[fallthrough]];
      default:
        return step(3);
    }
  };
}

namespace {

using Factory = Policy (*)();
constexpr std::pair<std::string_view, Factory> kNamed[] = {
    {"fresh-joiners", fresh_joiners},
    {"starve-lock-free", starve_lock_free},
    {"keep-updaters-odd", keep_updaters_odd},
    {"defeat-help-counting", defeat_help_counting},
    {"hide-aba", hide_aba},
};

}  // namespace

std::optional<Policy> named(std::string_view name) {
  for (const auto& [n, make] : kNamed) {
    if (n == name) return make();
  }
  return std::nullopt;
}

std::vector<std::string_view> names() {
  std::vector<std::string_view> out;
  for (const auto& [n, make] : kNamed) out.push_back(n);
  return out;
}

}  // namespace adversary

}  // namespace rmwsnap
