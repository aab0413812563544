#include "rmwsnap/stress.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <chrono>
#include <random>
#include <thread>

#include "rmwsnap/atomic_memory.hpp"
#include "rmwsnap/linearizability.hpp"

namespace rmwsnap {

namespace {

ObjectOp random_op(const ObjectType& type, std::mt19937_64& rng) {
  auto pick = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  const auto& name = type.name();
  if (name == "counter") return {pick(0, 1) ? "add" : "fetch_add", {pick(1, 3)}};
  if (name == "register") return {"write", {pick(0, 4)}};
  if (name == "max-register") return {"maxwrite", {pick(0, 20)}};
  return {"append", {pick(0, 99)}};
}

struct Record {
  Operation op;
  StepIndex invoked = 0;
  StepIndex responded = 0;
  std::optional<OpResult> result;
  HelpSlot view;
};

}  // namespace

Workload generate_workload(const Scenario& scenario, std::uint32_t threads, std::uint64_t ops,
                           std::uint64_t seed) {
  const auto& layout = *scenario.layout;
  Workload out(threads);
  for (std::uint32_t t = 0; t < threads; ++t) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), t};
    std::mt19937_64 rng(seq);
    std::bernoulli_distribution scan(scenario.stress.scan_ratio);
    std::uniform_int_distribution<std::size_t> object(0, layout.size() - 1);
    bool may_update = !is_solo(scenario.config.variant) || t == 0;
    out[t].reserve(ops);
    for (std::uint64_t i = 0; i < ops; ++i) {
      if (!may_update || scan(rng)) {
        out[t].push_back(Operation::scan());
      } else {
        auto k = object(rng);
        out[t].push_back(Operation::update(k, random_op(*layout.types[k], rng)));
      }
    }
  }
  return out;
}

std::string workload_digest(const Workload& workload) {
  std::string text;
  for (std::size_t t = 0; t < workload.size(); ++t) {
    text += "thread " + std::to_string(t + 1) + "\n";
    for (const auto& op : workload[t]) text += to_string(op) + "\n";
  }
  return fnv1a_hex(text);
}

StressReport stress(const Scenario& scenario, const StressOptions& options) {
  const auto& settings = scenario.stress;
  if (settings.threads == 0) throw ConfigError("stress needs at least one thread");
  if (settings.round_ops == 0) throw ConfigError("stress.round_ops must be positive");
  if (scenario.config.variant == Variant::Unbounded &&
      settings.threads > AtomicSharedMemory::kSegmentSize * AtomicSharedMemory::kMaxSegments) {
    throw ConfigError("too many threads for the registry");
  }

  const auto threads = settings.threads;
  auto workload = generate_workload(scenario, threads, settings.ops_per_thread, settings.seed);
  StressReport report;
  report.threads = threads;
  report.workload_digest = workload_digest(workload);

  SnapshotObject object(scenario.layout, scenario.config, threads);
  const auto rounds = (settings.ops_per_thread + settings.round_ops - 1) / settings.round_ops;
  std::vector<std::vector<ObjectState>> boundary{scenario.layout->initial};
  boundary.reserve(rounds + 1);
  auto on_round = [&]() noexcept { boundary.push_back(object.memory().quiescent_states()); };
  std::barrier sync(static_cast<std::ptrdiff_t>(threads), on_round);

  std::atomic<StepIndex> clock{1};
  std::atomic<std::uint32_t> joined{0};
  // records[t][round]
  std::vector<std::vector<std::vector<Record>>> records(threads, std::vector<std::vector<Record>>(rounds));
  std::vector<std::vector<ScanStats>> scan_stats(threads);
  std::vector<std::vector<ScanStats>> inner_stats(threads);

  auto body = [&](std::uint32_t t) {
    ProcessId self(t + 1);
    if (scenario.config.variant == Variant::Unbounded) {
      while (joined.load() != t) std::this_thread::yield();
      object.join(self);
      joined.fetch_add(1);
    }
    const auto& script = workload[t];
    for (std::uint64_t r = 0; r < rounds; ++r) {
      auto begin = r * settings.round_ops;
      auto end = std::min<std::uint64_t>(begin + settings.round_ops, script.size());
      for (auto i = begin; i < end; ++i) {
        Record rec;
        rec.op = script[i];
        rec.invoked = clock.fetch_add(1);
        if (rec.op.is_scan()) {
          ScanStats stats;
          rec.view = object.scan(self, stats);
          scan_stats[t].push_back(stats);
        } else {
          std::optional<ScanStats> inner;
          rec.result = object.update(self, rec.op.k, rec.op.op, inner);
          if (inner) inner_stats[t].push_back(*inner);
        }
        rec.responded = clock.fetch_add(1);
        records[t][r].push_back(std::move(rec));
      }
      sync.arrive_and_wait();
    }
  };

  auto start = std::chrono::steady_clock::now();
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::uint32_t t = 0; t < threads; ++t) pool.emplace_back(body, t);
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  for (std::uint32_t t = 0; t < threads; ++t) {
    for (const auto& s : scan_stats[t]) {
      ++report.scans;
      ++report.scan_iterations[s.iterations];
      ++report.return_paths[std::string(to_string(s.path))];
      auto& max = report.max_iterations["scan"];
      max = std::max(max, s.iterations);
    }
    for (const auto& s : inner_stats[t]) {
      auto& max = report.max_iterations["update-scan"];
      max = std::max(max, s.iterations);
    }
  }
  report.operations = static_cast<std::uint64_t>(threads) * settings.ops_per_thread;
  report.updates = report.operations - report.scans;
  report.throughput = report.seconds > 0 ? static_cast<double>(report.operations) / report.seconds : 0;

  SequentialSnapshotSpec spec(scenario.layout);
  for (std::uint64_t r = 0; r < rounds; ++r) {
    ++report.segments;
    std::vector<Event> events;
    for (std::uint32_t t = 0; t < threads; ++t) {
      for (const auto& rec : records[t][r]) {
        Event inv;
        inv.index = rec.invoked;
        inv.kind = EventKind::Invocation;
        inv.process = ProcessId(t + 1);
        inv.operation = rec.op;
        Event res = inv;
        res.index = rec.responded;
        res.kind = EventKind::Response;
        res.result = rec.result;
        res.view = rec.view;
        events.push_back(std::move(inv));
        events.push_back(std::move(res));
      }
    }
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.index < b.index; });
    History history(boundary[r]);
    for (auto& e : events) history.append(std::move(e));

    CheckOptions check;
    check.final_state = boundary[r + 1];
    check.node_budget = options.node_budget;
    check.minimize = false;
    auto verdict = check_linearizable(history, spec, check);
    if (verdict.verdict == Verdict::Unknown) {
      ++report.segments_skipped;
      continue;
    }
    ++report.segments_checked;
    if (verdict.verdict == Verdict::Violation) {
      ++report.violations;
      if (report.counterexamples.size() < options.max_counterexamples) {
        report.counterexamples.push_back({r, verdict.message, history.serialize()});
      }
    }
  }
  return report;
}

}  // namespace rmwsnap
