#include "rmwsnap/simulator.hpp"

#include <algorithm>

namespace rmwsnap {

std::string to_string(const Choice& choice) {
  return (choice.crash ? "x" : "") + std::to_string(choice.process.index());
}

Choice parse_choice(const std::string& text) {
  Choice c;
  std::string_view digits = text;
  if (!digits.empty() && digits.front() == 'x') {
    c.crash = true;
    digits.remove_prefix(1);
  }
  if (digits.empty() || digits.size() > 9 ||
      !std::all_of(digits.begin(), digits.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
    throw ConfigError("bad schedule choice '" + text + "'");
  }
  auto v = std::stoul(std::string(digits));
  if (v == 0) throw ConfigError("bad schedule choice '" + text + "'");
  c.process = ProcessId(static_cast<std::uint32_t>(v));
  return c;
}

class SimAccess final : public SharedAccess {
 public:
  SimAccess(Simulation& sim, ProcessId who) : sim_(sim), who_(who) {}

  Counter read_counter(std::size_t slot) override {
    auto v = slot < sim_.counters_.size() ? sim_.counters_[slot] : Counter{-1};
    step(Access::ReadCounter, slot, [&](Event& e) { e.value = v; });
    return v;
  }

  void write_counter(std::size_t slot, Counter value) override {
    if (slot >= sim_.counters_.size()) sim_.counters_.resize(slot + 1, -1);
    sim_.counters_[slot] = value;
    step(Access::WriteCounter, slot, [&](Event& e) { e.value = value; });
  }

  HelpSlot read_help(std::size_t slot) override {
    HelpSlot v = slot < sim_.help_.size() ? sim_.help_[slot] : nullptr;
    step(Access::ReadHelp, slot, [&](Event& e) { e.help = v; });
    return v;
  }

  void write_help(std::size_t slot, HelpSlot view) override {
    if (slot >= sim_.help_.size()) sim_.help_.resize(slot + 1);
    sim_.help_[slot] = view;
    step(Access::WriteHelp, slot, [&](Event& e) { e.help = view; });
  }

  ObjectState read_object(std::size_t k) override {
    auto v = sim_.mem_[k];
    step(Access::ReadObject, k, [&](Event& e) { e.state = v; });
    return v;
  }

  OpResult apply_object(std::size_t k, const ObjectOp& op) override {
    const auto& type = sim_.scenario().layout->types[k];
    auto [next, result] = type->apply(sim_.mem_[k], op);
    sim_.mem_[k] = next;
    ++sim_.procs_[who_.slot()].mutations;
    step(Access::ApplyObject, k, [&](Event& e) {
      e.op = op;
      e.value = result;
      e.state = next;
    });
    sim_.note_mutation();
    return result;
  }

  StepIndex now() const override { return sim_.index_; }

 private:
  template <class Fill>
  void step(Access access, std::size_t target, Fill fill) {
    ++sim_.index_;
    if (!sim_.options_.record) return;
    Event e;
    e.index = sim_.index_;
    e.kind = EventKind::Step;
    e.process = who_;
    e.access = access;
    e.target = target;
    fill(e);
    sim_.history_.append(std::move(e));
  }

  Simulation& sim_;
  ProcessId who_;
};

namespace {

std::size_t context_processes(const Scenario& s) {
  switch (s.config.variant) {
    case Variant::Unbounded:
      return 0;
    case Variant::SoloLockFree:
    case Variant::SoloWaitFree:
      return 1;
    default:
      return s.processes.size();
  }
}

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

// The scan currently running inside a machine, top-level or helping.
template <class Fn>
void with_scan(const Machine& m, Fn fn) {
  std::visit(Overloaded{
                 [&](const SoloScan& s) { fn(s.phase(), std::size_t{0}, s.stats()); },
                 [&](const ConcurrentScan& s) { fn(s.phase(), s.cursor(), s.stats()); },
                 [&](const UnboundedScan& s) { fn(s.phase(), s.cursor(), s.stats()); },
                 [&](const ConcurrentUpdate& u) {
                   if (u.phase() == ConcurrentUpdate::Phase::Scan) {
                     fn(u.scan()->phase(), u.scan()->cursor(), u.scan()->stats());
                   }
                 },
                 [&](const UnboundedUpdate& u) {
                   if (u.phase() == UnboundedUpdate::Phase::Scan) {
                     fn(u.scan()->phase(), u.scan()->cursor(), u.scan()->stats());
                   }
                 },
                 [](const auto&) {},
             },
             m);
}

bool machine_done(const Machine& m) {
  return std::visit(Overloaded{[](const std::monostate&) { return false; },
                               [](const auto& x) { return x.done(); }},
                    m);
}

}  // namespace

Simulation::Simulation(const Scenario& scenario, SimOptions options) : options_(options) {
  auto copy = std::make_shared<const Scenario>(scenario);
  shared_ = std::make_shared<const Shared>(
      Shared{copy,
             MachineContext(scenario.config, context_processes(scenario), scenario.objects(),
                            scenario.processes.size()),
             SequentialSnapshotSpec(scenario.layout)});
  const auto n = scenario.processes.size();
  procs_.resize(n);
  mem_ = scenario.layout->initial;
  history_ = History(mem_);
  tracker_.seen.resize(n);
  if (options_.monitor) monitor_.emplace(shared_->spec, n);

  if (scenario.config.variant == Variant::Unbounded) {
    for (std::size_t i = 0; i < n; ++i) {
      auto p = ProcessId::from_slot(i);
      procs_[i].joined = !scenario.processes[i].late_join;
      if (procs_[i].joined) {
        SimAccess access(*this, p);
        Join(p).step(access);
      }
    }
  } else {
    auto slots = context_processes(scenario);
    counters_.assign(slots, 0);
    help_.assign(slots, nullptr);
  }
}

bool Simulation::enabled(ProcessId p) const {
  if (!p.valid() || p.slot() >= procs_.size()) return false;
  const auto& proc = procs_[p.slot()];
  if (proc.crashed) return false;
  if (!proc.joined) {
    for (std::size_t i = 0; i < p.slot(); ++i) {
      if (!procs_[i].joined) return false;
    }
    return true;
  }
  return !std::holds_alternative<std::monostate>(proc.machine) ||
         proc.next_op < scenario().processes[p.slot()].ops.size();
}

std::vector<Choice> Simulation::choices(std::uint32_t crash_budget) const {
  std::vector<Choice> out;
  if (over_budget_ || !violation_.empty()) return out;
  for (std::size_t i = 0; i < procs_.size(); ++i) {
    auto p = ProcessId::from_slot(i);
    if (enabled(p)) out.push_back({p, false});
  }
  if (crashes_ < crash_budget) {
    auto steps = out.size();
    for (std::size_t i = 0; i < steps; ++i) {
      if (procs_[out[i].process.slot()].joined) out.push_back({out[i].process, true});
    }
  }
  return out;
}

bool Simulation::terminal() const {
  if (over_budget_ || !violation_.empty()) return true;
  for (std::size_t i = 0; i < procs_.size(); ++i) {
    if (enabled(ProcessId::from_slot(i))) return false;
  }
  return true;
}

Machine Simulation::start_operation(ProcessId p, const Operation& op) const {
  const auto& ctx = shared_->context;
  switch (scenario().config.variant) {
    case Variant::SoloLockFree:
    case Variant::SoloWaitFree:
      if (op.is_scan()) return SoloScan(ctx, p);
      return SoloUpdate(ctx, p, op.k, op.op);
    case Variant::Unbounded:
      if (op.is_scan()) return UnboundedScan(ctx, p);
      return UnboundedUpdate(ctx, p, op.k, op.op);
    default:
      if (op.is_scan()) return ConcurrentScan(ctx, p);
      return ConcurrentUpdate(ctx, p, op.k, op.op);
  }
}

void Simulation::emit(Event e) {
  if (options_.record) history_.append(std::move(e));
}

void Simulation::flag(std::string why) {
  if (why.starts_with("timeline")) {
    if (timeline_.empty()) timeline_ = std::move(why);
    return;
  }
  if (violation_.empty()) violation_ = std::move(why);
}

void Simulation::note_mutation() {
  if (!options_.monitor) return;
  for (auto& seen : tracker_.seen) {
    if (seen.empty()) continue;
    auto it = std::lower_bound(seen.begin(), seen.end(), mem_);
    if (it == seen.end() || *it != mem_) seen.insert(it, mem_);
  }
}

StepOutcome Simulation::apply(const Choice& choice) {
  if (!enabled(choice.process) || over_budget_ || !violation_.empty()) {
    throw ConfigError("schedule choice " + to_string(choice) + " is not available at step " +
                      std::to_string(trail_.size() + 1));
  }
  auto p = choice.process;
  auto& proc = procs_[p.slot()];
  if (options_.record) trail_.push_back(choice);
  StepOutcome out;
  if (choice.crash) {
    if (!proc.joined) throw ConfigError("p" + std::to_string(p.index()) + " cannot crash before joining");
    proc.crashed = true;
    ++crashes_;
    return out;
  }

  SimAccess access(*this, p);
  if (!proc.joined) {
    Join(p).step(access);
    proc.joined = true;
    return out;
  }

  if (std::holds_alternative<std::monostate>(proc.machine)) {
    const auto& op = scenario().processes[p.slot()].ops[proc.next_op];
    proc.op_id = next_op_id_++;
    Event inv;
    inv.index = ++index_;
    inv.kind = EventKind::Invocation;
    inv.process = p;
    inv.operation = op;
    emit(std::move(inv));
    if (monitor_) monitor_->invoke(p, op);
    if (options_.monitor && op.is_scan()) tracker_.seen[p.slot()] = {mem_};
    proc.mutations = 0;
    proc.inner_started = false;
    proc.scan_begin = index_;
    proc.machine = start_operation(p, op);
  }

  std::visit(Overloaded{[](std::monostate&) {},
                        [&](auto& m) { m.step(access); }},
             proc.machine);

  // Helping scans of concurrent and unbounded updates.
  auto track_inner = [&](const auto& u, auto scan_phase, auto publish_phase) {
    if (u.phase() == scan_phase && !proc.inner_started) {
      proc.inner_started = true;
      proc.scan_begin = index_;
    } else if (u.phase() == publish_phase && proc.inner_started) {
      proc.inner_started = false;
      const auto& s = *u.scan();
      out.was_scan = true;
      out.top_level = false;
      out.iterations = s.stats().iterations;
      out.path = s.stats().path;
      out.completed = true;
      if (options_.record) {
        scans_.push_back(ScanRecord{p, false, proc.op_id, proc.scan_begin, index_, s.stats(), s.result()});
      }
    }
  };
  if (auto* u = std::get_if<ConcurrentUpdate>(&proc.machine)) {
    track_inner(*u, ConcurrentUpdate::Phase::Scan, ConcurrentUpdate::Phase::PublishHelp);
  } else if (auto* u = std::get_if<UnboundedUpdate>(&proc.machine)) {
    track_inner(*u, UnboundedUpdate::Phase::Scan, UnboundedUpdate::Phase::PublishHelp);
  }

  with_scan(proc.machine, [&](ScanPhase, std::size_t, const ScanStats& stats) {
    if (stats.iterations > options_.iteration_budget) over_budget_ = true;
  });

  if (machine_done(proc.machine)) finish_operation(p, out);
  return out;
}

void Simulation::finish_operation(ProcessId p, StepOutcome& out) {
  auto& proc = procs_[p.slot()];
  const auto& op = scenario().processes[p.slot()].ops[proc.next_op];
  Event res;
  res.index = ++index_;
  res.kind = EventKind::Response;
  res.process = p;
  res.operation = op;

  std::visit(Overloaded{
                 [](const std::monostate&) {},
                 [](const Join&) {},
                 [&](const auto& m) {
                   if constexpr (requires { m.stats(); }) {
                     res.view = m.result();
                     out.completed = true;
                     out.was_scan = true;
                     out.top_level = true;
                     out.iterations = m.stats().iterations;
                     out.path = m.stats().path;
                     if (options_.record) {
                       scans_.push_back(ScanRecord{p, true, proc.op_id, proc.scan_begin, index_ - 1,
                                                   m.stats(), m.result()});
                     }
                   } else {
                     res.result = m.result();
                   }
                 },
             },
             proc.machine);

  if (options_.monitor) {
    if (op.is_scan()) {
      auto& seen = tracker_.seen[p.slot()];
      bool found = res.view && std::binary_search(seen.begin(), seen.end(),
                                                  std::vector<ObjectState>(res.view->states().begin(),
                                                                           res.view->states().end()));
      if (!found) {
        flag("timeline: p" + std::to_string(p.index()) + " scan returned " + to_string(res.view) +
             ", which MEM never held during the scan");
      }
      seen.clear();
    } else if (proc.mutations != 1) {
      flag("timeline: p" + std::to_string(p.index()) + " update mutated MEM " +
           std::to_string(proc.mutations) + " times");
    }
    if (monitor_ && !monitor_->respond(p, res.result, res.view)) {
      flag("linearizability: no linearization explains p" + std::to_string(p.index()) + "'s " +
           to_string(op) + " response at index " + std::to_string(res.index));
    }
  }
  emit(std::move(res));
  proc.machine = std::monostate{};
  ++proc.next_op;
}

ProcessView Simulation::view(ProcessId p) const {
  ProcessView v;
  const auto& proc = procs_.at(p.slot());
  v.joined = proc.joined;
  v.crashed = proc.crashed;
  v.completed = proc.next_op;
  v.busy = !std::holds_alternative<std::monostate>(proc.machine);
  v.finished = proc.joined && !v.busy && proc.next_op >= scenario().processes[p.slot()].ops.size();
  std::visit(Overloaded{[&](const SoloUpdate& u) {
                          v.updating = true;
                          v.update_phase = static_cast<int>(u.phase());
                        },
                        [&](const ConcurrentUpdate& u) {
                          v.updating = true;
                          v.update_phase = static_cast<int>(u.phase());
                        },
                        [&](const UnboundedUpdate& u) {
                          v.updating = true;
                          v.update_phase = static_cast<int>(u.phase());
                        },
                        [](const auto&) {}},
             proc.machine);
  with_scan(proc.machine, [&](ScanPhase phase, std::size_t cursor, const ScanStats& stats) {
    v.scan_phase = phase;
    v.scan_cursor = cursor;
    v.scan_iterations = stats.iterations;
  });
  return v;
}

void Simulation::encode(StateWriter& out) const {
  for (std::size_t i = 0; i < procs_.size(); ++i) {
    const auto& proc = procs_[i];
    out.put(proc.next_op);
    out.put((proc.joined ? 1u : 0u) | (proc.crashed ? 2u : 0u));
    out.put(proc.machine.index());
    std::visit(Overloaded{[](const std::monostate&) {}, [&](const auto& m) { m.encode(out); }},
               proc.machine);
    out.put(proc.mutations);
    const auto& seen = tracker_.seen[i];
    out.put(seen.size());
    for (const auto& s : seen) out.put(std::span<const ObjectState>(s));
  }
  out.put(std::span<const Counter>(counters_));
  out.put(help_.size());
  for (const auto& h : help_) out.put(h);
  out.put(std::span<const ObjectState>(mem_));
  out.put(crashes_);
  out.put((over_budget_ ? 1u : 0u) | (violation_.empty() ? 0u : 2u) | (timeline_.empty() ? 0u : 4u));
  if (monitor_) monitor_->encode(out);
}

std::vector<RunFinding> check_run(const Simulation& sim) {
  std::vector<RunFinding> found;
  const auto& h = sim.history();
  auto cv = cross_validate(h, sim.spec());
  if (!cv.timeline.pass) found.push_back({"timeline", cv.timeline.message});
  if (cv.checker.verdict == Verdict::Violation) found.push_back({"linearizability", cv.checker.message});
  if (cv.checker.verdict == Verdict::Unknown) found.push_back({"disagreement", "checker gave up"});
  if (!cv.agree) found.push_back({"disagreement", "timeline oracle passed but the checker did not"});
  if (cv.timeline.pass == !sim.timeline_violation().empty()) {
    found.push_back({"disagreement", "online timeline tracker and offline oracle differ" +
                                         (sim.timeline_violation().empty() ? std::string() : ": " + sim.timeline_violation())});
  }
  if (cv.checker.verdict != Verdict::Unknown && cv.checker.linearizable() == !sim.violation().empty()) {
    found.push_back({"disagreement", "online monitor and offline checker differ" +
                                         (sim.violation().empty() ? std::string() : ": " + sim.violation())});
  }

  const auto& muts = h.mutations();
  auto inside = [&](const CollectWindow& w) {
    return std::count_if(muts.begin(), muts.end(),
                         [&](const Mutation& m) { return m.index > w.first && m.index < w.last; });
  };
  std::vector<OperationRecord> ops;
  for (const auto& s : sim.scans()) {
    auto who = "p" + std::to_string(s.process.index()) + (s.top_level ? " scan" : " update scan");
    switch (s.stats.path) {
      case ReturnPath::Quiet:
        if (inside(s.stats.windows.back()) > 1) {
          found.push_back({"collect-window", who + " returned a quiet collect overlapped by several mutations"});
        }
        break;
      case ReturnPath::Repeated:
        if (std::none_of(s.stats.windows.begin(), s.stats.windows.end(),
                         [&](const CollectWindow& w) { return inside(w) <= 1; })) {
          found.push_back({"collect-window", who + " returned repeated collects each overlapped by several mutations"});
        }
        break;
      case ReturnPath::Borrowed:
      case ReturnPath::BorrowedJoiner: {
        if (!s.result) {
          found.push_back({"borrowed-bottom", who + " borrowed an absent view"});
          break;
        }
        const auto& meta = s.result->meta();
        if (meta.first_read <= s.begin || meta.last_read >= s.stats.help_read) {
          found.push_back({"nesting", who + " borrowed a view collected outside its interval"});
        }
        if (s.stats.path == ReturnPath::BorrowedJoiner) {
          if (ops.empty()) ops = h.operations();
          for (const auto& op : ops) {
            if (op.process == s.stats.helper && !op.operation.is_scan() &&
                op.invoked < s.stats.help_read && op.invoked <= s.begin) {
              found.push_back({"nesting", who + " borrowed from a joiner whose update began before the scan"});
              break;
            }
          }
        }
        break;
      }
      case ReturnPath::None:
        break;
    }
  }
  return found;
}

}  // namespace rmwsnap
