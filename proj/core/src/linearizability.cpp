#include "rmwsnap/linearizability.hpp"

#include <algorithm>
#include <limits>
#include <unordered_set>

namespace rmwsnap {

OpResult SequentialSnapshotSpec::apply_update(std::vector<ObjectState>& state,
                                              const Operation& op) const {
  auto [next, result] = layout_->types.at(op.k)->apply(state[op.k], op.op);
  state[op.k] = std::move(next);
  return result;
}

bool SequentialSnapshotSpec::step(std::vector<ObjectState>& state, const OperationRecord& op) const {
  if (op.operation.is_scan()) {
    if (op.pending()) return true;
    if (!op.view) return false;
    auto view = op.view->states();
    return std::equal(view.begin(), view.end(), state.begin(), state.end());
  }
  auto result = apply_update(state, op.operation);
  return op.pending() || !op.result || *op.result == result;
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Linearizable:
      return "linearizable";
    case Verdict::Violation:
      return "violation";
    case Verdict::Unknown:
      return "unknown";
  }
  return "?";
}

namespace {

constexpr StepIndex kNever = std::numeric_limits<StepIndex>::max();

class Search {
 public:
  Search(const std::vector<OperationRecord>& ops, const SequentialSnapshotSpec& spec,
         const CheckOptions& options)
      : ops_(ops), spec_(spec), options_(options), done_(ops.size(), false) {
    for (const auto& op : ops_) {
      if (!op.pending()) ++completed_left_;
    }
  }

  Verdict run(std::vector<ObjectState> state) {
    auto found = dfs(state);
    if (aborted_) return Verdict::Unknown;
    return found ? Verdict::Linearizable : Verdict::Violation;
  }

  const std::vector<std::size_t>& witness() const { return path_; }
  std::uint64_t nodes() const { return nodes_; }

 private:
  bool accepted(const std::vector<ObjectState>& state) const {
    return completed_left_ == 0 && (!options_.final_state || *options_.final_state == state);
  }

  std::string key(const std::vector<ObjectState>& state) const {
    StateWriter w;
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < done_.size(); ++i) {
      if (done_[i]) word |= std::uint64_t{1} << (i % 64);
      if (i % 64 == 63 || i + 1 == done_.size()) {
        w.put(word);
        word = 0;
      }
    }
    w.put(std::span<const ObjectState>(state));
    return w.bytes();
  }

  bool dfs(const std::vector<ObjectState>& state) {
    if (accepted(state)) return true;
    if (++nodes_ > options_.node_budget) {
      aborted_ = true;
      return false;
    }
    if (!seen_.insert(key(state)).second) return false;

    StepIndex horizon = kNever;
    for (std::size_t i = 0; i < ops_.size(); ++i) {
      if (!done_[i] && !ops_[i].pending()) horizon = std::min(horizon, *ops_[i].responded);
    }
    for (std::size_t i = 0; i < ops_.size(); ++i) {
      if (done_[i] || ops_[i].invoked > horizon) continue;
      auto next = state;
      if (!spec_.step(next, ops_[i])) continue;
      done_[i] = true;
      if (!ops_[i].pending()) --completed_left_;
      path_.push_back(ops_[i].id);
      if (dfs(next)) return true;
      path_.pop_back();
      if (!ops_[i].pending()) ++completed_left_;
      done_[i] = false;
      if (aborted_) return false;
    }
    return false;
  }

  const std::vector<OperationRecord>& ops_;
  const SequentialSnapshotSpec& spec_;
  const CheckOptions& options_;
  std::vector<bool> done_;
  std::size_t completed_left_ = 0;
  std::vector<std::size_t> path_;
  std::unordered_set<std::string> seen_;
  std::uint64_t nodes_ = 0;
  bool aborted_ = false;
};

LinearizabilityResult search(const History& history, const SequentialSnapshotSpec& spec,
                             const CheckOptions& options) {
  auto ops = history.operations();
  if (history.initial().size() != spec.layout().size()) {
    throw std::invalid_argument("history initial state does not match the memory layout");
  }
  Search s(ops, spec, options);
  LinearizabilityResult r;
  r.verdict = s.run(history.initial());
  r.nodes = s.nodes();
  if (r.verdict == Verdict::Linearizable) r.witness = s.witness();
  return r;
}

}  // namespace

LinearizabilityResult check_linearizable(const History& history, const SequentialSnapshotSpec& spec,
                                         const CheckOptions& options) {
  auto r = search(history, spec, options);
  if (r.verdict != Verdict::Violation) return r;
  r.violating_prefix = history.events().size();
  if (options.minimize && !options.final_state) {
    // Non-linearizability is preserved by extension, so the shortest
    // violating prefix can be found by bisection.
    CheckOptions inner = options;
    inner.minimize = false;
    std::size_t lo = 0;
    std::size_t hi = history.events().size();
    while (hi - lo > 1) {
      auto mid = lo + (hi - lo) / 2;
      auto sub = search(history.prefix(mid), spec, inner);
      if (sub.verdict == Verdict::Violation) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    r.violating_prefix = hi;
  }
  const auto& last = history.events()[r.violating_prefix - 1];
  r.message = "no linearization explains the first " + std::to_string(r.violating_prefix) +
              " events (up to index " + std::to_string(last.index) + ")";
  return r;
}

TimelineResult timeline_oracle_check(const History& history, const SequentialSnapshotSpec& spec) {
  auto ops = history.operations();
  const auto& muts = history.mutations();
  TimelineResult r;
  auto fail = [&](const OperationRecord& op, std::string why) {
    r.pass = false;
    r.operation = op.id;
    r.from = op.invoked;
    r.to = op.responded.value_or(kNever);
    r.message = "p" + std::to_string(op.process.index()) + " " + to_string(op.operation) + ": " + why;
    return r;
  };

  std::vector<bool> owned(muts.size(), false);
  for (const auto& op : ops) {
    auto end = op.responded.value_or(kNever);
    if (op.operation.is_scan()) {
      if (op.pending()) continue;
      if (!op.view) return fail(op, "returned bottom");
      auto state = history.state_at(op.invoked);
      auto view = op.view->states();
      bool matched = std::equal(view.begin(), view.end(), state.begin(), state.end());
      for (const auto& m : muts) {
        if (matched || m.index >= end) break;
        if (m.index <= op.invoked) continue;
        state[m.k] = m.after;
        matched = std::equal(view.begin(), view.end(), state.begin(), state.end());
      }
      if (!matched) return fail(op, "view " + to_string(op.view) + " matches no state in its interval");
      continue;
    }
    std::size_t count = 0;
    const Mutation* mine = nullptr;
    for (std::size_t i = 0; i < muts.size(); ++i) {
      const auto& m = muts[i];
      if (m.process != op.process || m.index <= op.invoked || m.index >= end) continue;
      ++count;
      owned[i] = true;
      mine = &m;
    }
    if (count > 1 || (count == 0 && !op.pending())) {
      return fail(op, std::to_string(count) + " mutations in its interval");
    }
    if (!mine) continue;
    if (mine->k != op.operation.k || !(mine->op == op.operation.op)) {
      return fail(op, "mutation does not match the operation");
    }
    auto [expected, result] = spec.layout().types.at(mine->k)->apply(mine->before, mine->op);
    if (!(expected == mine->after) || result != mine->result) {
      return fail(op, "mutation is not the object's transition");
    }
    if (op.result && *op.result != mine->result) return fail(op, "result differs from the mutation");
  }
  for (std::size_t i = 0; i < muts.size(); ++i) {
    if (!owned[i]) {
      r.pass = false;
      r.from = r.to = muts[i].index;
      r.message = "mutation at index " + std::to_string(muts[i].index) + " belongs to no update";
      return r;
    }
  }
  return r;
}

CrossValidation cross_validate(const History& history, const SequentialSnapshotSpec& spec) {
  CrossValidation out;
  out.timeline = timeline_oracle_check(history, spec);
  out.checker = check_linearizable(history, spec);
  out.agree = !(out.timeline.pass && !out.checker.linearizable());
  return out;
}

LinearizabilityMonitor::LinearizabilityMonitor(const SequentialSnapshotSpec& spec,
                                               std::size_t max_processes)
    : spec_(&spec), pending_(max_processes) {
  configs_.push_back(Config{spec.initial(), std::vector<Outcome>(max_processes)});
}

void LinearizabilityMonitor::invoke(ProcessId p, const Operation& op) {
  auto slot = p.slot();
  if (slot >= pending_.size()) {
    pending_.resize(slot + 1);
    for (auto& c : configs_) c.procs.resize(slot + 1);
  }
  pending_[slot] = op;
  for (auto& c : configs_) c.procs[slot] = Outcome{1, 0, {}};
}

void LinearizabilityMonitor::linearize(Config& c, std::size_t slot) const {
  auto& o = c.procs[slot];
  const auto& op = pending_[slot];
  o.status = 2;
  if (op.is_scan()) {
    o.view = c.state;
  } else {
    o.result = spec_->apply_update(c.state, op);
  }
}

bool LinearizabilityMonitor::respond(ProcessId p, const std::optional<OpResult>& result,
                                     const HelpSlot& view) {
  auto slot = p.slot();
  auto matches = [&](const Outcome& o) {
    if (pending_[slot].is_scan()) {
      if (!view) return false;
      auto v = view->states();
      return std::equal(v.begin(), v.end(), o.view.begin(), o.view.end());
    }
    return !result || *result == o.result;
  };

  std::vector<Config> next;
  for (const auto& c : configs_) {
    if (c.procs[slot].status == 2) {
      if (matches(c.procs[slot])) {
        next.push_back(c);
        next.back().procs[slot] = Outcome{};
      }
      continue;
    }
    // Every way of first linearizing other pending operations, then p's.
    std::vector<Config> frontier{c};
    std::vector<Config> reached{c};
    while (!frontier.empty()) {
      std::vector<Config> grown;
      for (const auto& f : frontier) {
        for (std::size_t q = 0; q < f.procs.size(); ++q) {
          if (q == slot || f.procs[q].status != 1) continue;
          auto g = f;
          linearize(g, q);
          grown.push_back(std::move(g));
        }
      }
      std::sort(grown.begin(), grown.end());
      grown.erase(std::unique(grown.begin(), grown.end()), grown.end());
      reached.insert(reached.end(), grown.begin(), grown.end());
      frontier = std::move(grown);
    }
    for (auto& r : reached) {
      linearize(r, slot);
      if (!matches(r.procs[slot])) continue;
      r.procs[slot] = Outcome{};
      next.push_back(std::move(r));
    }
  }
  std::sort(next.begin(), next.end());
  next.erase(std::unique(next.begin(), next.end()), next.end());
  configs_ = std::move(next);
  return ok();
}

void LinearizabilityMonitor::encode(StateWriter& out) const {
  out.put(configs_.size());
  for (const auto& c : configs_) {
    out.put(std::span<const ObjectState>(c.state));
    for (const auto& o : c.procs) {
      out.put(static_cast<std::uint64_t>(o.status));
      if (o.status != 2) continue;
      out.put_signed(o.result);
      out.put(std::span<const ObjectState>(o.view));
    }
  }
}

}  // namespace rmwsnap
