#include "rmwsnap/unbounded.hpp"

#include <algorithm>

namespace rmwsnap {

bool check_quiet_condition_unbounded(const ParticipantCollect& before,
                                     const ParticipantCollect& after) {
  for (const auto& [id, value] : before.pairs()) {
    if (after[id] - value > 1) return false;
  }
  for (const auto& [id, value] : after.pairs()) {
    if (!before.contains(id) && value > 2) return false;
  }
  return true;
}

std::size_t compute_modifier_bound_unbounded(const ParticipantCollect& before,
                                             const ParticipantCollect& after,
                                             const std::function<bool(ProcessId)>& help_absent) {
  std::size_t still = 0;
  for (const auto& [id, value] : before.pairs()) {
    if (after[id] == value && value % 2 == 0) ++still;
  }
  std::size_t idle_joiners = 0;
  for (const auto& [id, value] : after.pairs()) {
    if (!before.contains(id) && help_absent(id)) ++idle_joiners;
  }
  return after.size() - still - idle_joiners;
}

Counter MoveCounts::operator[](ProcessId id) const {
  return id.slot() < counts_.size() ? counts_[id.slot()] : 0;
}

void MoveCounts::add(ProcessId id, Counter delta) {
  if (id.slot() >= counts_.size()) counts_.resize(id.slot() + 1, 0);
  counts_[id.slot()] += delta;
}

void update_moves_unbounded(MoveCounts& moves, const ParticipantCollect& before,
                            const ParticipantCollect& after) {
  for (const auto& [id, value] : after.pairs()) {
    moves.add(id, before.contains(id) ? value - before[id] : value);
  }
}

StepStatus Join::step(SharedAccess& shared) {
  shared.write_counter(self_.slot(), 0);
  done_ = true;
  return StepStatus::Done;
}

UnboundedScan::UnboundedScan(const MachineContext& ctx, ProcessId self) : ctx_(&ctx), self_(self) {
  begin_iteration();
}

void UnboundedScan::begin_iteration() { check_help_from(0); }

void UnboundedScan::check_help_from(std::size_t index) {
  auto threshold = ctx_->config().help_threshold();
  auto pairs = curr_.pairs();
  for (std::size_t i = index; i < pairs.size(); ++i) {
    auto id = pairs[i].first;
    if (moves_[id] >= threshold) {
      helper_ = id;
      probing_ = false;
      probe_index_ = i;
      phase_ = ScanPhase::ReadHelp;
      return;
    }
    if (!init_.contains(id)) {
      helper_ = id;
      probing_ = true;
      probe_index_ = i;
      phase_ = ScanPhase::ProbeHelp;
      return;
    }
  }
  ++stats_.iterations;
  stats_.windows.clear();
  again_.clear();
  after_.clear();
  final_.clear();
  start_collect(ScanPhase::CollectBefore);
}

void UnboundedScan::start_collect(ScanPhase phase) {
  cursor_ = 0;
  phase_ = phase;
  switch (phase) {
    case ScanPhase::CollectBefore:
      before_.clear();
      break;
    case ScanPhase::CollectAfter:
      after_.clear();
      break;
    case ScanPhase::CollectFinal:
      final_.clear();
      break;
    case ScanPhase::CollectMem:
      view_.assign(ctx_->objects(), ObjectState{});
      break;
    case ScanPhase::CollectAgain:
      again_.assign(ctx_->objects(), ObjectState{});
      break;
    default:
      break;
  }
}

void UnboundedScan::after_counters_read() {
  if (init_.empty()) init_ = before_;
  bool quiet = ctx_->config().mutant == Mutant::SkipJoinerClause
                   ? std::all_of(before_.pairs().begin(), before_.pairs().end(),
                                 [&](const auto& p) { return after_[p.first] - p.second <= 1; })
                   : check_quiet_condition_unbounded(before_, after_);
  if (!quiet) {
    end_iteration();
    return;
  }
  absent_joiners_.clear();
  probe_joiners_from(0);
}

void UnboundedScan::probe_joiners_from(std::size_t index) {
  auto pairs = after_.pairs();
  for (std::size_t i = index; i < pairs.size(); ++i) {
    if (!before_.contains(pairs[i].first)) {
      probe_index_ = i;
      phase_ = ScanPhase::ProbeJoiners;
      return;
    }
  }
  decide_after_probe();
}

void UnboundedScan::decide_after_probe() {
  // Help slots of new participants were read one step at a time while probing.
  auto bound = compute_modifier_bound_unbounded(before_, after_, [this](ProcessId id) {
    return std::find(absent_joiners_.begin(), absent_joiners_.end(), id) != absent_joiners_.end();
  });
  if (bound <= 1) {
    finish_with_view(ReturnPath::Quiet);
    return;
  }
  extra_left_ = bound / 2;
  start_collect(ScanPhase::CollectAgain);
}

void UnboundedScan::end_iteration() {
  update_moves_unbounded(moves_, before_, after_);
  curr_ = after_;
  begin_iteration();
}

void UnboundedScan::finish_with_view(ReturnPath path) {
  auto first = stats_.windows.front().first;
  auto last = stats_.windows.back().last;
  result_ = std::make_shared<const SnapshotView>(std::move(view_),
                                                 ViewProvenance{self_, first, last});
  stats_.path = path;
  phase_ = ScanPhase::Done;
}

StepStatus UnboundedScan::step(SharedAccess& shared) {
  ++stats_.steps;
  switch (phase_) {
    case ScanPhase::ReadHelp:
      result_ = shared.read_help(helper_.slot());
      stats_.helper = helper_;
      stats_.help_read = shared.now();
      stats_.path = ReturnPath::Borrowed;
      phase_ = ScanPhase::Done;
      break;

    case ScanPhase::ProbeHelp: {
      auto view = shared.read_help(helper_.slot());
      if (view) {
        result_ = std::move(view);
        stats_.helper = helper_;
        stats_.help_read = shared.now();
        stats_.path = ReturnPath::BorrowedJoiner;
        phase_ = ScanPhase::Done;
      } else {
        check_help_from(probe_index_ + 1);
      }
      break;
    }

    case ScanPhase::CollectBefore:
    case ScanPhase::CollectAfter:
    case ScanPhase::CollectFinal: {
      auto& target = phase_ == ScanPhase::CollectBefore  ? before_
                     : phase_ == ScanPhase::CollectAfter ? after_
                                                         : final_;
      auto value = shared.read_counter(cursor_);
      if (value >= 0) {
        target.add(ProcessId::from_slot(cursor_), value);
        ++cursor_;
        break;
      }
      if (phase_ == ScanPhase::CollectBefore) {
        start_collect(ScanPhase::CollectMem);
      } else if (phase_ == ScanPhase::CollectAfter) {
        after_counters_read();
      } else if (final_ == after_) {
        finish_with_view(ReturnPath::Repeated);
      } else {
        after_ = final_;
        end_iteration();
      }
      break;
    }

    case ScanPhase::CollectMem:
    case ScanPhase::CollectAgain: {
      auto order = ctx_->mem_order(self_);
      auto& target = phase_ == ScanPhase::CollectMem ? view_ : again_;
      auto k = order[cursor_];
      target[k] = shared.read_object(k);
      if (cursor_ == 0) window_.first = shared.now();
      if (++cursor_ < order.size()) break;
      window_.last = shared.now();
      if (phase_ == ScanPhase::CollectMem) {
        stats_.windows.push_back(window_);
        start_collect(ScanPhase::CollectAfter);
        break;
      }
      if (again_ != view_) {
        end_iteration();
        break;
      }
      stats_.windows.push_back(window_);
      if (--extra_left_ > 0) {
        start_collect(ScanPhase::CollectAgain);
      } else if (ctx_->config().mutant == Mutant::DropThirdCollect) {
        finish_with_view(ReturnPath::Repeated);
      } else {
        start_collect(ScanPhase::CollectFinal);
      }
      break;
    }

    case ScanPhase::ProbeJoiners: {
      auto id = after_.pairs()[probe_index_].first;
      if (!shared.read_help(id.slot())) absent_joiners_.push_back(id);
      probe_joiners_from(probe_index_ + 1);
      break;
    }

    case ScanPhase::Done:
      break;
  }
  return done() ? StepStatus::Done : StepStatus::Running;
}

void UnboundedScan::encode(StateWriter& out) const {
  out.put(static_cast<std::uint64_t>(phase_));
  out.put(moves_.raw());
  out.put(stats_.iterations);
  out.put(init_);
  if (phase_ == ScanPhase::Done) {
    out.put(result_);
    return;
  }
  out.put(curr_);
  out.put(cursor_);
  out.put(probe_index_);
  out.put(absent_joiners_.size());
  for (auto id : absent_joiners_) out.put(id.index());
  out.put(extra_left_);
  out.put(before_);
  out.put(std::span<const ObjectState>(view_));
  out.put(after_);
  out.put(std::span<const ObjectState>(again_));
  out.put(final_);
}

UnboundedUpdate::UnboundedUpdate(const MachineContext& ctx, ProcessId self, std::size_t k,
                                 ObjectOp op)
    : ctx_(&ctx), self_(self), k_(k), op_(std::move(op)) {}

StepStatus UnboundedUpdate::step(SharedAccess& shared) {
  ++steps_;
  switch (phase_) {
    case Phase::ReadCounter:
      seen_ = shared.read_counter(self_.slot());
      phase_ = Phase::Announce;
      break;
    case Phase::Announce:
      shared.write_counter(self_.slot(), seen_ + 1);
      if (ctx_->config().publishes_help()) {
        scan_.emplace(*ctx_, self_);
        phase_ = Phase::Scan;
      } else {
        phase_ = Phase::Apply;
      }
      break;
    case Phase::Scan:
      if (scan_->step(shared) == StepStatus::Done) phase_ = Phase::PublishHelp;
      break;
    case Phase::PublishHelp:
      // The snapshot is published before MEM is touched; joiner help relies
      // on this order.
      shared.write_help(self_.slot(), scan_->result());
      phase_ = Phase::Apply;
      break;
    case Phase::Apply:
      result_ = shared.apply_object(k_, op_);
      phase_ = Phase::Retire;
      break;
    case Phase::Retire:
      shared.write_counter(self_.slot(), seen_ + 2);
      phase_ = Phase::Done;
      break;
    case Phase::Done:
      break;
  }
  return done() ? StepStatus::Done : StepStatus::Running;
}

std::optional<OpResult> UnboundedUpdate::result() const {
  if (ctx_->config().strict_ok_result) return std::nullopt;
  return result_;
}

void UnboundedUpdate::encode(StateWriter& out) const {
  out.put(static_cast<std::uint64_t>(phase_));
  out.put_signed(seen_);
  if (phase_ == Phase::Scan) scan_->encode(out);
  if (phase_ == Phase::PublishHelp) out.put(scan_->result());
  if (phase_ == Phase::Retire || phase_ == Phase::Done) out.put_signed(result_);
}

}  // namespace rmwsnap
