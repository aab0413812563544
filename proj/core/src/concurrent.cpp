#include "rmwsnap/concurrent.hpp"

#include <algorithm>

namespace rmwsnap {

std::size_t compute_modifier_bound(std::span<const Counter> before, std::span<const Counter> after) {
  std::size_t still = 0;
  for (std::size_t j = 0; j < before.size(); ++j) {
    if (before[j] == after[j] && before[j] % 2 == 0) ++still;
  }
  return before.size() - still;
}

void update_moves(std::span<Counter> moves, std::span<const Counter> before,
                  std::span<const Counter> after) {
  for (std::size_t j = 0; j < moves.size(); ++j) moves[j] += after[j] - before[j];
}

ConcurrentScan::ConcurrentScan(const MachineContext& ctx, ProcessId self)
    : ctx_(&ctx), self_(self), moves_(ctx.processes(), 0) {
  begin_iteration();
}

void ConcurrentScan::begin_iteration() {
  if (is_wait_free(ctx_->config().variant)) {
    auto threshold = ctx_->config().help_threshold();
    auto it = std::find_if(moves_.begin(), moves_.end(), [&](Counter m) { return m >= threshold; });
    if (it != moves_.end()) {
      // Smallest qualifying index.
      helper_ = static_cast<std::size_t>(it - moves_.begin());
      phase_ = ScanPhase::ReadHelp;
      return;
    }
  }
  ++stats_.iterations;
  stats_.windows.clear();
  before_.assign(ctx_->processes(), 0);
  cursor_ = 0;
  phase_ = ScanPhase::CollectBefore;
}

void ConcurrentScan::end_iteration() {
  if (is_wait_free(ctx_->config().variant)) update_moves(moves_, before_, after_);
  begin_iteration();
}

void ConcurrentScan::finish_with_view(ReturnPath path) {
  auto first = stats_.windows.front().first;
  auto last = stats_.windows.back().last;
  result_ = std::make_shared<const SnapshotView>(std::move(view_),
                                                 ViewProvenance{self_, first, last});
  stats_.path = path;
  phase_ = ScanPhase::Done;
}

void ConcurrentScan::after_counters_read() {
  for (std::size_t j = 0; j < before_.size(); ++j) {
    if (after_[j] - before_[j] > 1) {
      end_iteration();
      return;
    }
  }
  auto bound = compute_modifier_bound(before_, after_);
  if (bound <= 1) {
    finish_with_view(ReturnPath::Quiet);
    return;
  }
  if (ctx_->config().variant == Variant::ConcurrentBlocking) {
    begin_iteration();
    return;
  }
  extra_left_ = bound / 2;
  again_.assign(ctx_->objects(), ObjectState{});
  cursor_ = 0;
  phase_ = ScanPhase::CollectAgain;
}

StepStatus ConcurrentScan::step(SharedAccess& shared) {
  ++stats_.steps;
  switch (phase_) {
    case ScanPhase::ReadHelp:
      result_ = shared.read_help(helper_);
      stats_.helper = ProcessId::from_slot(helper_);
      stats_.help_read = shared.now();
      stats_.path = ReturnPath::Borrowed;
      phase_ = ScanPhase::Done;
      break;

    case ScanPhase::CollectBefore: {
      auto order = ctx_->counter_order(self_);
      auto j = order[cursor_];
      before_[j] = shared.read_counter(j);
      if (++cursor_ == order.size()) {
        view_.assign(ctx_->objects(), ObjectState{});
        cursor_ = 0;
        phase_ = ScanPhase::CollectMem;
      }
      break;
    }

    case ScanPhase::CollectMem: {
      auto order = ctx_->mem_order(self_);
      auto k = order[cursor_];
      view_[k] = shared.read_object(k);
      if (cursor_ == 0) window_.first = shared.now();
      if (++cursor_ == order.size()) {
        window_.last = shared.now();
        stats_.windows.push_back(window_);
        after_.assign(ctx_->processes(), 0);
        cursor_ = 0;
        phase_ = ScanPhase::CollectAfter;
      }
      break;
    }

    case ScanPhase::CollectAfter: {
      auto order = ctx_->counter_order(self_);
      auto j = order[cursor_];
      after_[j] = shared.read_counter(j);
      if (++cursor_ == order.size()) after_counters_read();
      break;
    }

    case ScanPhase::CollectAgain: {
      auto order = ctx_->mem_order(self_);
      auto k = order[cursor_];
      again_[k] = shared.read_object(k);
      if (cursor_ == 0) window_.first = shared.now();
      if (++cursor_ < order.size()) break;
      window_.last = shared.now();
      if (again_ != view_) {
        end_iteration();
        break;
      }
      stats_.windows.push_back(window_);
      if (--extra_left_ > 0) {
        cursor_ = 0;
        break;
      }
      if (ctx_->config().mutant == Mutant::DropThirdCollect) {
        finish_with_view(ReturnPath::Repeated);
        break;
      }
      final_.assign(ctx_->processes(), 0);
      cursor_ = 0;
      phase_ = ScanPhase::CollectFinal;
      break;
    }

    case ScanPhase::CollectFinal: {
      auto order = ctx_->counter_order(self_);
      auto j = order[cursor_];
      final_[j] = shared.read_counter(j);
      if (++cursor_ < order.size()) break;
      if (final_ == after_) {
        finish_with_view(ReturnPath::Repeated);
        break;
      }
      if (is_wait_free(ctx_->config().variant)) after_ = final_;
      end_iteration();
      break;
    }

    default:
      break;
  }
  return done() ? StepStatus::Done : StepStatus::Running;
}

void ConcurrentScan::encode(StateWriter& out) const {
  out.put(static_cast<std::uint64_t>(phase_));
  out.put(std::span<const Counter>(moves_));
  out.put(stats_.iterations);
  switch (phase_) {
    case ScanPhase::Done:
      out.put(result_);
      return;
    case ScanPhase::ReadHelp:
      out.put(helper_);
      return;
    default:
      break;
  }
  out.put(cursor_);
  out.put(std::span<const Counter>(before_));
  if (phase_ == ScanPhase::CollectBefore) return;
  out.put(std::span<const ObjectState>(view_));
  if (phase_ == ScanPhase::CollectMem) return;
  out.put(std::span<const Counter>(after_));
  if (phase_ == ScanPhase::CollectAfter) return;
  out.put(extra_left_);
  out.put(std::span<const ObjectState>(again_));
  if (phase_ == ScanPhase::CollectFinal) out.put(std::span<const Counter>(final_));
}

ConcurrentUpdate::ConcurrentUpdate(const MachineContext& ctx, ProcessId self, std::size_t k,
                                   ObjectOp op)
    : ctx_(&ctx), self_(self), k_(k), op_(std::move(op)) {}

StepStatus ConcurrentUpdate::step(SharedAccess& shared) {
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

std::optional<OpResult> ConcurrentUpdate::result() const {
  if (ctx_->config().strict_ok_result) return std::nullopt;
  return result_;
}

void ConcurrentUpdate::encode(StateWriter& out) const {
  out.put(static_cast<std::uint64_t>(phase_));
  out.put_signed(seen_);
  if (phase_ == Phase::Scan) scan_->encode(out);
  if (phase_ == Phase::PublishHelp) out.put(scan_->result());
  if (phase_ == Phase::Retire || phase_ == Phase::Done) out.put_signed(result_);
}

}  // namespace rmwsnap
