#include "rmwsnap/solo.hpp"

namespace rmwsnap {

namespace {
constexpr std::size_t kSlot = 0;
}

SoloUpdate::SoloUpdate(const MachineContext& ctx, ProcessId self, std::size_t k, ObjectOp op)
    : ctx_(&ctx), self_(self), k_(k), op_(std::move(op)) {}

StepStatus SoloUpdate::step(SharedAccess& shared) {
  ++steps_;
  switch (phase_) {
    case Phase::ReadCounter:
      seen_ = shared.read_counter(kSlot);
      phase_ = Phase::Announce;
      break;
    case Phase::Announce:
      shared.write_counter(kSlot, seen_ + 1);
      if (ctx_->config().publishes_help()) {
        collected_.assign(ctx_->objects(), ObjectState{});
        cursor_ = 0;
        phase_ = Phase::CollectHelp;
      } else {
        phase_ = Phase::Apply;
      }
      break;
    case Phase::CollectHelp: {
      auto order = ctx_->mem_order(self_);
      auto k = order[cursor_];
      collected_[k] = shared.read_object(k);
      if (cursor_ == 0) window_.first = shared.now();
      if (++cursor_ == order.size()) {
        window_.last = shared.now();
        phase_ = Phase::PublishHelp;
      }
      break;
    }
    case Phase::PublishHelp:
      // With a single updater nothing else mutates MEM during the collect,
      // so the published collect is a snapshot.
      shared.write_help(kSlot, std::make_shared<const SnapshotView>(
                                   std::move(collected_),
                                   ViewProvenance{self_, window_.first, window_.last}));
      collected_.clear();
      phase_ = Phase::Apply;
      break;
    case Phase::Apply:
      result_ = shared.apply_object(k_, op_);
      phase_ = Phase::Retire;
      break;
    case Phase::Retire:
      shared.write_counter(kSlot, seen_ + 2);
      phase_ = Phase::Done;
      break;
    case Phase::Done:
      break;
  }
  return done() ? StepStatus::Done : StepStatus::Running;
}

std::optional<OpResult> SoloUpdate::result() const {
  if (ctx_->config().strict_ok_result) return std::nullopt;
  return result_;
}

void SoloUpdate::encode(StateWriter& out) const {
  out.put(static_cast<std::uint64_t>(phase_));
  out.put_signed(seen_);
  out.put(std::span<const ObjectState>(collected_));
  out.put(cursor_);
  out.put_signed(result_);
}

SoloScan::SoloScan(const MachineContext& ctx, ProcessId self) : ctx_(&ctx), self_(self) {
  begin_iteration();
}

void SoloScan::begin_iteration() {
  // Under DropHelpPublish the register is never written but is still trusted.
  if (is_wait_free(ctx_->config().variant) && moves_ >= ctx_->config().help_threshold()) {
    phase_ = ScanPhase::ReadHelp;
    return;
  }
  ++stats_.iterations;
  stats_.windows.clear();
  phase_ = ScanPhase::CollectBefore;
}

void SoloScan::finish(ReturnPath path) {
  stats_.path = path;
  phase_ = ScanPhase::Done;
}

StepStatus SoloScan::step(SharedAccess& shared) {
  ++stats_.steps;
  switch (phase_) {
    case ScanPhase::ReadHelp:
      result_ = shared.read_help(kSlot);
      stats_.helper = result_ ? result_->meta().producer : ProcessId{};
      stats_.help_read = shared.now();
      finish(ReturnPath::Borrowed);
      break;
    case ScanPhase::CollectBefore:
      before_ = shared.read_counter(kSlot);
      view_.assign(ctx_->objects(), ObjectState{});
      cursor_ = 0;
      phase_ = ScanPhase::CollectMem;
      break;
    case ScanPhase::CollectMem: {
      auto order = ctx_->mem_order(self_);
      auto k = order[cursor_];
      view_[k] = shared.read_object(k);
      if (cursor_ == 0) window_.first = shared.now();
      if (++cursor_ == order.size()) {
        window_.last = shared.now();
        phase_ = ScanPhase::CollectAfter;
      }
      break;
    }
    case ScanPhase::CollectAfter:
      after_ = shared.read_counter(kSlot);
      if (after_ - before_ <= 1) {
        stats_.windows.push_back(window_);
        result_ = std::make_shared<const SnapshotView>(
            std::move(view_), ViewProvenance{self_, window_.first, window_.last});
        finish(ReturnPath::Quiet);
        break;
      }
      if (is_wait_free(ctx_->config().variant)) moves_ += after_ - before_;
      begin_iteration();
      break;
    default:
      break;
  }
  return done() ? StepStatus::Done : StepStatus::Running;
}

void SoloScan::encode(StateWriter& out) const {
  out.put(static_cast<std::uint64_t>(phase_));
  out.put_signed(moves_);
  out.put_signed(before_);
  out.put(std::span<const ObjectState>(view_));
  out.put(cursor_);
  out.put(stats_.iterations);
  out.put(result_);
}

}  // namespace rmwsnap
