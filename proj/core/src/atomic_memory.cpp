#include "rmwsnap/atomic_memory.hpp"

#include <stdexcept>

#include "rmwsnap/concurrent.hpp"
#include "rmwsnap/solo.hpp"
#include "rmwsnap/unbounded.hpp"

namespace rmwsnap {

AtomicSharedMemory::Segment::Segment(Counter initial) {
  for (auto& c : counters) c.store(initial, std::memory_order_relaxed);
}

AtomicSharedMemory::AtomicSharedMemory(std::shared_ptr<const MemoryLayout> layout,
                                       Counter unjoined_counter)
    : layout_(std::move(layout)), unjoined_(unjoined_counter) {
  objects_ = std::make_unique<Object[]>(layout_->size());
  for (std::size_t k = 0; k < layout_->size(); ++k) objects_[k].state = layout_->initial[k];
}

AtomicSharedMemory::~AtomicSharedMemory() {
  for (auto& s : segments_) delete s.load();
}

AtomicSharedMemory::Segment* AtomicSharedMemory::find_segment(std::size_t slot) const {
  auto index = slot / kSegmentSize;
  if (index >= kMaxSegments) throw std::out_of_range("register slot beyond registry capacity");
  return segments_[index].load(std::memory_order_acquire);
}

AtomicSharedMemory::Segment& AtomicSharedMemory::segment_for(std::size_t slot) {
  if (auto* seg = find_segment(slot)) return *seg;
  auto& cell = segments_[slot / kSegmentSize];
  auto* fresh = new Segment(unjoined_);
  Segment* expected = nullptr;
  if (!cell.compare_exchange_strong(expected, fresh, std::memory_order_acq_rel)) {
    delete fresh;
    return *expected;
  }
  return *fresh;
}

Counter AtomicSharedMemory::read_counter(std::size_t slot) {
  auto* seg = find_segment(slot);
  if (!seg) return unjoined_;
  return seg->counters[slot % kSegmentSize].load(std::memory_order_seq_cst);
}

void AtomicSharedMemory::write_counter(std::size_t slot, Counter value) {
  segment_for(slot).counters[slot % kSegmentSize].store(value, std::memory_order_seq_cst);
}

HelpSlot AtomicSharedMemory::read_help(std::size_t slot) {
  auto* seg = find_segment(slot);
  if (!seg) return nullptr;
  auto& cell = seg->help[slot % kSegmentSize];
  std::lock_guard guard(cell.lock);
  return cell.value;
}

void AtomicSharedMemory::write_help(std::size_t slot, HelpSlot view) {
  auto& cell = segment_for(slot).help[slot % kSegmentSize];
  std::lock_guard guard(cell.lock);
  cell.value = std::move(view);
}

ObjectState AtomicSharedMemory::read_object(std::size_t k) {
  auto& obj = objects_[k];
  std::lock_guard guard(obj.lock);
  return obj.state;
}

OpResult AtomicSharedMemory::apply_object(std::size_t k, const ObjectOp& op) {
  auto& obj = objects_[k];
  std::lock_guard guard(obj.lock);
  auto [next, result] = layout_->types[k]->apply(obj.state, op);
  obj.state = std::move(next);
  return result;
}

std::vector<ObjectState> AtomicSharedMemory::quiescent_states() {
  std::vector<ObjectState> out;
  out.reserve(layout_->size());
  for (std::size_t k = 0; k < layout_->size(); ++k) out.push_back(read_object(k));
  return out;
}

namespace {

template <class Machine>
Machine run(Machine machine, SharedAccess& shared) {
  while (machine.step(shared) != StepStatus::Done) {
  }
  return machine;
}

}  // namespace

SnapshotObject::SnapshotObject(std::shared_ptr<const MemoryLayout> layout, AlgorithmConfig config,
                               std::size_t processes)
    : context_(config, config.variant == Variant::Unbounded ? 0 : processes, layout->size(),
               std::max<std::size_t>(processes, 1)),
      memory_(layout, config.variant == Variant::Unbounded ? -1 : 0) {}

void SnapshotObject::join(ProcessId self) {
  if (context_.config().variant != Variant::Unbounded) return;
  run(Join(self), memory_);
}

std::optional<OpResult> SnapshotObject::update(ProcessId self, std::size_t k, const ObjectOp& op) {
  std::optional<ScanStats> ignored;
  return update(self, k, op, ignored);
}

std::optional<OpResult> SnapshotObject::update(ProcessId self, std::size_t k, const ObjectOp& op,
                                               std::optional<ScanStats>& inner) {
  memory_.layout().validate(k, op);
  inner.reset();
  switch (context_.config().variant) {
    case Variant::SoloLockFree:
    case Variant::SoloWaitFree:
      return run(SoloUpdate(context_, self, k, op), memory_).result();
    case Variant::Unbounded: {
      auto m = run(UnboundedUpdate(context_, self, k, op), memory_);
      if (m.scan()) inner = m.scan()->stats();
      return m.result();
    }
    default: {
      auto m = run(ConcurrentUpdate(context_, self, k, op), memory_);
      if (m.scan()) inner = m.scan()->stats();
      return m.result();
    }
  }
}

std::shared_ptr<const SnapshotView> SnapshotObject::scan(ProcessId self) {
  ScanStats ignored;
  return scan(self, ignored);
}

std::shared_ptr<const SnapshotView> SnapshotObject::scan(ProcessId self, ScanStats& stats) {
  switch (context_.config().variant) {
    case Variant::SoloLockFree:
    case Variant::SoloWaitFree: {
      auto m = run(SoloScan(context_, self), memory_);
      stats = m.stats();
      return m.result();
    }
    case Variant::Unbounded: {
      auto m = run(UnboundedScan(context_, self), memory_);
      stats = m.stats();
      return m.result();
    }
    default: {
      auto m = run(ConcurrentScan(context_, self), memory_);
      stats = m.stats();
      return m.result();
    }
  }
}

}  // namespace rmwsnap
