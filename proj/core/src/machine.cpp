#include "rmwsnap/machine.hpp"

#include <array>
#include <stdexcept>

namespace rmwsnap {

namespace {

constexpr std::array kVariantNames = {
    std::pair{Variant::SoloLockFree, std::string_view("solo-lf")},
    std::pair{Variant::SoloWaitFree, std::string_view("solo-wf")},
    std::pair{Variant::ConcurrentLockFree, std::string_view("conc-lf")},
    std::pair{Variant::ConcurrentWaitFree, std::string_view("conc-wf")},
    std::pair{Variant::ConcurrentBlocking, std::string_view("conc-blocking")},
    std::pair{Variant::Unbounded, std::string_view("unbounded")},
};

constexpr std::array kMutantNames = {
    std::pair{Mutant::None, std::string_view("none")},
    std::pair{Mutant::DropHelpPublish, std::string_view("drop-help-publish")},
    std::pair{Mutant::DropThirdCollect, std::string_view("drop-third-collect")},
    std::pair{Mutant::WeakHelpThreshold, std::string_view("weak-help-threshold")},
    std::pair{Mutant::SkipJoinerClause, std::string_view("skip-joiner-clause")},
};

constexpr std::array kPathNames = {
    std::pair{ReturnPath::None, std::string_view("none")},
    std::pair{ReturnPath::Quiet, std::string_view("quiet")},
    std::pair{ReturnPath::Repeated, std::string_view("repeated")},
    std::pair{ReturnPath::Borrowed, std::string_view("borrowed")},
    std::pair{ReturnPath::BorrowedJoiner, std::string_view("borrowed-joiner")},
};

constexpr std::uint32_t kMemTag = 1;
constexpr std::uint32_t kCounterTag = 2;

}  // namespace

std::string_view to_string(Variant variant) {
  for (auto [v, name] : kVariantNames) {
    if (v == variant) return name;
  }
  return "?";
}

std::string_view to_string(Mutant mutant) {
  for (auto [m, name] : kMutantNames) {
    if (m == mutant) return name;
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view text) {
  for (auto [v, name] : kVariantNames) {
    if (name == text) return v;
  }
  return std::nullopt;
}

std::optional<Mutant> parse_mutant(std::string_view text) {
  for (auto [m, name] : kMutantNames) {
    if (name == text) return m;
  }
  return std::nullopt;
}

std::string_view to_string(ReturnPath path) {
  for (auto [p, name] : kPathNames) {
    if (p == path) return name;
  }
  return "?";
}

std::optional<ReturnPath> parse_return_path(std::string_view text) {
  for (auto [p, name] : kPathNames) {
    if (name == text) return p;
  }
  return std::nullopt;
}

bool is_solo(Variant variant) {
  return variant == Variant::SoloLockFree || variant == Variant::SoloWaitFree;
}

bool is_wait_free(Variant variant) {
  return variant == Variant::SoloWaitFree || variant == Variant::ConcurrentWaitFree ||
         variant == Variant::Unbounded;
}

MachineContext::MachineContext(AlgorithmConfig config, std::size_t processes, std::size_t objects,
                               std::size_t max_processes)
    : config_(config), processes_(processes), objects_(objects) {
  if (objects == 0) throw std::invalid_argument("memory must hold at least one object");
  mem_orders_.reserve(max_processes);
  counter_orders_.reserve(max_processes);
  for (std::size_t slot = 0; slot < max_processes; ++slot) {
    auto who = ProcessId::from_slot(slot);
    mem_orders_.push_back(config.order.permutation(objects, who, kMemTag));
    counter_orders_.push_back(config.order.permutation(processes, who, kCounterTag));
  }
  ascending_mem_ = CollectOrder::ascending().permutation(objects, ProcessId(1), kMemTag);
}

std::span<const std::size_t> MachineContext::mem_order(ProcessId who) const {
  if (who.slot() < mem_orders_.size()) return mem_orders_[who.slot()];
  return ascending_mem_;
}

std::span<const std::size_t> MachineContext::counter_order(ProcessId who) const {
  return counter_orders_.at(who.slot());
}

void StateWriter::put(std::uint64_t value) {
  // Variable-length encoding keeps small counters to one byte.
  do {
    auto byte = static_cast<char>(value & 0x7f);
    value >>= 7;
    if (value != 0) byte = static_cast<char>(byte | 0x80);
    bytes_.push_back(byte);
  } while (value != 0);
}

void StateWriter::put(const ObjectState& state) {
  if (const auto* v = std::get_if<std::int64_t>(&state)) {
    bytes_.push_back('s');
    put_signed(*v);
    return;
  }
  const auto& entries = std::get<std::vector<std::int64_t>>(state);
  bytes_.push_back('l');
  put(entries.size());
  for (auto e : entries) put_signed(e);
}

void StateWriter::put(std::span<const ObjectState> states) {
  put(states.size());
  for (const auto& s : states) put(s);
}

void StateWriter::put(std::span<const Counter> values) {
  put(values.size());
  for (auto v : values) put_signed(v);
}

void StateWriter::put(const HelpSlot& view) {
  if (!view) {
    bytes_.push_back('_');
    return;
  }
  bytes_.push_back('v');
  put(view->states());
}

void StateWriter::put(const ParticipantCollect& collect) {
  put(collect.size());
  for (const auto& [id, value] : collect.pairs()) {
    put(id.index());
    put_signed(value);
  }
}

}  // namespace rmwsnap
