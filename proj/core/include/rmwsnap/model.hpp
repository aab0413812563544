#pragma once

// Shared-memory model: process ids, readable objects, views, collects, and
// the one-access-per-call interface through which every algorithm touches
// shared state.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace rmwsnap {

using Counter = std::int64_t;
using StepIndex = std::uint64_t;
using OpResult = std::int64_t;

/// 1-based process identifier. `slot()` is the 0-based register index.
class ProcessId {
 public:
  constexpr ProcessId() = default;
  constexpr explicit ProcessId(std::uint32_t index) : index_(index) {}

  constexpr std::uint32_t index() const { return index_; }
  constexpr std::size_t slot() const { return index_ - 1; }
  constexpr bool valid() const { return index_ != 0; }

  static constexpr ProcessId from_slot(std::size_t slot) {
    return ProcessId(static_cast<std::uint32_t>(slot + 1));
  }

  auto operator<=>(const ProcessId&) const = default;

 private:
  std::uint32_t index_ = 0;
};

/// State of one readable object. Scalar objects (counter, register,
/// max-register) hold an integer; the append-log holds its entries.
using ObjectState = std::variant<std::int64_t, std::vector<std::int64_t>>;

std::string to_string(const ObjectState& state);
std::string to_string(std::span<const ObjectState> states);

/// A named operation applied to one object, e.g. `add 5`.
struct ObjectOp {
  std::string name;
  std::vector<std::int64_t> args;

  bool operator==(const ObjectOp&) const = default;
};

std::string to_string(const ObjectOp& op);

/// A readable object type: its initial state and the state transformers of
/// its mutating operations. `read` is implicit and never mutates.
class ObjectType {
 public:
  using Transformer = std::function<std::pair<ObjectState, OpResult>(
      const ObjectState&, std::span<const std::int64_t>)>;

  struct Operation {
    std::size_t arity = 0;
    Transformer apply;
  };

  ObjectType(std::string name, ObjectState initial,
             std::map<std::string, Operation, std::less<>> operations);

  const std::string& name() const { return name_; }
  const ObjectState& initial() const { return initial_; }

  /// Empty when `op` is valid for this type, otherwise the reason.
  std::string validate(const ObjectOp& op) const;
  std::vector<std::string> operation_names() const;

  /// Throws std::invalid_argument on unknown operations or wrong arity.
  std::pair<ObjectState, OpResult> apply(const ObjectState& state,
                                         const ObjectOp& op) const;

 private:
  std::string name_;
  ObjectState initial_;
  std::map<std::string, Operation, std::less<>> operations_;
};

using ObjectTypePtr = std::shared_ptr<const ObjectType>;

/// Bundled types: "counter" (add, fetch_add), "register" (write),
/// "max-register" (maxwrite), "log" (append). Returns null for unknown names.
ObjectTypePtr bundled_object_type(std::string_view name);
std::vector<std::string> bundled_object_type_names();

/// Fixed description of MEM[1..m]: one type and initial state per entry.
struct MemoryLayout {
  std::vector<ObjectTypePtr> types;
  std::vector<ObjectState> initial;

  std::size_t size() const { return types.size(); }
  /// Throws std::invalid_argument when k is out of range or `op` is not
  /// defined for MEM[k]'s type. k is 0-based.
  void validate(std::size_t k, const ObjectOp& op) const;
};

/// Provenance of a view, filled in by the producing scan. Harness-only.
struct ViewProvenance {
  ProcessId producer;
  StepIndex first_read = 0;
  StepIndex last_read = 0;
};

/// Immutable result of a scan; equality compares object states only.
class SnapshotView {
 public:
  explicit SnapshotView(std::vector<ObjectState> states, ViewProvenance meta = {})
      : states_(std::move(states)), meta_(meta) {}

  std::span<const ObjectState> states() const { return states_; }
  const ObjectState& operator[](std::size_t k) const { return states_[k]; }
  std::size_t size() const { return states_.size(); }
  const ViewProvenance& meta() const { return meta_; }

  bool operator==(const SnapshotView& other) const { return states_ == other.states_; }

 private:
  std::vector<ObjectState> states_;
  ViewProvenance meta_;
};

/// Content of a help register. nullptr is the absent value.
using HelpSlot = std::shared_ptr<const SnapshotView>;

std::string to_string(const HelpSlot& view);

/// Result of collecting the unbounded counter registry: one (id, value)
/// pair per participating process, ordered by id.
class ParticipantCollect {
 public:
  using Pair = std::pair<ProcessId, Counter>;

  ParticipantCollect() = default;
  ParticipantCollect(std::initializer_list<Pair> pairs);

  /// Throws std::invalid_argument when `id` is already present.
  void add(ProcessId id, Counter value);

  bool contains(ProcessId id) const;
  /// Throws std::out_of_range when `id` is absent.
  Counter operator[](ProcessId id) const;

  std::vector<ProcessId> ids() const;
  std::span<const Pair> pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  void clear() { pairs_.clear(); }

  bool operator==(const ParticipantCollect&) const = default;

 private:
  std::vector<Pair> pairs_;
};

std::string to_string(const ParticipantCollect& collect);

/// Order in which a collect visits array entries.
class CollectOrder {
 public:
  enum class Kind : std::uint8_t { Ascending, Descending, Random };

  CollectOrder() = default;
  static CollectOrder ascending() { return CollectOrder(Kind::Ascending, 0); }
  static CollectOrder descending() { return CollectOrder(Kind::Descending, 0); }
  static CollectOrder random(std::uint64_t seed) { return CollectOrder(Kind::Random, seed); }

  /// Accepts "asc", "desc" and "random:<seed>". Throws std::invalid_argument.
  static CollectOrder parse(std::string_view text);

  Kind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }

  /// Visit order over `length` entries for one process and one array
  /// (`array_tag` distinguishes MEM from T). Random orders are fixed per
  /// (seed, process, array, length).
  std::vector<std::size_t> permutation(std::size_t length, ProcessId who,
                                       std::uint32_t array_tag) const;

  std::string to_string() const;
  bool operator==(const CollectOrder&) const = default;

 private:
  CollectOrder(Kind kind, std::uint64_t seed) : kind_(kind), seed_(seed) {}

  Kind kind_ = Kind::Ascending;
  std::uint64_t seed_ = 0;
};

/// Every method is exactly one atomic step on shared memory. Counter and
/// help registers are addressed by 0-based slot, MEM entries by 0-based k.
/// Unwritten counter slots read as -1 in the unbounded registry.
class SharedAccess {
 public:
  virtual ~SharedAccess() = default;

  virtual Counter read_counter(std::size_t slot) = 0;
  virtual void write_counter(std::size_t slot, Counter value) = 0;
  virtual HelpSlot read_help(std::size_t slot) = 0;
  virtual void write_help(std::size_t slot, HelpSlot view) = 0;
  virtual ObjectState read_object(std::size_t k) = 0;
  virtual OpResult apply_object(std::size_t k, const ObjectOp& op) = 0;

  /// Index of the most recent step, or 0 when the environment does not
  /// number steps.
  virtual StepIndex now() const = 0;
};

/// Collect of MEM in the given order. Not necessarily a snapshot.
std::vector<ObjectState> collect_mem(SharedAccess& shared, std::span<const std::size_t> order);

/// Collect of n counter registers in the given order.
std::vector<Counter> collect_counters(SharedAccess& shared, std::span<const std::size_t> order);

/// Dense-registration collect of the unbounded registry: slots are read from
/// the first one upward until the first unjoined (-1) slot.
ParticipantCollect collect_participants(SharedAccess& shared);

}  // namespace rmwsnap
