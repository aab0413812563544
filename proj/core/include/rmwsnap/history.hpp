#pragma once

// Recorded executions: invocation, response and step events on one global
// step numbering, plus the log of MEM mutations. Histories serialize to a
// line-per-event text format.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rmwsnap/model.hpp"

namespace rmwsnap {

/// A high-level operation: Update(k, op, args) or Scan. k is 0-based.
struct Operation {
  enum class Kind : std::uint8_t { Update, Scan };

  Kind kind = Kind::Scan;
  std::size_t k = 0;
  ObjectOp op;

  static Operation update(std::size_t k, ObjectOp op) { return {Kind::Update, k, std::move(op)}; }
  static Operation scan() { return {}; }
  bool is_scan() const { return kind == Kind::Scan; }

  bool operator==(const Operation&) const = default;
};

std::string to_string(const Operation& op);

enum class EventKind : std::uint8_t { Invocation, Response, Step };

enum class Access : std::uint8_t {
  ReadCounter,
  WriteCounter,
  ReadHelp,
  WriteHelp,
  ReadObject,
  ApplyObject,
};

struct Event {
  StepIndex index = 0;
  EventKind kind = EventKind::Step;
  ProcessId process;

  // Invocation and Response.
  Operation operation;
  /// Update response; empty for OK.
  std::optional<OpResult> result;
  /// Scan response.
  HelpSlot view;

  // Step.
  Access access = Access::ReadCounter;
  std::size_t target = 0;
  /// Counter read/written, or object result for ApplyObject.
  Counter value = 0;
  /// Object state read, or new state after ApplyObject.
  ObjectState state;
  /// Help slot content read or written.
  HelpSlot help;
  /// ApplyObject only.
  ObjectOp op;
};

struct Mutation {
  StepIndex index = 0;
  ProcessId process;
  std::size_t k = 0;
  ObjectOp op;
  ObjectState before;
  ObjectState after;
  OpResult result = 0;
};

/// One high-level operation extracted from a history.
struct OperationRecord {
  std::size_t id = 0;
  ProcessId process;
  Operation operation;
  StepIndex invoked = 0;
  /// Unset while pending.
  std::optional<StepIndex> responded;
  std::optional<OpResult> result;
  HelpSlot view;
  /// Position of the invocation and response events in the event list.
  std::size_t invocation_event = 0;
  std::optional<std::size_t> response_event;

  bool pending() const { return !responded.has_value(); }
};

class History {
 public:
  History() = default;
  explicit History(std::vector<ObjectState> initial) : initial_(std::move(initial)), current_(initial_) {}

  const std::vector<ObjectState>& initial() const { return initial_; }
  const std::vector<Event>& events() const { return events_; }
  const std::vector<Mutation>& mutations() const { return mutations_; }

  /// Appends an event. Step events with Access::ApplyObject also extend the
  /// mutation log. Throws std::invalid_argument if the index does not
  /// increase.
  void append(Event event);

  /// Throws std::invalid_argument naming the first offending event when
  /// invocations and responses do not alternate per process or a response
  /// does not match its invocation.
  void validate() const;

  /// Operations in invocation order. Validates first.
  std::vector<OperationRecord> operations() const;

  /// MEM state right after the event with the given index (the left fold of
  /// the mutation log).
  std::vector<ObjectState> state_at(StepIndex index) const;

  /// The history truncated after the first `count` events.
  History prefix(std::size_t count) const;

  std::string serialize() const;
  /// Throws std::invalid_argument with the line number on malformed input.
  static History parse(const std::string& text);

  bool operator==(const History&) const;

 private:
  std::vector<ObjectState> initial_;
  std::vector<Event> events_;
  std::vector<Mutation> mutations_;
  std::vector<ObjectState> current_;
};

/// Parsers for the textual forms used in history files, shared with the
/// scenario reader.
ObjectState parse_object_state(const std::string& text);
std::vector<ObjectState> parse_state_list(const std::string& text);
/// "update <k> <op> <args...>" (1-based k) or "scan".
Operation parse_operation(const std::string& text);

}  // namespace rmwsnap
