#include "rmwsnap/model.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace rmwsnap {

namespace {

std::string join_ints(std::span<const std::int64_t> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i != 0) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::int64_t scalar(const ObjectState& state, std::string_view type) {
  if (const auto* v = std::get_if<std::int64_t>(&state)) return *v;
  throw std::invalid_argument(std::string(type) + " state must be scalar");
}

}  // namespace

std::string to_string(const ObjectState& state) {
  if (const auto* v = std::get_if<std::int64_t>(&state)) return std::to_string(*v);
  return "[" + join_ints(std::get<std::vector<std::int64_t>>(state)) + "]";
}

std::string to_string(std::span<const ObjectState> states) {
  std::string out = "[";
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (i != 0) out += ',';
    out += to_string(states[i]);
  }
  return out + "]";
}

std::string to_string(const ObjectOp& op) {
  std::string out = op.name;
  for (auto a : op.args) out += " " + std::to_string(a);
  return out;
}

std::string to_string(const HelpSlot& view) {
  return view ? to_string(view->states()) : std::string("bottom");
}

ObjectType::ObjectType(std::string name, ObjectState initial,
                       std::map<std::string, Operation, std::less<>> operations)
    : name_(std::move(name)), initial_(std::move(initial)), operations_(std::move(operations)) {}

std::string ObjectType::validate(const ObjectOp& op) const {
  auto it = operations_.find(op.name);
  if (it == operations_.end()) {
    return "operation '" + op.name + "' is not defined for " + name_;
  }
  if (it->second.arity != op.args.size()) {
    return "operation '" + op.name + "' of " + name_ + " takes " +
           std::to_string(it->second.arity) + " argument(s), got " +
           std::to_string(op.args.size());
  }
  return {};
}

std::vector<std::string> ObjectType::operation_names() const {
  std::vector<std::string> names;
  for (const auto& [name, _] : operations_) names.push_back(name);
  return names;
}

std::pair<ObjectState, OpResult> ObjectType::apply(const ObjectState& state,
                                                   const ObjectOp& op) const {
  if (auto why = validate(op); !why.empty()) throw std::invalid_argument(why);
  return operations_.find(op.name)->second.apply(state, op.args);
}

ObjectTypePtr bundled_object_type(std::string_view name) {
  static const ObjectTypePtr counter = std::make_shared<const ObjectType>(
      "counter", ObjectState{std::int64_t{0}},
      std::map<std::string, ObjectType::Operation, std::less<>>{
          {"add",
           {1,
            [](const ObjectState& s, std::span<const std::int64_t> a) {
              auto next = scalar(s, "counter") + a[0];
              return std::pair{ObjectState{next}, next};
            }}},
          {"fetch_add",
           {1,
            [](const ObjectState& s, std::span<const std::int64_t> a) {
              auto prev = scalar(s, "counter");
              return std::pair{ObjectState{prev + a[0]}, prev};
            }}},
      });
  static const ObjectTypePtr reg = std::make_shared<const ObjectType>(
      "register", ObjectState{std::int64_t{0}},
      std::map<std::string, ObjectType::Operation, std::less<>>{
          {"write",
           {1,
            [](const ObjectState&, std::span<const std::int64_t> a) {
              return std::pair{ObjectState{a[0]}, OpResult{0}};
            }}},
      });
  static const ObjectTypePtr max_reg = std::make_shared<const ObjectType>(
      "max-register", ObjectState{std::int64_t{0}},
      std::map<std::string, ObjectType::Operation, std::less<>>{
          {"maxwrite",
           {1,
            [](const ObjectState& s, std::span<const std::int64_t> a) {
              return std::pair{ObjectState{std::max(scalar(s, "max-register"), a[0])},
                               OpResult{0}};
            }}},
      });
  static const ObjectTypePtr log = std::make_shared<const ObjectType>(
      "log", ObjectState{std::vector<std::int64_t>{}},
      std::map<std::string, ObjectType::Operation, std::less<>>{
          {"append",
           {1,
            [](const ObjectState& s, std::span<const std::int64_t> a) {
              auto entries = std::get<std::vector<std::int64_t>>(s);
              entries.push_back(a[0]);
              auto length = static_cast<OpResult>(entries.size());
              return std::pair{ObjectState{std::move(entries)}, length};
            }}},
      });

  if (name == "counter") return counter;
  if (name == "register") return reg;
  if (name == "max-register") return max_reg;
  if (name == "log") return log;
  return nullptr;
}

std::vector<std::string> bundled_object_type_names() {
  return {"counter", "register", "max-register", "log"};
}

void MemoryLayout::validate(std::size_t k, const ObjectOp& op) const {
  if (k >= types.size()) {
    throw std::invalid_argument("object index " + std::to_string(k + 1) +
                                " out of range 1.." + std::to_string(types.size()));
  }
  if (auto why = types[k]->validate(op); !why.empty()) throw std::invalid_argument(why);
}

ParticipantCollect::ParticipantCollect(std::initializer_list<Pair> pairs) {
  for (const auto& [id, value] : pairs) add(id, value);
}

void ParticipantCollect::add(ProcessId id, Counter value) {
  auto it = std::lower_bound(pairs_.begin(), pairs_.end(), id,
                             [](const Pair& p, ProcessId key) { return p.first < key; });
  if (it != pairs_.end() && it->first == id) {
    throw std::invalid_argument("duplicate participant p" + std::to_string(id.index()));
  }
  pairs_.insert(it, {id, value});
}

bool ParticipantCollect::contains(ProcessId id) const {
  return std::binary_search(pairs_.begin(), pairs_.end(), Pair{id, 0},
                            [](const Pair& a, const Pair& b) { return a.first < b.first; });
}

Counter ParticipantCollect::operator[](ProcessId id) const {
  auto it = std::lower_bound(pairs_.begin(), pairs_.end(), id,
                             [](const Pair& p, ProcessId key) { return p.first < key; });
  if (it == pairs_.end() || it->first != id) {
    throw std::out_of_range("p" + std::to_string(id.index()) + " did not participate");
  }
  return it->second;
}

std::vector<ProcessId> ParticipantCollect::ids() const {
  std::vector<ProcessId> out;
  out.reserve(pairs_.size());
  for (const auto& p : pairs_) out.push_back(p.first);
  return out;
}

std::string to_string(const ParticipantCollect& collect) {
  std::string out = "{";
  bool first = true;
  for (const auto& [id, value] : collect.pairs()) {
    if (!first) out += ',';
    first = false;
    out += "(" + std::to_string(id.index()) + "," + std::to_string(value) + ")";
  }
  return out + "}";
}

CollectOrder CollectOrder::parse(std::string_view text) {
  if (text == "asc") return ascending();
  if (text == "desc") return descending();
  constexpr std::string_view prefix = "random:";
  if (text.starts_with(prefix)) {
    auto digits = text.substr(prefix.size());
    std::uint64_t seed = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), seed);
    if (ec == std::errc{} && ptr == digits.data() + digits.size() && !digits.empty()) {
      return random(seed);
    }
  }
  throw std::invalid_argument("collect order must be asc, desc or random:<seed>, got '" +
                              std::string(text) + "'");
}

std::vector<std::size_t> CollectOrder::permutation(std::size_t length, ProcessId who,
                                                   std::uint32_t array_tag) const {
  std::vector<std::size_t> order(length);
  std::iota(order.begin(), order.end(), std::size_t{0});
  switch (kind_) {
    case Kind::Ascending:
      break;
    case Kind::Descending:
      std::reverse(order.begin(), order.end());
      break;
    case Kind::Random: {
      std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                        who.index(), array_tag, static_cast<std::uint32_t>(length)};
      std::mt19937_64 rng(seq);
      // Fisher-Yates with an explicit draw so orders are stable across
      // standard library implementations.
      for (std::size_t i = length; i > 1; --i) {
        std::swap(order[i - 1], order[rng() % i]);
      }
      break;
    }
  }
  return order;
}

std::string CollectOrder::to_string() const {
  switch (kind_) {
    case Kind::Ascending:
      return "asc";
    case Kind::Descending:
      return "desc";
    case Kind::Random:
      return "random:" + std::to_string(seed_);
  }
  return "asc";
}

std::vector<ObjectState> collect_mem(SharedAccess& shared, std::span<const std::size_t> order) {
  std::vector<ObjectState> values(order.size());
  for (auto k : order) values[k] = shared.read_object(k);
  return values;
}

std::vector<Counter> collect_counters(SharedAccess& shared, std::span<const std::size_t> order) {
  std::vector<Counter> values(order.size());
  for (auto j : order) values[j] = shared.read_counter(j);
  return values;
}

ParticipantCollect collect_participants(SharedAccess& shared) {
  ParticipantCollect out;
  for (std::size_t slot = 0;; ++slot) {
    auto value = shared.read_counter(slot);
    if (value < 0) return out;
    out.add(ProcessId::from_slot(slot), value);
  }
}

}  // namespace rmwsnap
