#include "rmwsnap/history.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>
#include <stdexcept>

namespace rmwsnap {

namespace {

constexpr std::pair<Access, std::string_view> kAccessNames[] = {
    {Access::ReadCounter, "rT"}, {Access::WriteCounter, "wT"}, {Access::ReadHelp, "rH"},
    {Access::WriteHelp, "wH"},   {Access::ReadObject, "rM"},   {Access::ApplyObject, "aM"},
};

std::string_view access_name(Access a) {
  for (auto [k, name] : kAccessNames) {
    if (k == a) return name;
  }
  return "?";
}

std::int64_t parse_int(std::string_view text) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("expected an integer, got '" + std::string(text) + "'");
  }
  return v;
}

std::uint32_t parse_process(std::string_view text) {
  if (text.size() < 2 || text[0] != 'p') {
    throw std::invalid_argument("expected a process like p1, got '" + std::string(text) + "'");
  }
  auto v = parse_int(text.substr(1));
  if (v < 1) throw std::invalid_argument("process ids start at 1");
  return static_cast<std::uint32_t>(v);
}

// Splits "[a,[b,c],d]" at top-level commas.
std::vector<std::string> split_list(const std::string& text) {
  if (text.size() < 2 || text.front() != '[' || text.back() != ']') {
    throw std::invalid_argument("expected a bracketed list, got '" + text + "'");
  }
  std::vector<std::string> items;
  std::string current;
  int depth = 0;
  for (std::size_t i = 1; i + 1 < text.size(); ++i) {
    char c = text[i];
    if (c == '[') ++depth;
    if (c == ']') --depth;
    if (c == ',' && depth == 0) {
      items.push_back(current);
      current.clear();
      continue;
    }
    current += c;
  }
  if (depth != 0) throw std::invalid_argument("unbalanced brackets in '" + text + "'");
  if (!current.empty() || !items.empty()) items.push_back(current);
  return items;
}

std::string result_text(const std::optional<OpResult>& r) {
  return r ? std::to_string(*r) : std::string("ok");
}

std::string operation_text(const Operation& op) {
  if (op.is_scan()) return "scan";
  return "update " + std::to_string(op.k + 1) + " " + to_string(op.op);
}

HelpSlot parse_help(const std::string& text) {
  if (text == "bottom") return nullptr;
  return std::make_shared<const SnapshotView>(parse_state_list(text));
}

}  // namespace

std::string to_string(const Operation& op) { return operation_text(op); }

ObjectState parse_object_state(const std::string& text) {
  if (!text.empty() && text.front() == '[') {
    std::vector<std::int64_t> entries;
    for (const auto& item : split_list(text)) entries.push_back(parse_int(item));
    return entries;
  }
  return parse_int(text);
}

std::vector<ObjectState> parse_state_list(const std::string& text) {
  std::vector<ObjectState> states;
  for (const auto& item : split_list(text)) states.push_back(parse_object_state(item));
  return states;
}

Operation parse_operation(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  if (words.size() == 1 && words[0] == "scan") return Operation::scan();
  if (words.size() >= 3 && words[0] == "update") {
    auto k = parse_int(words[1]);
    if (k < 1) throw std::invalid_argument("object index must be at least 1");
    ObjectOp op{words[2], {}};
    for (std::size_t i = 3; i < words.size(); ++i) op.args.push_back(parse_int(words[i]));
    return Operation::update(static_cast<std::size_t>(k - 1), std::move(op));
  }
  throw std::invalid_argument("expected 'scan' or 'update <k> <op> <args>', got '" + text + "'");
}

void History::append(Event event) {
  if (!events_.empty() && event.index <= events_.back().index) {
    throw std::invalid_argument("event index " + std::to_string(event.index) +
                                " does not increase");
  }
  if (event.kind == EventKind::Step && event.access == Access::ApplyObject) {
    if (event.target >= initial_.size()) {
      throw std::invalid_argument("mutation of object " + std::to_string(event.target + 1) +
                                  " out of range");
    }
    Mutation m;
    m.index = event.index;
    m.process = event.process;
    m.k = event.target;
    m.op = event.op;
    m.before = current_[event.target];
    current_[event.target] = event.state;
    m.after = event.state;
    m.result = event.value;
    mutations_.push_back(std::move(m));
  }
  events_.push_back(std::move(event));
}

void History::validate() const {
  std::map<ProcessId, const Event*> open;
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const auto& e = events_[i];
    auto where = [&] { return "event " + std::to_string(i + 1) + " (index " + std::to_string(e.index) + ")"; };
    if (!e.process.valid()) throw std::invalid_argument(where() + ": missing process");
    if (e.kind == EventKind::Invocation) {
      if (open.count(e.process)) {
        throw std::invalid_argument(where() + ": p" + std::to_string(e.process.index()) +
                                    " invokes while an operation is pending");
      }
      if (!e.operation.is_scan() && e.operation.k >= initial_.size()) {
        throw std::invalid_argument(where() + ": object index out of range");
      }
      open[e.process] = &e;
    } else if (e.kind == EventKind::Response) {
      auto it = open.find(e.process);
      if (it == open.end()) {
        throw std::invalid_argument(where() + ": response without a pending invocation");
      }
      if (!(it->second->operation == e.operation)) {
        throw std::invalid_argument(where() + ": response does not match its invocation");
      }
      if (e.operation.is_scan() && e.view && e.view->size() != initial_.size()) {
        throw std::invalid_argument(where() + ": scan view has the wrong length");
      }
      open.erase(it);
    }
  }
}

std::vector<OperationRecord> History::operations() const {
  validate();
  std::vector<OperationRecord> ops;
  std::map<ProcessId, std::size_t> open;
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const auto& e = events_[i];
    if (e.kind == EventKind::Invocation) {
      OperationRecord r;
      r.id = ops.size();
      r.process = e.process;
      r.operation = e.operation;
      r.invoked = e.index;
      r.invocation_event = i;
      open[e.process] = ops.size();
      ops.push_back(std::move(r));
    } else if (e.kind == EventKind::Response) {
      auto& r = ops[open.at(e.process)];
      r.responded = e.index;
      r.response_event = i;
      r.result = e.result;
      r.view = e.view;
      open.erase(e.process);
    }
  }
  return ops;
}

std::vector<ObjectState> History::state_at(StepIndex index) const {
  auto state = initial_;
  for (const auto& m : mutations_) {
    if (m.index > index) break;
    state[m.k] = m.after;
  }
  return state;
}

History History::prefix(std::size_t count) const {
  History out(initial_);
  for (std::size_t i = 0; i < count && i < events_.size(); ++i) out.append(events_[i]);
  return out;
}

std::string History::serialize() const {
  std::ostringstream out;
  out << "initial " << to_string(std::span<const ObjectState>(initial_)) << '\n';
  for (const auto& e : events_) {
    out << e.index << ' ';
    auto p = "p" + std::to_string(e.process.index());
    switch (e.kind) {
      case EventKind::Invocation:
        out << "inv " << p << ' ' << operation_text(e.operation);
        break;
      case EventKind::Response:
        out << "res " << p << ' ' << operation_text(e.operation) << " -> "
            << (e.operation.is_scan() ? to_string(e.view) : result_text(e.result));
        break;
      case EventKind::Step:
        out << "step " << p << ' ' << access_name(e.access) << ' ' << e.target + 1 << ' ';
        switch (e.access) {
          case Access::ReadCounter:
          case Access::WriteCounter:
            out << e.value;
            break;
          case Access::ReadHelp:
          case Access::WriteHelp:
            out << to_string(e.help);
            break;
          case Access::ReadObject:
            out << to_string(e.state);
            break;
          case Access::ApplyObject:
            out << to_string(e.op) << " -> " << e.value << " = " << to_string(e.state);
            break;
        }
        break;
    }
    out << '\n';
  }
  return out.str();
}

History History::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  std::optional<History> history;
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument("line " + std::to_string(number) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream words_in(line);
    std::vector<std::string> w;
    for (std::string s; words_in >> s;) w.push_back(s);
    try {
      if (!history) {
        if (w.size() != 2 || w[0] != "initial") fail("expected 'initial [states]'");
        history.emplace(parse_state_list(w[1]));
        continue;
      }
      if (w.size() < 3) fail("too few fields");
      Event e;
      e.index = static_cast<StepIndex>(parse_int(w[0]));
      e.process = ProcessId(parse_process(w[2]));
      auto arrow = std::find(w.begin(), w.end(), std::string("->"));
      if (w[1] == "inv" || w[1] == "res") {
        e.kind = w[1] == "inv" ? EventKind::Invocation : EventKind::Response;
        std::string op_text;
        for (auto it = w.begin() + 3; it != arrow; ++it) op_text += (op_text.empty() ? "" : " ") + *it;
        e.operation = parse_operation(op_text);
        if (e.kind == EventKind::Response) {
          if (arrow == w.end() || arrow + 2 != w.end()) fail("response needs '-> <value>'");
          const auto& v = *(arrow + 1);
          if (e.operation.is_scan()) {
            e.view = parse_help(v);
          } else if (v != "ok") {
            e.result = parse_int(v);
          }
        } else if (arrow != w.end()) {
          fail("invocation carries no value");
        }
      } else if (w[1] == "step") {
        if (w.size() < 6) fail("step needs access, target and value");
        e.kind = EventKind::Step;
        bool known = false;
        for (auto [a, name] : kAccessNames) {
          if (name == w[3]) {
            e.access = a;
            known = true;
          }
        }
        if (!known) fail("unknown access '" + w[3] + "'");
        auto target = parse_int(w[4]);
        if (target < 1) fail("targets start at 1");
        e.target = static_cast<std::size_t>(target - 1);
        switch (e.access) {
          case Access::ReadCounter:
          case Access::WriteCounter:
            if (w.size() != 6) fail("counter step takes one value");
            e.value = parse_int(w[5]);
            break;
          case Access::ReadHelp:
          case Access::WriteHelp:
            if (w.size() != 6) fail("help step takes one value");
            e.help = parse_help(w[5]);
            break;
          case Access::ReadObject:
            if (w.size() != 6) fail("read step takes one value");
            e.state = parse_object_state(w[5]);
            break;
          case Access::ApplyObject: {
            if (arrow == w.end() || arrow + 4 != w.end() || *(arrow + 2) != "=") {
              fail("apply step needs '<op> -> <result> = <state>'");
            }
            e.op.name = w[5];
            for (auto it = w.begin() + 6; it != arrow; ++it) e.op.args.push_back(parse_int(*it));
            e.value = parse_int(*(arrow + 1));
            e.state = parse_object_state(*(arrow + 3));
            break;
          }
        }
      } else {
        fail("unknown event kind '" + w[1] + "'");
      }
      history->append(std::move(e));
    } catch (const std::invalid_argument& err) {
      std::string what = err.what();
      if (what.rfind("line ", 0) == 0) throw;
      fail(what);
    }
  }
  if (!history) throw std::invalid_argument("empty history");
  return *history;
}

bool History::operator==(const History& other) const { return serialize() == other.serialize(); }

}  // namespace rmwsnap
