#include "rmwsnap/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace rmwsnap {

std::string_view to_string(ExploreMode mode) {
  switch (mode) {
    case ExploreMode::Exhaustive:
      return "exhaustive";
    case ExploreMode::Bounded:
      return "bounded";
    case ExploreMode::Random:
      return "random";
  }
  return "?";
}

std::optional<ExploreMode> parse_explore_mode(std::string_view text) {
  if (text == "exhaustive") return ExploreMode::Exhaustive;
  if (text == "bounded") return ExploreMode::Bounded;
  if (text == "random") return ExploreMode::Random;
  return std::nullopt;
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string Scenario::digest() const { return fnv1a_hex(source); }

std::shared_ptr<const MemoryLayout> make_layout(const std::vector<std::string>& types,
                                                const std::vector<std::optional<ObjectState>>& initial) {
  auto layout = std::make_shared<MemoryLayout>();
  for (std::size_t k = 0; k < types.size(); ++k) {
    auto type = bundled_object_type(types[k]);
    if (!type) throw ConfigError("unknown object type '" + types[k] + "'");
    layout->types.push_back(type);
    auto init = k < initial.size() && initial[k] ? *initial[k] : type->initial();
    if (init.index() != type->initial().index()) {
      throw ConfigError("initial state of MEM[" + std::to_string(k + 1) + "] does not fit " + types[k]);
    }
    layout->initial.push_back(std::move(init));
  }
  if (layout->types.empty()) throw ConfigError("memory must hold at least one object");
  return layout;
}

void Scenario::validate() const {
  if (processes.empty()) throw ConfigError("scenario needs at least one process");
  std::size_t updaters = 0;
  for (std::size_t i = 0; i < processes.size(); ++i) {
    const auto& p = processes[i];
    bool updates = false;
    for (const auto& op : p.ops) {
      if (op.is_scan()) continue;
      updates = true;
      try {
        layout->validate(op.k, op.op);
      } catch (const std::invalid_argument& e) {
        throw ConfigError("process " + std::to_string(i + 1) + ": " + e.what());
      }
    }
    if (updates) ++updaters;
    if (p.late_join && config.variant != Variant::Unbounded) {
      throw ConfigError("process " + std::to_string(i + 1) + ": late joins need the unbounded variant");
    }
  }
  for (std::size_t i = 1; i < processes.size(); ++i) {
    if (processes[i - 1].late_join && !processes[i].late_join) {
      throw ConfigError("late-joining processes must follow the initial ones");
    }
  }
  if (is_solo(config.variant) && updaters > 1) {
    throw ConfigError("solo variants allow a single updating process");
  }
}

namespace {

[[noreturn]] void fail_at(const std::string& origin, const YAML::Node& node, const std::string& field,
                          const std::string& why) {
  auto mark = node.Mark();
  std::string where = origin;
  if (mark.line >= 0) where += ":" + std::to_string(mark.line + 1);
  throw ConfigError(where + ": " + field + ": " + why);
}

template <class T>
T scalar(const std::string& origin, const YAML::Node& node, const std::string& field) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail_at(origin, node, field, "bad value '" + (node.IsScalar() ? node.Scalar() : std::string("<node>")) + "'");
  }
}

void check_keys(const std::string& origin, const YAML::Node& node, const std::string& where,
                const std::set<std::string>& allowed) {
  if (!node.IsMap()) fail_at(origin, node, where, "expected a mapping");
  for (const auto& kv : node) {
    auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail_at(origin, kv.first, where, "unknown field '" + key + "'");
  }
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(origin + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  check_keys(origin, root, "scenario",
             {"version", "name", "variant", "mutant", "collect_order", "strict_ok", "memory",
              "processes", "explore", "stress"});

  Scenario s;
  s.source = text;
  if (!root["version"]) fail_at(origin, root, "version", "missing");
  s.version = scalar<std::uint32_t>(origin, root["version"], "version");
  if (s.version != kScenarioVersion) {
    fail_at(origin, root["version"], "version", "unsupported version " + std::to_string(s.version));
  }
  s.name = root["name"] ? scalar<std::string>(origin, root["name"], "name") : origin;

  if (auto v = root["variant"]) {
    auto parsed = parse_variant(scalar<std::string>(origin, v, "variant"));
    if (!parsed) fail_at(origin, v, "variant", "unknown variant '" + v.Scalar() + "'");
    s.config.variant = *parsed;
  }
  if (auto v = root["mutant"]) {
    auto parsed = parse_mutant(scalar<std::string>(origin, v, "mutant"));
    if (!parsed) fail_at(origin, v, "mutant", "unknown mutant '" + v.Scalar() + "'");
    s.config.mutant = *parsed;
  }
  if (auto v = root["collect_order"]) {
    try {
      s.config.order = CollectOrder::parse(scalar<std::string>(origin, v, "collect_order"));
    } catch (const std::invalid_argument& e) {
      fail_at(origin, v, "collect_order", e.what());
    }
  }
  if (auto v = root["strict_ok"]) s.config.strict_ok_result = scalar<bool>(origin, v, "strict_ok");

  auto memory = root["memory"];
  if (!memory || !memory.IsSequence() || memory.size() == 0) {
    fail_at(origin, memory ? memory : root, "memory", "expected a non-empty list of object types");
  }
  std::vector<std::optional<ObjectState>> initial;
  for (const auto& entry : memory) {
    if (entry.IsScalar()) {
      s.type_names.push_back(entry.as<std::string>());
      initial.emplace_back();
      continue;
    }
    check_keys(origin, entry, "memory", {"type", "initial"});
    if (!entry["type"]) fail_at(origin, entry, "memory.type", "missing");
    s.type_names.push_back(scalar<std::string>(origin, entry["type"], "memory.type"));
    if (auto init = entry["initial"]) {
      if (init.IsSequence()) {
        std::vector<std::int64_t> log;
        for (const auto& e : init) log.push_back(scalar<std::int64_t>(origin, e, "memory.initial"));
        initial.emplace_back(std::move(log));
      } else {
        initial.emplace_back(scalar<std::int64_t>(origin, init, "memory.initial"));
      }
    } else {
      initial.emplace_back();
    }
  }
  try {
    s.layout = make_layout(s.type_names, initial);
  } catch (const ConfigError& e) {
    fail_at(origin, memory, "memory", e.what());
  }

  auto procs = root["processes"];
  if (!procs || !procs.IsSequence() || procs.size() == 0) {
    fail_at(origin, procs ? procs : root, "processes", "expected a non-empty list");
  }
  for (const auto& p : procs) {
    check_keys(origin, p, "processes", {"ops", "join"});
    ProcessScript script;
    if (auto ops = p["ops"]) {
      if (!ops.IsSequence()) fail_at(origin, ops, "processes.ops", "expected a list");
      for (const auto& op : ops) {
        try {
          script.ops.push_back(parse_operation(scalar<std::string>(origin, op, "processes.ops")));
        } catch (const std::invalid_argument& e) {
          fail_at(origin, op, "processes.ops", e.what());
        }
      }
    }
    if (auto join = p["join"]) {
      auto j = scalar<std::string>(origin, join, "processes.join");
      if (j != "late" && j != "initial") fail_at(origin, join, "processes.join", "expected 'initial' or 'late'");
      script.late_join = j == "late";
    }
    s.processes.push_back(std::move(script));
  }

  if (auto e = root["explore"]) {
    check_keys(origin, e, "explore",
               {"mode", "preemption_bound", "seed", "count", "crashes", "iteration_budget", "state_limit"});
    if (auto v = e["mode"]) {
      auto m = parse_explore_mode(scalar<std::string>(origin, v, "explore.mode"));
      if (!m) fail_at(origin, v, "explore.mode", "expected exhaustive, bounded or random");
      s.explore.mode = *m;
    }
    if (auto v = e["preemption_bound"]) s.explore.preemption_bound = scalar<std::uint32_t>(origin, v, "explore.preemption_bound");
    if (auto v = e["seed"]) s.explore.seed = scalar<std::uint64_t>(origin, v, "explore.seed");
    if (auto v = e["count"]) s.explore.count = scalar<std::uint64_t>(origin, v, "explore.count");
    if (auto v = e["crashes"]) s.explore.crashes = scalar<std::uint32_t>(origin, v, "explore.crashes");
    if (auto v = e["iteration_budget"]) s.explore.iteration_budget = scalar<std::uint32_t>(origin, v, "explore.iteration_budget");
    if (auto v = e["state_limit"]) s.explore.state_limit = scalar<std::uint64_t>(origin, v, "explore.state_limit");
  }
  if (auto st = root["stress"]) {
    check_keys(origin, st, "stress", {"threads", "ops_per_thread", "scan_ratio", "round_ops", "seed"});
    if (auto v = st["threads"]) s.stress.threads = scalar<std::uint32_t>(origin, v, "stress.threads");
    if (auto v = st["ops_per_thread"]) s.stress.ops_per_thread = scalar<std::uint64_t>(origin, v, "stress.ops_per_thread");
    if (auto v = st["scan_ratio"]) s.stress.scan_ratio = scalar<double>(origin, v, "stress.scan_ratio");
    if (auto v = st["round_ops"]) s.stress.round_ops = scalar<std::uint32_t>(origin, v, "stress.round_ops");
    if (auto v = st["seed"]) s.stress.seed = scalar<std::uint64_t>(origin, v, "stress.seed");
    if (s.stress.scan_ratio < 0 || s.stress.scan_ratio > 1) {
      fail_at(origin, st["scan_ratio"], "stress.scan_ratio", "must lie in [0, 1]");
    }
  }

  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return s;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open scenario file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

}  // namespace rmwsnap
