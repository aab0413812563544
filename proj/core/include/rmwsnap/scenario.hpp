#pragma once

// Scenario files: algorithm configuration, memory layout, per-process
// operation scripts and exploration/stress settings, stored as versioned YAML.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmwsnap/history.hpp"
#include "rmwsnap/machine.hpp"

namespace rmwsnap {

/// Bad scenario, schedule or flag. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProcessScript {
  std::vector<Operation> ops;
  /// Unbounded variant: joins as a scheduled step instead of during setup.
  bool late_join = false;
};

enum class ExploreMode : std::uint8_t { Exhaustive, Bounded, Random };

std::string_view to_string(ExploreMode mode);
std::optional<ExploreMode> parse_explore_mode(std::string_view text);

struct ExploreSettings {
  ExploreMode mode = ExploreMode::Exhaustive;
  std::uint32_t preemption_bound = 3;
  std::uint64_t seed = 1;
  std::uint64_t count = 1000;
  /// Crashes injected per run.
  std::uint32_t crashes = 0;
  /// Scan loop iterations after which a run is cut and flagged.
  std::uint32_t iteration_budget = 64;
  /// Distinct states after which exhaustive search stops, flagged incomplete.
  std::uint64_t state_limit = 50'000'000;
};

struct StressSettings {
  std::uint32_t threads = 4;
  std::uint64_t ops_per_thread = 1000;
  double scan_ratio = 0.5;
  /// Operations per thread between two barriers; one checked segment each.
  std::uint32_t round_ops = 3;
  std::uint64_t seed = 1;
};

struct Scenario {
  std::uint32_t version = 1;
  std::string name;
  AlgorithmConfig config;
  std::shared_ptr<const MemoryLayout> layout;
  std::vector<std::string> type_names;
  std::vector<ProcessScript> processes;
  ExploreSettings explore;
  StressSettings stress;
  /// The text the scenario was parsed from.
  std::string source;

  std::size_t objects() const { return layout->size(); }
  std::size_t process_count() const { return processes.size(); }
  /// FNV-1a over the source text, as 16 hex digits.
  std::string digest() const;
  /// Throws ConfigError when scripts do not fit the layout or the variant.
  void validate() const;
};

inline constexpr std::uint32_t kScenarioVersion = 1;

/// Throws ConfigError naming the origin, line and field.
Scenario parse_scenario(const std::string& text, const std::string& origin = "<scenario>");
Scenario load_scenario_file(const std::filesystem::path& path);

/// Builds a layout from type names; throws ConfigError for unknown types.
std::shared_ptr<const MemoryLayout> make_layout(const std::vector<std::string>& types,
                                                const std::vector<std::optional<ObjectState>>& initial = {});

std::string fnv1a_hex(std::string_view text);

}  // namespace rmwsnap
