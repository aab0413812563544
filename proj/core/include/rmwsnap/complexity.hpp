#pragma once

// Shared-memory step counts of Scan over a grid of process and object
// counts, measured in the deterministic simulator.

#include <cstdint>
#include <optional>
#include <vector>

#include "rmwsnap/machine.hpp"

namespace rmwsnap {

struct ComplexityOptions {
  AlgorithmConfig config;
  std::vector<std::size_t> ns{2, 4, 8};
  std::vector<std::size_t> ms{2, 4, 8};
  /// Quiescent: p1 scans alone. Otherwise p2..pn update while p1 scans,
  /// under seeded random schedules.
  bool contention = true;
  std::uint32_t runs = 20;
  std::uint32_t scans = 2;
  std::uint32_t updates = 3;
  std::uint64_t seed = 1;
};

struct ComplexityCell {
  std::size_t n = 0;
  std::size_t m = 0;
  std::uint64_t scans = 0;
  std::uint64_t max_steps = 0;
  double mean_steps = 0;
  std::uint32_t max_iterations = 0;
  /// max_steps / (n^2 m).
  double ratio = 0;
  /// Step bound implied by the loop bound, when the variant has one.
  std::optional<std::uint64_t> bound;
};

struct ComplexityReport {
  Variant variant = Variant::ConcurrentWaitFree;
  bool contention = true;
  std::vector<ComplexityCell> cells;
  /// Smallest c with max_steps <= c n^2 m in every cell.
  double fitted_c = 0;
  /// Largest bound / (n^2 m) over the grid, when every cell has a bound.
  std::optional<double> analytic_c;
  double seconds = 0;
};

/// Worst-case steps of one wait-free concurrent Scan: at most
/// max(1, 8(n-1)) loop passes, each reading T three times, MEM once plus
/// floor(n/2) extra times, and one final help read.
std::uint64_t wait_free_scan_step_bound(std::size_t n, std::size_t m);

/// Worst-case steps of one wait-free solo-updater Scan.
std::uint64_t solo_wait_free_scan_step_bound(std::size_t m);

/// Throws ConfigError on an empty grid or zero sizes.
ComplexityReport measure_steps(const ComplexityOptions& options);

}  // namespace rmwsnap
