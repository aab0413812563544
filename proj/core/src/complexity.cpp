#include "rmwsnap/complexity.hpp"

#include <algorithm>
#include <chrono>
#include <random>

#include "rmwsnap/simulator.hpp"

namespace rmwsnap {

std::uint64_t wait_free_scan_step_bound(std::size_t n, std::size_t m) {
  std::uint64_t passes = std::max<std::uint64_t>(1, 8 * (n - 1));
  std::uint64_t per_pass = 3 * n + m + (n / 2) * m;
  return passes * per_pass + 1;
}

std::uint64_t solo_wait_free_scan_step_bound(std::size_t m) { return 2 * (2 + m) + 1; }

namespace {

Scenario cell_scenario(const ComplexityOptions& o, std::size_t n, std::size_t m) {
  Scenario s;
  s.name = "bench-n" + std::to_string(n) + "-m" + std::to_string(m);
  s.config = o.config;
  s.type_names.assign(m, "counter");
  s.layout = make_layout(s.type_names, {});
  s.processes.resize(n);
  for (std::uint32_t i = 0; i < o.scans; ++i) s.processes[0].ops.push_back(Operation::scan());
  if (o.contention) {
    // Solo variants admit a single updater.
    auto updaters = is_solo(o.config.variant) ? std::min<std::size_t>(n, 2) : n;
    for (std::size_t p = 1; p < updaters; ++p) {
      for (std::uint32_t u = 0; u < o.updates; ++u) {
        auto k = (p + u) % m;
        s.processes[p].ops.push_back(Operation::update(k, {"add", {1}}));
      }
    }
  }
  s.explore.iteration_budget = 1'000'000;
  s.source = s.name;
  return s;
}

}  // namespace

ComplexityReport measure_steps(const ComplexityOptions& options) {
  if (options.ns.empty() || options.ms.empty()) throw ConfigError("bench grid is empty");
  for (auto n : options.ns) {
    if (n == 0 || n > 64) throw ConfigError("bench: n must lie in [1, 64]");
  }
  for (auto m : options.ms) {
    if (m == 0 || m > 64) throw ConfigError("bench: m must lie in [1, 64]");
  }
  if (options.runs == 0 || options.scans == 0) throw ConfigError("bench: runs and scans must be positive");
  auto start = std::chrono::steady_clock::now();

  ComplexityReport report;
  report.variant = options.config.variant;
  report.contention = options.contention;
  bool every_bound = true;
  double analytic = 0;
  std::mt19937_64 rng(options.seed);

  for (auto n : options.ns) {
    for (auto m : options.ms) {
      auto scenario = cell_scenario(options, n, m);
      ComplexityCell cell;
      cell.n = n;
      cell.m = m;
      double total = 0;
      auto runs = options.contention ? options.runs : 1;
      for (std::uint32_t r = 0; r < runs; ++r) {
        SimOptions so;
        so.record = true;
        so.monitor = false;
        so.iteration_budget = scenario.explore.iteration_budget;
        Simulation sim(scenario, so);
        while (!sim.terminal()) {
          auto choices = sim.choices(0);
          std::uniform_int_distribution<std::size_t> pick(0, choices.size() - 1);
          sim.apply(choices[pick(rng)]);
        }
        for (const auto& scan : sim.scans()) {
          ++cell.scans;
          total += static_cast<double>(scan.stats.steps);
          cell.max_steps = std::max(cell.max_steps, scan.stats.steps);
          cell.max_iterations = std::max(cell.max_iterations, scan.stats.iterations);
        }
      }
      cell.mean_steps = cell.scans ? total / static_cast<double>(cell.scans) : 0;
      auto scale = static_cast<double>(n * n * m);
      cell.ratio = static_cast<double>(cell.max_steps) / scale;
      bool faithful = options.config.mutant == Mutant::None;
      if (faithful && options.config.variant == Variant::ConcurrentWaitFree) {
        cell.bound = wait_free_scan_step_bound(n, m);
      } else if (faithful && options.config.variant == Variant::SoloWaitFree) {
        cell.bound = solo_wait_free_scan_step_bound(m);
      }
      if (cell.bound) {
        analytic = std::max(analytic, static_cast<double>(*cell.bound) / scale);
      } else {
        every_bound = false;
      }
      report.fitted_c = std::max(report.fitted_c, cell.ratio);
      report.cells.push_back(cell);
    }
  }
  if (every_bound) report.analytic_c = analytic;
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace rmwsnap
