#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>

#include "rbsde/analysis.hpp"

namespace rbsde {

/// A scenario file resolved against its tree: obstacle realized on the
/// nodes, driver instantiated. Scenario files are JSON with fields
///   horizon, periods, marks, event_prob (scalar or per-period list),
///   mark_kernel (kernel or per-period list of kernels), seed,
///   obstacle {type: constant | terminal_payoff | table, ...},
///   driver {type: affine | frozen, ...}        (optional; default frozen 0)
struct LoadedScenario {
  ScenarioSpec spec;
  EventTree tree;
  Obstacle obstacle;
  bool frozen = true;                   // gain is state-independent
  std::vector<double> frozen_gain;      // resolved per-node rates, frozen case
  std::unique_ptr<Driver> driver;       // always set after a successful load
  std::uint64_t seed = 0;
};

LoadedScenario load_scenario_json(const std::string& json_text);
LoadedScenario load_scenario_file(const std::filesystem::path& path);

/// solution.csv: one `node` row per node (level, node id, time, obstacle and
/// solution slots, A/C increments, martingale) and one `z` row per
/// (interior node, mark). Full 17-digit precision, byte-stable.
void write_solution_csv(std::ostream& os, const EventTree& tree,
                        const Obstacle& obs, const RbsdeSolution& sol);

void write_diagnostics_json(std::ostream& os, const SolveDiagnostics& diag,
                            std::uint64_t seed = 0);

struct VerifyArtifacts {
  VerifyReport definition;
  FlatOffReport flat_off;
  double ito_defect = 0.0;
  std::optional<double> oracle_value;  // brute-force value when within guard
  std::optional<double> oracle_gap;    // |root value - oracle|
  bool all_pass = false;
};

void write_verify_json(std::ostream& os, const VerifyArtifacts& artifacts);

void write_compare_json(std::ostream& os, const CompareReport& report,
                        double y1_root, double y2_root);

}  // namespace rbsde
