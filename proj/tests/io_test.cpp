#include <sstream>

#include "doctest.h"
#include "rbsde/io.hpp"

using namespace rbsde;

namespace {

const char* kTwoPeriod = R"({
  "horizon": 1.0,
  "periods": 2,
  "marks": ["a", "b"],
  "event_prob": 0.5,
  "mark_kernel": [0.5, 0.5],
  "obstacle": {"type": "terminal_payoff", "by_event_count": [0.0, 1.0, 1.0], "interior": 0.0},
  "seed": 7
})";

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("scenario loading") {
  const auto s = load_scenario_json(kTwoPeriod);
  CHECK(s.tree.num_nodes() == 13);
  CHECK(s.seed == 7);
  CHECK(s.frozen);
  const auto sol = solve_frozen(s.tree, s.obstacle, s.frozen_gain);
  CHECK(sol.y.at[0] == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("per-period lists and affine drivers") {
  const char* text = R"({
    "horizon": 2.0,
    "periods": 2,
    "marks": ["a"],
    "event_prob": [0.3, 0.6],
    "mark_kernel": [[1.0], [1.0]],
    "obstacle": {"type": "constant", "value": -1.0},
    "driver": {"type": "affine", "a": 0.1, "b": [0.2], "g0": [0.0, 0.5]}
  })";
  const auto s = load_scenario_json(text);
  CHECK_FALSE(s.frozen);
  CHECK(s.tree.delta_k(0) == 0.3);
  const auto sol = picard_solve(s.tree, s.obstacle, *s.driver);
  CHECK(sol.diagnostics.converged);
}

TEST_CASE("frozen driver forms") {
  const char* scalar = R"({
    "horizon": 1.0, "periods": 1, "marks": ["a"],
    "event_prob": 0.5, "mark_kernel": [1.0],
    "obstacle": {"type": "constant", "value": 0.0},
    "driver": {"type": "frozen", "g": 1.0}
  })";
  const auto s = load_scenario_json(scalar);
  CHECK(s.frozen_gain[0] == 1.0);
  const auto sol = solve_frozen(s.tree, s.obstacle, s.frozen_gain);
  CHECK(sol.y.at[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("malformed inputs carry the offending location") {
  SUBCASE("kernel sum") {
    const char* text = R"({
      "horizon": 1.0, "periods": 2, "marks": ["a", "b"],
      "event_prob": 0.5,
      "mark_kernel": [[0.5, 0.5], [0.5, 0.4]],
      "obstacle": {"type": "constant", "value": 0.0}
    })";
    CHECK_THROWS_WITH_AS(load_scenario_json(text), doctest::Contains("period 2"),
                         InputError);
  }
  SUBCASE("json syntax") {
    CHECK_THROWS_AS(load_scenario_json("{"), InputError);
  }
  SUBCASE("upward right jump in a table obstacle") {
    const char* text = R"({
      "horizon": 1.0, "periods": 1, "marks": ["a"],
      "event_prob": 0.5, "mark_kernel": [1.0],
      "obstacle": {"type": "table",
                   "at":   [0.0, 0.0, 0.0],
                   "post": [1.0, 0.0, 0.0]}
    })";
    CHECK_THROWS_WITH_AS(load_scenario_json(text), doctest::Contains("node 0"),
                         InputError);
  }
}

TEST_CASE("solution csv is deterministic and carries the root row") {
  const auto s = load_scenario_json(kTwoPeriod);
  const auto sol = solve_frozen(s.tree, s.obstacle, s.frozen_gain);
  std::ostringstream a, b;
  write_solution_csv(a, s.tree, s.obstacle, sol);
  write_solution_csv(b, s.tree, s.obstacle, sol);
  CHECK(a.str() == b.str());
  CHECK(a.str().find("node,0,0,0,0,0,0.75,0.75,0,0,0") != std::string::npos);
  // One z row per (interior node, mark).
  std::size_t z_rows = 0;
  std::istringstream in(a.str());
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("z,", 0) == 0) ++z_rows;
  }
  CHECK(z_rows == static_cast<std::size_t>(s.tree.num_interior() * s.tree.num_marks()));
}

TEST_CASE("diagnostics and verification reports serialize") {
  const auto s = load_scenario_json(kTwoPeriod);
  const auto sol = solve_frozen(s.tree, s.obstacle, s.frozen_gain);
  std::ostringstream diag;
  write_diagnostics_json(diag, sol.diagnostics);
  CHECK(diag.str().find("\"iterations\"") != std::string::npos);

  VerifyArtifacts artifacts;
  artifacts.definition = verify_solution(s.tree, sol, s.obstacle, *s.driver);
  const auto rule = epsilon_optimal_time(s.tree, sol.y, s.obstacle, 0, 0.0);
  artifacts.flat_off = check_flat_off(s.tree, sol.parts, sol.y, s.obstacle, rule, 0.0);
  const auto dec = solution_decomposition(s.tree, sol);
  artifacts.ito_defect = ito_identity_check(s.tree, sol.y, dec, 0.0);
  artifacts.oracle_value = brute_force_value(s.tree, s.obstacle, s.frozen_gain);
  artifacts.oracle_gap = std::abs(*artifacts.oracle_value - sol.y.at[0]);
  artifacts.all_pass = artifacts.definition.all_pass() && artifacts.flat_off.all_ok();
  std::ostringstream verify;
  write_verify_json(verify, artifacts);
  CHECK(verify.str().find("\"all_pass\": true") != std::string::npos);
}

TEST_SUITE_END();
