#pragma once

#include <span>
#include <vector>

#include "rbsde/rbsde.hpp"

namespace rbsde {

/// Exhaustive enumeration of every adapted stopping rule below `start`
/// (stop at the at-value, stop right after on the post-value, or continue
/// and collect the period gain), returning the best expected reward. The
/// rule count is guarded; past the guard an OracleTooLargeError is thrown.
double brute_force_value(const EventTree& tree, const Obstacle& obs,
                         std::span<const double> gain_rate, int start = 0,
                         double guard = 1e4);

/// Number of adapted stopping rules on the subtree below `start`,
/// saturating at `cap`.
double stopping_rule_count(const EventTree& tree, int start, double cap = 1e18);

struct CompareReport {
  bool obstacles_ordered = true;     // obs1 <= obs2 in both slots
  bool driver_hypothesis_ok = true;  // one-sided ordering at the solved paths
  bool in_hypothesis() const { return obstacles_ordered && driver_hypothesis_ok; }
  bool conclusion_holds = true;      // y1 <= y2 within tolerance, both slots
  double max_violation = 0.0;
  int worst_node = -1;
  double tolerance = 1e-10;
};

/// Solve both equations and test the comparison conclusion. The driver
/// hypothesis is checked at the solved arguments: wherever y1 > y2, one of
/// the one-sided differences f1 - f2 (evaluated at the first or at the
/// second solution's arguments) must be nonpositive. Out-of-hypothesis
/// instances are flagged, not failed.
CompareReport compare(const EventTree& tree, const Obstacle& obs1,
                      const Driver& f1, const Obstacle& obs2, const Driver& f2,
                      const PicardParams& params = {}, double tolerance = 1e-10);

struct AprioriReport {
  double z_distance = 0.0;      // squared weighted norm of z1 - z2
  double gain_bound = 0.0;      // eps^2 * weighted squared gain difference
  bool z_estimate_ok = true;    // z_distance <= gain_bound (tolerance-padded)
  double y_distance = 0.0;      // squared weighted norm of y1 - y2
  double y_ratio = 0.0;         // y_distance / gain_bound, reported only
  /// Discrete sufficient condition 1 - e^{-beta dt} >= dt/eps^2 under which
  /// the z-estimate is provable on this grid.
  bool grid_condition_ok = true;
};

/// Frozen-driver stability estimate: solve with gains g1 and g2 against the
/// same obstacle and compare the z-distance with the weighted gain
/// difference. Requires beta > 1/eps^2.
AprioriReport apriori_check(const EventTree& tree, const Obstacle& obs,
                            std::span<const double> g1,
                            std::span<const double> g2, double eps, double beta);

/// Optional-semimartingale decomposition X = X0 + M + A + B with M a
/// martingale path, A right-continuous finite variation constant between
/// grid jumps, B left-continuous purely discontinuous (right jumps only).
struct OptionalDecomposition {
  MartingalePath martingale;      // M per node, 0 at the root
  std::vector<double> a_part;     // A at the node's time
  std::vector<double> b_part;     // B at the node's time (before its right jump)
};

/// Pathwise change-of-variables identity for e^{beta t} X_t² on the grid:
/// both sides are accumulated per path from the components and the largest
/// defect over (path, grid point) is returned. Inconsistent decompositions
/// (X != X0 + M + A + B at some slot) are rejected with InputError.
double ito_identity_check(const EventTree& tree, const LadlagProcess& x,
                          const OptionalDecomposition& dec, double beta,
                          double consistency_tol = 1e-9);

/// Decomposition of a solved equation in the above shape: M from the
/// solution, A lumping the realized -(gain dt + A charge) per period, B =
/// -C_-. Derived from the solved slot values so the reassembly is exact to
/// rounding, independent of how the gains were produced.
OptionalDecomposition solution_decomposition(const EventTree& tree,
                                             const RbsdeSolution& sol);

}  // namespace rbsde
