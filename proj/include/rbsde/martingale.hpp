#pragma once

#include <span>
#include <vector>

#include "rbsde/processes.hpp"

namespace rbsde {

/// One value per node, zero at the root. A valid path satisfies the tower
/// property: the probability-weighted child mean equals the node value.
using MartingalePath = std::vector<double>;

/// Exact probability-weighted average of a terminal payoff over the subtree
/// below `node`. The payoff is indexed by leaf ordinal (leaf id - leaf_begin).
double conditional_expectation(const EventTree& tree, int node,
                               std::span<const double> payoff_by_leaf);

/// Stochastic integral of a predictable field against the compensated
/// measure: the increment into a child is Z(u) - Zbar on branch u and -Zbar
/// on the no-event branch. The result is a martingale, exactly.
MartingalePath integrate(const EventTree& tree, const PredictableField& z);

/// Inverse of integrate: recovers Z(u) = m(u) - m0 from the branch
/// increments, with m0 = 0 when the no-event branch is unreachable (ΔK = 1).
/// Rows of pruned branches are left at 0. Throws RepresentationError when the
/// input fails the martingale property beyond `tol`.
PredictableField represent(const EventTree& tree, const MartingalePath& m,
                           double tol = 1e-10);

/// One-period increment of the predictable bracket at an interior node:
/// ΔK Σ φ |Z - Zbar|² + (1-ΔK) Zbar². Equals the conditional variance of the
/// integral's increment.
double bracket_increment(const EventTree& tree, const PredictableField& z,
                         int node);

/// Cumulative predictable bracket along paths, zero at the root. Satisfies
/// E[bracket at T] = E[M_T²] for M = integrate(Z), exactly.
std::vector<double> bracket(const EventTree& tree, const PredictableField& z);

}  // namespace rbsde
