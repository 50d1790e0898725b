#pragma once

#include <span>
#include <vector>

#include "rbsde/martingale.hpp"
#include "rbsde/processes.hpp"

namespace rbsde {

/// Adapted stopping decision per node. Along every path the first StopAt or
/// StopRightAfter encountered is where the path stops; leaves always stop at
/// their at-value. StopRightAfter models stopping inside the open interval
/// after the node: it collects the post-value and no gain for the interval.
enum class StopAction : unsigned char { Continue, StopAt, StopRightAfter };

struct StoppingRule {
  std::vector<StopAction> action;
  int start = 0;
};

/// Mertens decomposition of the envelope after gain adjustment:
///   Y_t = Y_0 - sum of gains + M_t - A_t - C_{t-}   along every path.
/// M is a martingale (zero at the root); A is the cumulative nondecreasing
/// predictable part, right-continuous, A at t_0 = 0, each increment charged
/// at the child time and determined at the parent; C is the cumulative
/// nondecreasing purely discontinuous part collecting the right jumps,
/// C at t_i = sum of at-minus-post drops up to and including t_i.
struct MertensParts {
  MartingalePath martingale;
  std::vector<double> a_cum;    // A at the node's time
  std::vector<double> c_cum;    // C at the node's time
  std::vector<double> delta_a;  // per interior node: increment into its children
  std::vector<double> delta_c;  // per node: right-jump charge at its time

  double delta_a_into(const EventTree& tree, int child) const {
    return delta_a[tree.parent(child)];
  }
  /// C_{t-} at the node's time: cumulative C of the parent.
  double c_before(const EventTree& tree, int node) const {
    const int p = tree.parent(node);
    return p < 0 ? 0.0 : c_cum[p];
  }
};

/// Value process of optimal stopping with reward `obs` and per-node running
/// gain rate (the gain contributes rate * dt per period). Backward recursion:
///   leaves:  at = post = terminal value
///   interior: post = max(obs.post, g*dt + sum p(c) at(c)),
///             at   = max(obs.at, post).
/// The result dominates the obstacle in both slots and satisfies
/// at = max(obs.at, post) at every node.
LadlagProcess snell_envelope(const EventTree& tree, const Obstacle& obs,
                             std::span<const double> gain_rate);

/// Decompose a gain-adjusted strong supermartingale. Throws
/// DecompositionError if an increment of A or C is negative beyond 1e-10;
/// smaller negatives (floating-point dust on foreign inputs) clamp to zero.
MertensParts mertens_decompose(const EventTree& tree, const LadlagProcess& y,
                               std::span<const double> gain_rate);

/// First-hitting rule from `start`: stop at the first node (in path order)
/// whose at-value is within eps of the obstacle. With allow_post_hits the
/// rule may also stop right after a node whose post-value is within eps
/// (non-default variant). Every path hits by the horizon.
StoppingRule epsilon_optimal_time(const EventTree& tree,
                                  const LadlagProcess& y, const Obstacle& obs,
                                  int start, double eps,
                                  bool allow_post_hits = false);

/// E[ reward at the rule's stop + gains collected before it | node ].
double rule_value(const EventTree& tree, const Obstacle& obs,
                  std::span<const double> gain_rate, const StoppingRule& rule,
                  int node);

struct FlatOffReport {
  struct PathCheck {
    int leaf;
    int stop_node;
    bool flat;          // A + C_- constant between start and the stop
    bool stop_touches;  // Y <= obs + eps at the stop node
  };
  std::vector<PathCheck> paths;
  bool all_ok() const {
    for (const auto& p : paths) {
      if (!p.flat || !p.stop_touches) return false;
    }
    return true;
  }
};

/// Verifies, path by path below the rule's start, that A + C_- does not
/// charge on the stochastic interval up to the hitting time and that the
/// envelope touches the obstacle (within eps) where the rule stops.
FlatOffReport check_flat_off(const EventTree& tree, const MertensParts& parts,
                             const LadlagProcess& y, const Obstacle& obs,
                             const StoppingRule& rule, double eps);

}  // namespace rbsde
