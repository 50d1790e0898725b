#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rbsde/errors.hpp"

namespace rbsde {

/// One-period branching law: probability of an event and the mark kernel
/// conditional on an event.
struct PeriodLaw {
  double event_prob = 0.0;             // ΔK for the period, in [0,1]
  std::vector<double> kernel;          // φ over the marks, sums to 1
};

/// Declarative description of a scenario tree. Event probabilities and mark
/// kernels are per period here; node-dependent laws go through the
/// PeriodLawFn overload of build_tree.
struct ScenarioSpec {
  double horizon = 1.0;                        // T > 0
  int periods = 1;                             // n >= 1
  std::vector<std::string> marks;              // u_1..u_m, m >= 1
  std::vector<double> event_prob;              // size n, each in [0,1]
  std::vector<std::vector<double>> mark_kernel;  // n kernels of size m
  std::uint64_t seed = 0;

  /// n periods, m marks named a,b,..., constant event probability and a
  /// uniform kernel.
  static ScenarioSpec uniform(double horizon, int periods, int marks,
                              double event_prob);
};

/// Finite event tree. Nodes are stored level by level (breadth first), the
/// root is node 0 and the leaves are the contiguous tail. A node at level i
/// sits at time t_i = i*T/n; its children realize period i+1. Interior nodes
/// carry the period law governing their children, so the one-step compensator
/// nu({t_{i+1}} x {u_j}) = delta_k * phi_j is parent-measurable. Children
/// with exactly zero conditional probability are not materialized.
class EventTree {
 public:
  static constexpr int kNoEvent = -1;  // branch label of the no-event child

  int num_nodes() const { return static_cast<int>(level_.size()); }
  int num_interior() const { return leaf_begin_; }
  int periods() const { return periods_; }
  int num_marks() const { return static_cast<int>(marks_.size()); }
  double horizon() const { return horizon_; }
  double dt() const { return horizon_ / periods_; }
  const std::vector<std::string>& marks() const { return marks_; }

  int level(int node) const { return level_[node]; }
  int parent(int node) const { return parent_[node]; }
  /// kNoEvent or the mark index of the branch leading into `node`.
  int branch(int node) const { return branch_[node]; }
  double cond_prob(int node) const { return cond_prob_[node]; }
  double path_prob(int node) const { return path_prob_[node]; }

  bool is_leaf(int node) const { return node >= leaf_begin_; }
  int leaf_begin() const { return leaf_begin_; }
  int num_leaves() const { return num_nodes() - leaf_begin_; }
  int first_child(int node) const { return first_child_[node]; }
  int num_children(int node) const { return num_children_[node]; }
  /// Child reached by `branch` (kNoEvent or mark index); -1 if that branch
  /// has zero probability and was pruned.
  int child_by_branch(int node, int branch) const;

  double time_of_level(int level) const { return horizon_ * level / periods_; }
  double time_of(int node) const { return time_of_level(level_[node]); }

  /// Event probability ΔK of the period starting at interior `node`.
  double delta_k(int node) const { return delta_k_[node]; }
  /// Mark kernel φ of the period starting at interior `node`.
  std::span<const double> phi(int node) const {
    return {phi_.data() + static_cast<std::size_t>(node) * num_marks(),
            static_cast<std::size_t>(num_marks())};
  }
  /// One-step compensator mass on mark j at interior `node`.
  double compensator(int node, int mark) const {
    return delta_k_[node] * phi(node)[mark];
  }
  /// Cumulative jump intensity K_{t_i} along the path into `node`.
  double cum_k(int node) const { return cum_k_[node]; }

  int level_begin(int level) const { return level_begin_[level]; }
  int level_end(int level) const { return level_begin_[level + 1]; }

 private:
  friend struct TreeBuilder;

  double horizon_ = 1.0;
  int periods_ = 1;
  std::vector<std::string> marks_;
  int leaf_begin_ = 0;
  std::vector<int> level_, parent_, branch_, first_child_, num_children_;
  std::vector<double> cond_prob_, path_prob_, cum_k_;
  std::vector<double> delta_k_;  // per interior node
  std::vector<double> phi_;      // per interior node, m entries each
  std::vector<int> level_begin_;
};

struct TreeBuilder;

EventTree build_tree(const ScenarioSpec& spec);

/// Node-dependent laws: the callback sees the partially built tree and the
/// parent node and returns the law for the period starting there.
using PeriodLawFn = std::function<PeriodLaw(const EventTree&, int parent)>;
EventTree build_tree(const ScenarioSpec& shape, const PeriodLawFn& law);

/// Lower obstacle: a ladlag reward with an at-value and a post-value per
/// node. Right upper-semicontinuity requires at >= post everywhere; at the
/// leaves the two slots must coincide (terminal payoff).
struct Obstacle {
  std::vector<double> at, post;
};

Obstacle constant_obstacle(const EventTree& tree, double value);
/// Terminal payoff as a function of the number of events along the path
/// (size periods+1); interior at/post both equal `interior`.
Obstacle terminal_payoff_obstacle(const EventTree& tree,
                                  std::span<const double> by_event_count,
                                  double interior);
/// Terminal payoff given per leaf in node order; interior as above.
Obstacle terminal_payoff_obstacle_by_leaf(const EventTree& tree,
                                          std::span<const double> by_leaf,
                                          double interior);

struct ObstacleReport {
  struct Violation {
    int node;
    std::string what;
  };
  std::vector<Violation> violations;
  bool valid() const { return violations.empty(); }
};

ObstacleReport validate_obstacle(const EventTree& tree, const Obstacle& obs);

/// Deterministic uniform helpers; std::uniform_real_distribution is
/// implementation-defined, these are not.
struct Rng {
  explicit Rng(std::uint64_t seed) : engine(seed) {}
  std::mt19937_64 engine;
  double u01() { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }
  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(engine() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  bool bernoulli(double p) { return u01() < p; }
};

struct RandomScenarioParams {
  int min_periods = 1, max_periods = 4;
  int min_marks = 1, max_marks = 2;
  double horizon = 1.0;
  double dk_min = 0.05, dk_max = 0.95;
  double kernel_floor = 0.15;  // smallest kernel weight before normalization
  /// Restrict (periods, marks) to shapes whose stopping-rule count stays
  /// within the exhaustive-enumeration guard.
  bool oracle_sized = false;
};

ScenarioSpec random_scenario(Rng& rng, const RandomScenarioParams& params);

struct RandomObstacleParams {
  double scale = 1.0;            // base values drawn from [-scale, scale]
  double right_jump_prob = 0.4;  // chance of a downward right jump per node
  double max_jump = 1.0;
  bool right_continuous = false;  // force post == at everywhere
};

Obstacle random_obstacle(Rng& rng, const EventTree& tree,
                         const RandomObstacleParams& params);

/// Per-node gain rates in [-scale, scale] (leaves unused by the solvers).
std::vector<double> random_gain(Rng& rng, const EventTree& tree, double scale);

/// Force a downward right jump at a random interior node and make the
/// obstacle bind there: the at-value is raised above anything the
/// continuation can reach given |gain| <= gain_bound. Returns the node.
int inject_right_jump(Rng& rng, const EventTree& tree, Obstacle& obs,
                      double gain_bound);

}  // namespace rbsde
