#include "rbsde/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace rbsde {

namespace {

constexpr int kMaxNodes = 1 << 22;
constexpr double kKernelSumTol = 1e-12;

void validate_law(const PeriodLaw& law, int num_marks, const std::string& where) {
  if (!(law.event_prob >= 0.0 && law.event_prob <= 1.0)) {
    throw InputError("event_prob outside [0,1] at " + where + ": " +
                     std::to_string(law.event_prob));
  }
  if (static_cast<int>(law.kernel.size()) != num_marks) {
    throw InputError("mark_kernel size mismatch at " + where);
  }
  double sum = 0.0;
  for (double p : law.kernel) {
    if (!(p >= 0.0)) throw InputError("negative kernel weight at " + where);
    sum += p;
  }
  if (std::abs(sum - 1.0) > kKernelSumTol) {
    throw InputError("mark_kernel does not sum to 1 at " + where + " (sum " +
                     std::to_string(sum) + ")");
  }
}

PeriodLaw normalized(PeriodLaw law) {
  double sum = std::accumulate(law.kernel.begin(), law.kernel.end(), 0.0);
  for (double& p : law.kernel) p /= sum;
  return law;
}

}  // namespace

ScenarioSpec ScenarioSpec::uniform(double horizon, int periods, int marks,
                                   double event_prob) {
  ScenarioSpec spec;
  spec.horizon = horizon;
  spec.periods = periods;
  for (int j = 0; j < marks; ++j) spec.marks.push_back(std::string(1, static_cast<char>('a' + j)));
  spec.event_prob.assign(periods, event_prob);
  spec.mark_kernel.assign(periods, std::vector<double>(marks, 1.0 / marks));
  return spec;
}

int EventTree::child_by_branch(int node, int branch) const {
  for (int c = first_child_[node]; c < first_child_[node] + num_children_[node]; ++c) {
    if (branch_[c] == branch) return c;
  }
  return -1;
}

struct TreeBuilder {
  static EventTree build(const ScenarioSpec& spec, const PeriodLawFn* law_fn);
};

EventTree TreeBuilder::build(const ScenarioSpec& spec,
                             const PeriodLawFn* law_fn) {
  if (!(spec.horizon > 0.0)) throw InputError("horizon must be positive");
  if (spec.periods < 1) throw InputError("periods must be >= 1");
  if (spec.marks.empty()) throw InputError("at least one mark required");
  const int m = static_cast<int>(spec.marks.size());

  if (law_fn == nullptr) {
    if (static_cast<int>(spec.event_prob.size()) != spec.periods) {
      throw InputError("event_prob must have one entry per period");
    }
    if (static_cast<int>(spec.mark_kernel.size()) != spec.periods) {
      throw InputError("mark_kernel must have one kernel per period");
    }
    for (int i = 0; i < spec.periods; ++i) {
      validate_law({spec.event_prob[i], spec.mark_kernel[i]}, m,
                   "period " + std::to_string(i + 1));
    }
  }

  EventTree tree;
  tree.horizon_ = spec.horizon;
  tree.periods_ = spec.periods;
  tree.marks_ = spec.marks;

  tree.level_.push_back(0);
  tree.parent_.push_back(-1);
  tree.branch_.push_back(EventTree::kNoEvent);
  tree.cond_prob_.push_back(1.0);
  tree.path_prob_.push_back(1.0);
  tree.cum_k_.push_back(0.0);
  tree.level_begin_ = {0, 1};

  for (int lvl = 0; lvl < spec.periods; ++lvl) {
    const int begin = tree.level_begin_[lvl];
    const int end = tree.level_begin_[lvl + 1];
    for (int node = begin; node < end; ++node) {
      PeriodLaw law;
      if (law_fn != nullptr) {
        law = (*law_fn)(tree, node);
        validate_law(law, m, "node " + std::to_string(node));
      } else {
        law = {spec.event_prob[lvl], spec.mark_kernel[lvl]};
      }
      law = normalized(std::move(law));

      tree.delta_k_.resize(static_cast<std::size_t>(node) + 1, 0.0);
      tree.phi_.resize((static_cast<std::size_t>(node) + 1) * m, 0.0);
      tree.delta_k_[node] = law.event_prob;
      std::copy(law.kernel.begin(), law.kernel.end(),
                tree.phi_.begin() + static_cast<std::size_t>(node) * m);

      tree.first_child_.resize(static_cast<std::size_t>(node) + 1, -1);
      tree.num_children_.resize(static_cast<std::size_t>(node) + 1, 0);
      tree.first_child_[node] = tree.num_nodes();

      auto add_child = [&](int branch, double prob) {
        if (prob == 0.0) return;
        tree.level_.push_back(lvl + 1);
        tree.parent_.push_back(node);
        tree.branch_.push_back(branch);
        tree.cond_prob_.push_back(prob);
        tree.path_prob_.push_back(tree.path_prob_[node] * prob);
        tree.cum_k_.push_back(tree.cum_k_[node] + law.event_prob);
        ++tree.num_children_[node];
      };
      add_child(EventTree::kNoEvent, 1.0 - law.event_prob);
      for (int j = 0; j < m; ++j) add_child(j, law.event_prob * law.kernel[j]);

      if (tree.num_nodes() > kMaxNodes) {
        throw InputError("scenario tree exceeds the node limit");
      }
    }
    tree.level_begin_.push_back(tree.num_nodes());
  }

  tree.leaf_begin_ = tree.level_begin_[spec.periods];
  tree.first_child_.resize(tree.level_.size(), -1);
  tree.num_children_.resize(tree.level_.size(), 0);
  return tree;
}

EventTree build_tree(const ScenarioSpec& spec) {
  return TreeBuilder::build(spec, nullptr);
}

EventTree build_tree(const ScenarioSpec& shape, const PeriodLawFn& law) {
  return TreeBuilder::build(shape, &law);
}

Obstacle constant_obstacle(const EventTree& tree, double value) {
  Obstacle obs;
  obs.at.assign(tree.num_nodes(), value);
  obs.post.assign(tree.num_nodes(), value);
  return obs;
}

Obstacle terminal_payoff_obstacle(const EventTree& tree,
                                  std::span<const double> by_event_count,
                                  double interior) {
  if (static_cast<int>(by_event_count.size()) != tree.periods() + 1) {
    throw InputError("terminal payoff needs periods+1 event-count entries");
  }
  Obstacle obs = constant_obstacle(tree, interior);
  for (int leaf = tree.leaf_begin(); leaf < tree.num_nodes(); ++leaf) {
    int events = 0;
    for (int node = leaf; node > 0; node = tree.parent(node)) {
      if (tree.branch(node) != EventTree::kNoEvent) ++events;
    }
    obs.at[leaf] = obs.post[leaf] = by_event_count[events];
  }
  return obs;
}

Obstacle terminal_payoff_obstacle_by_leaf(const EventTree& tree,
                                          std::span<const double> by_leaf,
                                          double interior) {
  if (static_cast<int>(by_leaf.size()) != tree.num_leaves()) {
    throw InputError("terminal payoff needs one entry per leaf");
  }
  Obstacle obs = constant_obstacle(tree, interior);
  for (int leaf = tree.leaf_begin(); leaf < tree.num_nodes(); ++leaf) {
    obs.at[leaf] = obs.post[leaf] = by_leaf[leaf - tree.leaf_begin()];
  }
  return obs;
}

ObstacleReport validate_obstacle(const EventTree& tree, const Obstacle& obs) {
  ObstacleReport report;
  const int n = tree.num_nodes();
  if (static_cast<int>(obs.at.size()) != n || static_cast<int>(obs.post.size()) != n) {
    report.violations.push_back({-1, "obstacle not defined on every node"});
    return report;
  }
  for (int node = 0; node < n; ++node) {
    if (!std::isfinite(obs.at[node]) || !std::isfinite(obs.post[node])) {
      report.violations.push_back({node, "non-finite obstacle value"});
    } else if (obs.at[node] < obs.post[node]) {
      report.violations.push_back(
          {node, "upward right jump (at < post) violates right upper-semicontinuity"});
    } else if (tree.is_leaf(node) && obs.at[node] != obs.post[node]) {
      report.violations.push_back({node, "terminal at/post values differ"});
    }
  }
  return report;
}

ScenarioSpec random_scenario(Rng& rng, const RandomScenarioParams& params) {
  int n = 0, m = 0;
  if (params.oracle_sized) {
    // Shapes whose full stopping-rule count stays within the oracle guard.
    static constexpr int shapes[][2] = {{1, 1}, {1, 2}, {2, 1}, {2, 2}, {3, 1}};
    int pick = rng.uniform_int(0, 4);
    n = std::clamp(shapes[pick][0], params.min_periods, params.max_periods);
    m = std::clamp(shapes[pick][1], params.min_marks, params.max_marks);
  } else {
    n = rng.uniform_int(params.min_periods, params.max_periods);
    m = rng.uniform_int(params.min_marks, params.max_marks);
  }

  ScenarioSpec spec;
  spec.horizon = params.horizon;
  spec.periods = n;
  for (int j = 0; j < m; ++j) spec.marks.push_back(std::string(1, static_cast<char>('a' + j)));
  for (int i = 0; i < n; ++i) {
    spec.event_prob.push_back(rng.uniform(params.dk_min, params.dk_max));
    std::vector<double> kernel(m);
    double sum = 0.0;
    for (double& w : kernel) {
      w = params.kernel_floor + rng.u01();
      sum += w;
    }
    for (double& w : kernel) w /= sum;
    spec.mark_kernel.push_back(std::move(kernel));
  }
  return spec;
}

Obstacle random_obstacle(Rng& rng, const EventTree& tree,
                         const RandomObstacleParams& params) {
  Obstacle obs;
  obs.at.resize(tree.num_nodes());
  obs.post.resize(tree.num_nodes());
  for (int node = 0; node < tree.num_nodes(); ++node) {
    const double base = rng.uniform(-params.scale, params.scale);
    obs.at[node] = base;
    if (tree.is_leaf(node) || params.right_continuous || !rng.bernoulli(params.right_jump_prob)) {
      obs.post[node] = base;
    } else {
      obs.post[node] = base - rng.uniform(0.0, params.max_jump);
    }
  }
  return obs;
}

std::vector<double> random_gain(Rng& rng, const EventTree& tree, double scale) {
  std::vector<double> g(tree.num_nodes(), 0.0);
  for (int node = 0; node < tree.num_interior(); ++node) {
    g[node] = rng.uniform(-scale, scale);
  }
  return g;
}

int inject_right_jump(Rng& rng, const EventTree& tree, Obstacle& obs,
                      double gain_bound) {
  const int node = rng.uniform_int(0, tree.num_interior() - 1);
  double hi = 0.0;
  for (double v : obs.at) hi = std::max(hi, std::abs(v));
  const double jump = rng.uniform(0.5, 1.5);
  // Above any value the continuation can reach, so the at-slot binds.
  obs.at[node] = hi + gain_bound * tree.horizon() + 1.0 + jump;
  obs.post[node] = obs.at[node] - jump;
  return node;
}

}  // namespace rbsde
