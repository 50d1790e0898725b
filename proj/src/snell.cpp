#include "rbsde/snell.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rbsde {

namespace {

constexpr double kDecompositionTol = 1e-10;

void require_gain(const EventTree& tree, std::span<const double> gain) {
  if (static_cast<int>(gain.size()) < tree.num_interior()) {
    throw InputError("gain rate not defined on every interior node");
  }
  for (int node = 0; node < tree.num_interior(); ++node) {
    if (!std::isfinite(gain[node])) throw InputError("non-finite gain rate");
  }
}

void require_valid_obstacle(const EventTree& tree, const Obstacle& obs) {
  const auto report = validate_obstacle(tree, obs);
  if (!report.valid()) {
    throw InputError("invalid obstacle: " + report.violations.front().what +
                     " at node " + std::to_string(report.violations.front().node));
  }
}

double continuation(const EventTree& tree, std::span<const double> at,
                    std::span<const double> gain, int node) {
  double cont = gain[node] * tree.dt();
  for (int c = tree.first_child(node);
       c < tree.first_child(node) + tree.num_children(node); ++c) {
    cont += tree.cond_prob(c) * at[c];
  }
  return cont;
}

}  // namespace

LadlagProcess snell_envelope(const EventTree& tree, const Obstacle& obs,
                             std::span<const double> gain_rate) {
  require_valid_obstacle(tree, obs);
  require_gain(tree, gain_rate);
  LadlagProcess y = LadlagProcess::zeros(tree);
  for (int node = tree.num_nodes() - 1; node >= 0; --node) {
    if (tree.is_leaf(node)) {
      y.at[node] = y.post[node] = obs.at[node];
      continue;
    }
    const double cont = continuation(tree, y.at, gain_rate, node);
    y.post[node] = std::max(obs.post[node], cont);
    y.at[node] = std::max(obs.at[node], y.post[node]);
  }
  return y;
}

MertensParts mertens_decompose(const EventTree& tree, const LadlagProcess& y,
                               std::span<const double> gain_rate) {
  require_gain(tree, gain_rate);
  if (static_cast<int>(y.at.size()) != tree.num_nodes() ||
      static_cast<int>(y.post.size()) != tree.num_nodes()) {
    throw InputError("process not defined on every node");
  }

  MertensParts parts;
  parts.martingale.assign(tree.num_nodes(), 0.0);
  parts.a_cum.assign(tree.num_nodes(), 0.0);
  parts.c_cum.assign(tree.num_nodes(), 0.0);
  parts.delta_a.assign(tree.num_nodes(), 0.0);
  parts.delta_c.assign(tree.num_nodes(), 0.0);

  auto checked = [&](double inc, int node, const char* what) {
    if (inc < 0.0) {
      if (inc < -kDecompositionTol) {
        throw DecompositionError(
            std::string("supermartingale violation: negative ") + what +
                " increment " + std::to_string(inc) + " at node " +
                std::to_string(node),
            node, inc);
      }
      return 0.0;
    }
    return inc;
  };

  for (int node = 0; node < tree.num_nodes(); ++node) {
    const double dc = checked(y.at[node] - y.post[node], node, "C");
    const int p = tree.parent(node);
    parts.delta_c[node] = dc;
    parts.c_cum[node] = (p < 0 ? 0.0 : parts.c_cum[p]) + dc;
    if (tree.is_leaf(node)) continue;

    // The continuation must be accumulated exactly as the envelope builds
    // it, so unconstrained nodes yield a bitwise-zero A increment.
    const double cont = continuation(tree, y.at, gain_rate, node);
    const double da = checked(y.post[node] - cont, node, "A");
    parts.delta_a[node] = da;
    double mean = 0.0;
    for (int c = tree.first_child(node);
         c < tree.first_child(node) + tree.num_children(node); ++c) {
      mean += tree.cond_prob(c) * y.at[c];
    }
    for (int c = tree.first_child(node);
         c < tree.first_child(node) + tree.num_children(node); ++c) {
      parts.a_cum[c] = parts.a_cum[node] + da;
      parts.martingale[c] = parts.martingale[node] + (y.at[c] - mean);
    }
  }
  return parts;
}

StoppingRule epsilon_optimal_time(const EventTree& tree,
                                  const LadlagProcess& y, const Obstacle& obs,
                                  int start, double eps, bool allow_post_hits) {
  if (start < 0 || start >= tree.num_nodes()) throw InputError("bad start node");
  if (eps < 0.0) throw InputError("eps must be nonnegative");
  StoppingRule rule;
  rule.start = start;
  rule.action.assign(tree.num_nodes(), StopAction::Continue);

  // Depth-first labeling; stops cut the recursion so descendants stay
  // Continue (irrelevant to the rule).
  std::vector<int> stack = {start};
  while (!stack.empty()) {
    const int node = stack.back();
    stack.pop_back();
    if (y.at[node] <= obs.at[node] + eps || tree.is_leaf(node)) {
      rule.action[node] = StopAction::StopAt;
      continue;
    }
    if (allow_post_hits && y.post[node] <= obs.post[node] + eps) {
      rule.action[node] = StopAction::StopRightAfter;
      continue;
    }
    for (int c = tree.first_child(node);
         c < tree.first_child(node) + tree.num_children(node); ++c) {
      stack.push_back(c);
    }
  }
  return rule;
}

double rule_value(const EventTree& tree, const Obstacle& obs,
                  std::span<const double> gain_rate, const StoppingRule& rule,
                  int node) {
  switch (rule.action[node]) {
    case StopAction::StopAt:
      return obs.at[node];
    case StopAction::StopRightAfter:
      if (tree.is_leaf(node)) throw InputError("leaf cannot stop right after");
      return obs.post[node];
    case StopAction::Continue:
      break;
  }
  if (tree.is_leaf(node)) return obs.at[node];  // forced terminal stop
  double v = gain_rate[node] * tree.dt();
  for (int c = tree.first_child(node);
       c < tree.first_child(node) + tree.num_children(node); ++c) {
    v += tree.cond_prob(c) * rule_value(tree, obs, gain_rate, rule, c);
  }
  return v;
}

FlatOffReport check_flat_off(const EventTree& tree, const MertensParts& parts,
                             const LadlagProcess& y, const Obstacle& obs,
                             const StoppingRule& rule, double eps) {
  FlatOffReport report;
  // Collect the stop node on each path below the rule's start.
  std::vector<int> stops;
  std::vector<int> stack = {rule.start};
  while (!stack.empty()) {
    const int node = stack.back();
    stack.pop_back();
    if (rule.action[node] != StopAction::Continue || tree.is_leaf(node)) {
      stops.push_back(node);
      continue;
    }
    for (int c = tree.first_child(node);
         c < tree.first_child(node) + tree.num_children(node); ++c) {
      stack.push_back(c);
    }
  }

  for (const int stop : stops) {
    // A + C_- sampled at each grid time from the start to the stop.
    bool flat = true;
    const double ref = parts.a_cum[rule.start] + parts.c_before(tree, rule.start);
    for (int node = stop;; node = tree.parent(node)) {
      const double v = parts.a_cum[node] + parts.c_before(tree, node);
      if (v != ref) flat = false;
      if (node == rule.start) break;
    }
    const bool touches = rule.action[stop] == StopAction::StopRightAfter
                             ? y.post[stop] <= obs.post[stop] + eps
                             : y.at[stop] <= obs.at[stop] + eps;
    // One entry per leaf below the stop, so the report is per path.
    std::vector<int> leaves_stack = {stop};
    while (!leaves_stack.empty()) {
      const int node = leaves_stack.back();
      leaves_stack.pop_back();
      if (tree.is_leaf(node)) {
        report.paths.push_back({node, stop, flat, touches});
        continue;
      }
      for (int c = tree.first_child(node);
           c < tree.first_child(node) + tree.num_children(node); ++c) {
        leaves_stack.push_back(c);
      }
    }
  }
  return report;
}

}  // namespace rbsde
