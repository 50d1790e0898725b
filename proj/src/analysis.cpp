#include "rbsde/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rbsde {

double stopping_rule_count(const EventTree& tree, int start, double cap) {
  std::vector<double> count(tree.num_nodes(), 1.0);
  for (int node = tree.num_nodes() - 1; node >= start; --node) {
    if (tree.is_leaf(node)) continue;
    double prod = 1.0;
    for (int c = tree.first_child(node);
         c < tree.first_child(node) + tree.num_children(node); ++c) {
      prod *= count[c];
      if (prod > cap) {
        prod = cap;
        break;
      }
    }
    count[node] = std::min(2.0 + prod, cap);
  }
  return count[start];
}

namespace {

// All attainable rule values on the subtree below `node`: stop now, stop
// right after, or continue with every combination of child rules.
std::vector<double> enumerate_rule_values(const EventTree& tree,
                                          const Obstacle& obs,
                                          std::span<const double> gain,
                                          int node) {
  if (tree.is_leaf(node)) return {obs.at[node]};
  std::vector<std::vector<double>> child_values;
  std::vector<int> child_ids;
  for (int c = tree.first_child(node);
       c < tree.first_child(node) + tree.num_children(node); ++c) {
    child_values.push_back(enumerate_rule_values(tree, obs, gain, c));
    child_ids.push_back(c);
  }
  std::vector<double> values = {obs.at[node], obs.post[node]};
  std::vector<std::size_t> odo(child_values.size(), 0);
  const double base = gain[node] * tree.dt();
  while (true) {
    double v = base;
    for (std::size_t k = 0; k < odo.size(); ++k) {
      v += tree.cond_prob(child_ids[k]) * child_values[k][odo[k]];
    }
    values.push_back(v);
    std::size_t k = 0;
    while (k < odo.size() && ++odo[k] == child_values[k].size()) {
      odo[k] = 0;
      ++k;
    }
    if (k == odo.size()) break;
  }
  return values;
}

}  // namespace

double brute_force_value(const EventTree& tree, const Obstacle& obs,
                         std::span<const double> gain_rate, int start,
                         double guard) {
  const double rules = stopping_rule_count(tree, start, guard * 2);
  if (rules > guard) {
    throw OracleTooLargeError(
        "stopping-rule enumeration too large: " + std::to_string(rules) +
            " rules exceeds the guard " + std::to_string(guard),
        rules, guard);
  }
  const auto values = enumerate_rule_values(tree, obs, gain_rate, start);
  return *std::max_element(values.begin(), values.end());
}

CompareReport compare(const EventTree& tree, const Obstacle& obs1,
                      const Driver& f1, const Obstacle& obs2, const Driver& f2,
                      const PicardParams& params, double tolerance) {
  CompareReport report;
  report.tolerance = tolerance;
  for (int node = 0; node < tree.num_nodes(); ++node) {
    if (obs1.at[node] > obs2.at[node] || obs1.post[node] > obs2.post[node]) {
      report.obstacles_ordered = false;
      break;
    }
  }

  const RbsdeSolution s1 = picard_solve(tree, obs1, f1, params);
  const RbsdeSolution s2 = picard_solve(tree, obs2, f2, params);

  // One-sided driver ordering where the conclusion is at risk, evaluated at
  // the first solution's arguments and at the second's; either side may
  // carry the hypothesis.
  bool via_first = true, via_second = true;
  for (int node = 0; node < tree.num_interior(); ++node) {
    if (s1.y.at[node] <= s2.y.at[node]) continue;
    const double d_first =
        f1.eval(tree, node, s1.y.at[node], s1.z.row(node)) -
        f2.eval(tree, node, s1.y.at[node], s1.z.row(node));
    const double d_second =
        f1.eval(tree, node, s2.y.at[node], s2.z.row(node)) -
        f2.eval(tree, node, s2.y.at[node], s2.z.row(node));
    if (d_first > 0.0) via_first = false;
    if (d_second > 0.0) via_second = false;
  }
  report.driver_hypothesis_ok = via_first || via_second;

  for (int node = 0; node < tree.num_nodes(); ++node) {
    const double v = std::max(s1.y.at[node] - s2.y.at[node],
                              s1.y.post[node] - s2.y.post[node]);
    if (v > report.max_violation) {
      report.max_violation = v;
      report.worst_node = node;
    }
  }
  report.conclusion_holds = report.max_violation <= tolerance;
  return report;
}

AprioriReport apriori_check(const EventTree& tree, const Obstacle& obs,
                            std::span<const double> g1,
                            std::span<const double> g2, double eps,
                            double beta) {
  if (!(eps > 0.0)) throw InputError("eps must be positive");
  if (!(beta > 1.0 / (eps * eps))) {
    throw InputError("apriori_check requires beta > 1/eps^2");
  }
  if (beta * tree.horizon() > 700.0) {
    throw InputError("beta * horizon too large for double-precision weights");
  }
  const RbsdeSolution s1 = solve_frozen(tree, obs, g1);
  const RbsdeSolution s2 = solve_frozen(tree, obs, g2);

  PredictableField dz = s1.z;
  for (std::size_t i = 0; i < dz.values.size(); ++i) dz.values[i] -= s2.z.values[i];
  LadlagProcess dy = s1.y;
  for (std::size_t i = 0; i < dy.at.size(); ++i) {
    dy.at[i] -= s2.y.at[i];
    dy.post[i] -= s2.y.post[i];
  }

  AprioriReport report;
  report.z_distance = h2_norm(tree, dz, beta);
  report.y_distance = s2_norm(tree, dy, beta);

  const double dt = tree.dt();
  double bound = 0.0;
  for (int node = 0; node < tree.num_interior(); ++node) {
    const double df = g1[node] - g2[node];
    const double t_end = tree.time_of_level(tree.level(node) + 1);
    bound += tree.path_prob(node) * std::exp(beta * t_end) * df * df * dt;
  }
  report.gain_bound = eps * eps * bound;
  report.z_estimate_ok = report.z_distance <= report.gain_bound * (1.0 + 1e-8) + 1e-300;
  report.y_ratio = report.gain_bound > 0.0 ? report.y_distance / report.gain_bound
                   : report.y_distance > 0.0
                       ? std::numeric_limits<double>::infinity()
                       : 0.0;
  report.grid_condition_ok =
      1.0 - std::exp(-beta * dt) >= dt / (eps * eps) - 1e-12;
  return report;
}

OptionalDecomposition solution_decomposition(const EventTree& tree,
                                             const RbsdeSolution& sol) {
  OptionalDecomposition dec;
  dec.martingale.assign(tree.num_nodes(), 0.0);
  dec.a_part.assign(tree.num_nodes(), 0.0);
  dec.b_part.assign(tree.num_nodes(), 0.0);
  for (int node = 0; node < tree.num_interior(); ++node) {
    double mean = 0.0;
    for (int c = tree.first_child(node);
         c < tree.first_child(node) + tree.num_children(node); ++c) {
      mean += tree.cond_prob(c) * sol.y.at[c];
    }
    // One finite-variation charge per period: the realized gain plus the
    // compensator increment, read off the solved values.
    const double fv_step = mean - sol.y.post[node];
    const double right_jump = sol.y.at[node] - sol.y.post[node];
    for (int c = tree.first_child(node);
         c < tree.first_child(node) + tree.num_children(node); ++c) {
      dec.a_part[c] = dec.a_part[node] + fv_step;
      dec.b_part[c] = dec.b_part[node] - right_jump;
      dec.martingale[c] = dec.martingale[node] + (sol.y.at[c] - mean);
    }
  }
  return dec;
}

double ito_identity_check(const EventTree& tree, const LadlagProcess& x,
                          const OptionalDecomposition& dec, double beta,
                          double consistency_tol) {
  if (!(beta >= 0.0)) throw InputError("beta must be nonnegative");
  const double x0 = x.at[0];
  // Reject decompositions that do not reassemble X at the grid slots.
  for (int node = 0; node < tree.num_nodes(); ++node) {
    const double lhs = x.at[node];
    const double rhs =
        x0 + dec.martingale[node] + dec.a_part[node] + dec.b_part[node];
    if (std::abs(lhs - rhs) > consistency_tol) {
      throw InputError("decomposition does not reassemble the process at node " +
                       std::to_string(node));
    }
    if (!tree.is_leaf(node)) {
      const int first = tree.first_child(node);
      const double post =
          x0 + dec.martingale[node] + dec.a_part[node] + dec.b_part[first];
      if (std::abs(x.post[node] - post) > consistency_tol) {
        throw InputError("right jumps of B do not match the process at node " +
                         std::to_string(node));
      }
    }
  }

  // Accumulate both sides along every path; defect checked at each grid time.
  double worst = 0.0;
  std::vector<double> rhs_cum(tree.num_nodes(), 0.0);
  for (int node = 0; node < tree.num_nodes(); ++node) {
    const double t = tree.time_of(node);
    const double wt = std::exp(beta * t);
    const double lhs = wt * x.at[node] * x.at[node] - x0 * x0;
    worst = std::max(worst, std::abs(lhs - rhs_cum[node]));
    if (tree.is_leaf(node)) continue;

    const double t_next = tree.time_of_level(tree.level(node) + 1);
    const double wt_next = std::exp(beta * t_next);
    const int first = tree.first_child(node);
    // Right jump at t: 2 e^{bt} X dB_+ and the right-jump square of X.
    const double db = dec.b_part[first] - dec.b_part[node];
    const double dplus = x.post[node] - x.at[node];
    double step = 2.0 * wt * x.at[node] * db + wt * dplus * dplus;
    // Drift of the weight over the open interval, X constant at the post value.
    step += (wt_next - wt) * x.post[node] * x.post[node];
    for (int c = first; c < first + tree.num_children(node); ++c) {
      // Left jump at t': 2 e^{bt'} X_- d(M+A) and the left-jump square.
      const double dma = (dec.martingale[c] - dec.martingale[node]) +
                         (dec.a_part[c] - dec.a_part[node]);
      const double dx = x.at[c] - x.post[node];
      rhs_cum[c] = rhs_cum[node] + step + 2.0 * wt_next * x.post[node] * dma +
                   wt_next * dx * dx;
    }
  }
  return worst;
}

}  // namespace rbsde
