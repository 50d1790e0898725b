#include "rbsde/martingale.hpp"

#include <cmath>
#include <string>

namespace rbsde {

double conditional_expectation(const EventTree& tree, int node,
                               std::span<const double> payoff_by_leaf) {
  if (static_cast<int>(payoff_by_leaf.size()) != tree.num_leaves()) {
    throw InputError("payoff must be defined on every leaf");
  }
  std::vector<double> v(tree.num_nodes(), 0.0);
  for (int n = tree.num_nodes() - 1; n >= node; --n) {
    if (tree.is_leaf(n)) {
      v[n] = payoff_by_leaf[n - tree.leaf_begin()];
      continue;
    }
    double mean = 0.0;
    for (int c = tree.first_child(n); c < tree.first_child(n) + tree.num_children(n); ++c) {
      mean += tree.cond_prob(c) * v[c];
    }
    v[n] = mean;
  }
  return v[node];
}

MartingalePath integrate(const EventTree& tree, const PredictableField& z) {
  MartingalePath m(tree.num_nodes(), 0.0);
  for (int node = 0; node < tree.num_interior(); ++node) {
    const double zb = zbar(tree, z, node);
    const auto row = z.row(node);
    for (int c = tree.first_child(node); c < tree.first_child(node) + tree.num_children(node); ++c) {
      const int b = tree.branch(c);
      const double inc = (b == EventTree::kNoEvent) ? -zb : row[b] - zb;
      m[c] = m[node] + inc;
    }
  }
  return m;
}

PredictableField represent(const EventTree& tree, const MartingalePath& m,
                           double tol) {
  if (static_cast<int>(m.size()) != tree.num_nodes()) {
    throw InputError("martingale path not defined on every node");
  }
  // Tower property first: report the worst offender if it fails.
  int worst_node = -1;
  double worst = 0.0;
  for (int node = 0; node < tree.num_interior(); ++node) {
    double mean = 0.0;
    for (int c = tree.first_child(node); c < tree.first_child(node) + tree.num_children(node); ++c) {
      mean += tree.cond_prob(c) * m[c];
    }
    const double defect = std::abs(mean - m[node]);
    if (defect > worst) {
      worst = defect;
      worst_node = node;
    }
  }
  if (worst > tol) {
    throw RepresentationError(
        "input is not a martingale: conditional-mean defect " +
            std::to_string(worst) + " at node " + std::to_string(worst_node),
        worst_node, worst);
  }

  PredictableField z = PredictableField::zeros(tree);
  for (int node = 0; node < tree.num_interior(); ++node) {
    const int no_event = tree.child_by_branch(node, EventTree::kNoEvent);
    const double m0 = (no_event >= 0) ? m[no_event] - m[node] : 0.0;
    auto row = z.row(node);
    for (int c = tree.first_child(node); c < tree.first_child(node) + tree.num_children(node); ++c) {
      const int b = tree.branch(c);
      if (b != EventTree::kNoEvent) row[b] = (m[c] - m[node]) - m0;
    }
  }
  return z;
}

double bracket_increment(const EventTree& tree, const PredictableField& z,
                         int node) {
  const auto phi = tree.phi(node);
  const auto row = z.row(node);
  const double dk = tree.delta_k(node);
  const double zb = zbar(tree, z, node);
  double spread = 0.0;
  for (int j = 0; j < tree.num_marks(); ++j) {
    const double d = row[j] - zb;
    spread += phi[j] * d * d;
  }
  return dk * spread + zb * zb * (1.0 - dk);
}

std::vector<double> bracket(const EventTree& tree, const PredictableField& z) {
  std::vector<double> b(tree.num_nodes(), 0.0);
  for (int node = 0; node < tree.num_interior(); ++node) {
    const double inc = bracket_increment(tree, z, node);
    for (int c = tree.first_child(node); c < tree.first_child(node) + tree.num_children(node); ++c) {
      b[c] = b[node] + inc;
    }
  }
  return b;
}

}  // namespace rbsde
