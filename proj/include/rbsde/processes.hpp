#pragma once

#include <span>
#include <vector>

#include "rbsde/scenario.hpp"

namespace rbsde {

/// Optional process on the tree: an at-value and a post-value per node. The
/// value on the open interval after t_i equals the post-value at level i, so
/// the left limit at t_{i+1} along a path is the parent's post-value.
struct LadlagProcess {
  std::vector<double> at, post;

  static LadlagProcess zeros(const EventTree& tree) {
    LadlagProcess x;
    x.at.assign(tree.num_nodes(), 0.0);
    x.post.assign(tree.num_nodes(), 0.0);
    return x;
  }
  static LadlagProcess constant(const EventTree& tree, double value) {
    LadlagProcess x;
    x.at.assign(tree.num_nodes(), value);
    x.post.assign(tree.num_nodes(), value);
    return x;
  }
};

/// Mark-indexed integrand, one row per interior node: the row at a level-i
/// node is the integrand for period i+1, measurable there by construction.
struct PredictableField {
  int marks = 0;
  std::vector<double> values;  // num_interior x marks

  static PredictableField zeros(const EventTree& tree) {
    PredictableField z;
    z.marks = tree.num_marks();
    z.values.assign(static_cast<std::size_t>(tree.num_interior()) * z.marks, 0.0);
    return z;
  }
  double& at(int node, int mark) {
    return values[static_cast<std::size_t>(node) * marks + mark];
  }
  double at(int node, int mark) const {
    return values[static_cast<std::size_t>(node) * marks + mark];
  }
  std::span<double> row(int node) {
    return {values.data() + static_cast<std::size_t>(node) * marks,
            static_cast<std::size_t>(marks)};
  }
  std::span<const double> row(int node) const {
    return {values.data() + static_cast<std::size_t>(node) * marks,
            static_cast<std::size_t>(marks)};
  }
};

/// Compensated mean of the integrand row at an interior node:
/// Zbar = ΔK * sum_j φ(u_j) Z(u_j), the integral of Z against ν({t}, dx).
double zbar(const EventTree& tree, const PredictableField& z, int node);

/// Squared S^{2,β} functional: the value at the root of the optimal-stopping
/// problem for the reward e^{βτ} X_τ², stopping at at-values on the grid,
/// computed exactly by backward induction. With include_right_slots the
/// stopping lattice also offers the supremum over the open interval after
/// each node, worth e^{β t_{i+1}} X_{t_i+}²  (internal use).
double s2_norm(const EventTree& tree, const LadlagProcess& x, double beta,
               bool include_right_slots = false);

/// Squared H^{2,β} norm of a predictable field:
/// sum over interior nodes of  p(node) e^{β t'} [ ΔK Σ φ |Z - Zbar|² +
/// (1-ΔK) Zbar² ]  with t' the end of the node's period.
double h2_norm(const EventTree& tree, const PredictableField& z, double beta);

/// Compensated one-step distance between two integrand rows at a node:
/// ( Σ φ |δ - δ̄|² + (1-ΔK) δ̄² )^{1/2}  with δ = za - zb and δ̄ the plain
/// φ-mean of δ. This is the z-metric of the Lipschitz driver bound.
double lipschitz_z_norm(const EventTree& tree, const PredictableField& za,
                        const PredictableField& zb, int node);

}  // namespace rbsde
