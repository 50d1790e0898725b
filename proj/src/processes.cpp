#include "rbsde/processes.hpp"

#include <algorithm>
#include <cmath>

namespace rbsde {

namespace {

void require_beta(double beta) {
  if (!(beta >= 0.0)) throw InputError("beta must be nonnegative");
}

void require_sized(const EventTree& tree, const LadlagProcess& x) {
  if (static_cast<int>(x.at.size()) != tree.num_nodes() ||
      static_cast<int>(x.post.size()) != tree.num_nodes()) {
    throw InputError("process not defined on every node");
  }
}

void require_sized(const EventTree& tree, const PredictableField& z) {
  if (z.marks != tree.num_marks() ||
      static_cast<int>(z.values.size()) !=
          tree.num_interior() * tree.num_marks()) {
    throw InputError("field not defined for every period/node");
  }
}

}  // namespace

double zbar(const EventTree& tree, const PredictableField& z, int node) {
  if (node < 0 || node >= tree.num_interior()) {
    throw InputError("zbar requires an interior node");
  }
  const auto phi = tree.phi(node);
  const auto row = z.row(node);
  double mean = 0.0;
  for (int j = 0; j < tree.num_marks(); ++j) mean += phi[j] * row[j];
  return tree.delta_k(node) * mean;
}

double s2_norm(const EventTree& tree, const LadlagProcess& x, double beta,
               bool include_right_slots) {
  require_beta(beta);
  require_sized(tree, x);
  std::vector<double> w(tree.num_nodes());
  for (int node = tree.num_nodes() - 1; node >= 0; --node) {
    const double here =
        std::exp(beta * tree.time_of(node)) * x.at[node] * x.at[node];
    if (tree.is_leaf(node)) {
      w[node] = here;
      continue;
    }
    double cont = 0.0;
    for (int c = tree.first_child(node);
         c < tree.first_child(node) + tree.num_children(node); ++c) {
      cont += tree.cond_prob(c) * w[c];
    }
    double best = std::max(here, cont);
    if (include_right_slots) {
      const double right = std::exp(beta * tree.time_of_level(tree.level(node) + 1)) *
                           x.post[node] * x.post[node];
      best = std::max(best, right);
    }
    w[node] = best;
  }
  return w[0];
}

double h2_norm(const EventTree& tree, const PredictableField& z, double beta) {
  require_beta(beta);
  require_sized(tree, z);
  double total = 0.0;
  for (int node = 0; node < tree.num_interior(); ++node) {
    const auto phi = tree.phi(node);
    const auto row = z.row(node);
    const double dk = tree.delta_k(node);
    const double zb = zbar(tree, z, node);
    double spread = 0.0;
    for (int j = 0; j < tree.num_marks(); ++j) {
      const double d = row[j] - zb;
      spread += phi[j] * d * d;
    }
    const double inc = dk * spread + zb * zb * (1.0 - dk);
    const double t_end = tree.time_of_level(tree.level(node) + 1);
    total += tree.path_prob(node) * std::exp(beta * t_end) * inc;
  }
  return total;
}

double lipschitz_z_norm(const EventTree& tree, const PredictableField& za,
                        const PredictableField& zb, int node) {
  require_sized(tree, za);
  require_sized(tree, zb);
  if (node < 0 || node >= tree.num_interior()) {
    throw InputError("lipschitz_z_norm requires an interior node");
  }
  const auto phi = tree.phi(node);
  const auto ra = za.row(node);
  const auto rb = zb.row(node);
  double mean = 0.0;
  for (int j = 0; j < tree.num_marks(); ++j) mean += phi[j] * (ra[j] - rb[j]);
  double spread = 0.0;
  for (int j = 0; j < tree.num_marks(); ++j) {
    const double d = (ra[j] - rb[j]) - mean;
    spread += phi[j] * d * d;
  }
  return std::sqrt(spread + (1.0 - tree.delta_k(node)) * mean * mean);
}

}  // namespace rbsde
