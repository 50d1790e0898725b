#include <cmath>
#include <vector>

#include "doctest.h"
#include "rbsde/martingale.hpp"

using namespace rbsde;

namespace {

PredictableField random_field(Rng& rng, const EventTree& tree, double scale) {
  PredictableField z = PredictableField::zeros(tree);
  for (int n = 0; n < tree.num_interior(); ++n) {
    for (int j = 0; j < tree.num_marks(); ++j) z.at(n, j) = rng.uniform(-scale, scale);
  }
  return z;
}

double expectation_at_leaves(const EventTree& tree, const std::vector<double>& v) {
  double e = 0.0;
  for (int n = tree.leaf_begin(); n < tree.num_nodes(); ++n) {
    e += tree.path_prob(n) * v[n];
  }
  return e;
}

}  // namespace

TEST_SUITE_BEGIN("martingale");

TEST_CASE("conditional expectation") {
  const auto tree = build_tree(ScenarioSpec::uniform(1.0, 2, 2, 0.5));
  std::vector<double> payoff(tree.num_leaves(), 0.0);
  SUBCASE("constant payoff") {
    payoff.assign(tree.num_leaves(), 4.2);
    CHECK(conditional_expectation(tree, 0, payoff) == doctest::Approx(4.2).epsilon(1e-15));
  }
  SUBCASE("at least one event") {
    for (int leaf = tree.leaf_begin(); leaf < tree.num_nodes(); ++leaf) {
      bool event = false;
      for (int n = leaf; n > 0; n = tree.parent(n)) {
        if (tree.branch(n) != EventTree::kNoEvent) event = true;
      }
      payoff[leaf - tree.leaf_begin()] = event ? 1.0 : 0.0;
    }
    CHECK(conditional_expectation(tree, 0, payoff) == doctest::Approx(0.75).epsilon(1e-14));
  }
}

TEST_CASE("single-event indicator has mean equal to the event probability") {
  const auto tree = build_tree(ScenarioSpec::uniform(1.0, 1, 2, 0.5));
  std::vector<double> payoff(tree.num_leaves());
  for (int leaf = tree.leaf_begin(); leaf < tree.num_nodes(); ++leaf) {
    payoff[leaf - tree.leaf_begin()] = tree.branch(leaf) != EventTree::kNoEvent;
  }
  CHECK(conditional_expectation(tree, 0, payoff) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("integration increments") {
  const auto tree = build_tree(ScenarioSpec::uniform(1.0, 1, 2, 0.5));
  PredictableField z = PredictableField::zeros(tree);
  SUBCASE("null integrand") {
    const auto m = integrate(tree, z);
    for (double v : m) CHECK(v == 0.0);
  }
  SUBCASE("centered integrand hits its raw values") {
    z.at(0, 0) = 1.0;
    z.at(0, 1) = -1.0;
    const auto m = integrate(tree, z);
    CHECK(m[tree.child_by_branch(0, 0)] == 1.0);
    CHECK(m[tree.child_by_branch(0, 1)] == -1.0);
    CHECK(m[tree.child_by_branch(0, EventTree::kNoEvent)] == 0.0);
  }
}

TEST_CASE("integrals are martingales, node by node") {
  Rng rng(301);
  for (int i = 0; i < 40; ++i) {
    RandomScenarioParams params;
    if (i % 3 == 0) params.dk_min = 0.0;  // include degenerate probabilities
    if (i % 5 == 0) params.dk_max = 1.0;
    const auto tree = build_tree(random_scenario(rng, params));
    const auto z = random_field(rng, tree, 3.0);
    const auto m = integrate(tree, z);
    CHECK(m[0] == 0.0);
    for (int n = 0; n < tree.num_interior(); ++n) {
      double mean = 0.0;
      for (int c = tree.first_child(n); c < tree.first_child(n) + tree.num_children(n); ++c) {
        mean += tree.cond_prob(c) * m[c];
      }
      CHECK(std::abs(mean - m[n]) < 1e-13);
    }
  }
}

TEST_CASE("representation") {
  const auto tree = build_tree(ScenarioSpec::uniform(1.0, 1, 2, 0.5));
  SUBCASE("null martingale") {
    const auto z = represent(tree, MartingalePath(tree.num_nodes(), 0.0));
    for (double v : z.values) CHECK(v == 0.0);
  }
  SUBCASE("inverse of the integration example") {
    MartingalePath m(tree.num_nodes(), 0.0);
    m[tree.child_by_branch(0, 0)] = 1.0;
    m[tree.child_by_branch(0, 1)] = -1.0;
    const auto z = represent(tree, m);
    CHECK(z.at(0, 0) == 1.0);
    CHECK(z.at(0, 1) == -1.0);
  }
  SUBCASE("non-martingale input names the worst node") {
    MartingalePath m(tree.num_nodes(), 0.0);
    m[tree.child_by_branch(0, 0)] = 1.0;  // unbalanced increment
    try {
      represent(tree, m);
      FAIL("expected a representation error");
    } catch (const RepresentationError& e) {
      CHECK(e.worst_node == 0);
      CHECK(e.worst_defect == doctest::Approx(0.25));
    }
  }
}

TEST_CASE("representation round trip on the event-positive coordinates") {
  Rng rng(302);
  for (int i = 0; i < 60; ++i) {
    const auto tree = build_tree(random_scenario(rng, {}));
    const auto z = random_field(rng, tree, 2.0);
    const auto back = represent(tree, integrate(tree, z));
    for (int n = 0; n < tree.num_interior(); ++n) {
      for (int j = 0; j < tree.num_marks(); ++j) {
        if (tree.child_by_branch(n, j) < 0) continue;  // never realized
        CHECK(std::abs(back.at(n, j) - z.at(n, j)) < 1e-12);
      }
    }
    // Increments themselves reproduce exactly.
    const auto m1 = integrate(tree, z);
    const auto m2 = integrate(tree, back);
    for (int n = 0; n < tree.num_nodes(); ++n) CHECK(std::abs(m1[n] - m2[n]) < 1e-12);
  }
}

TEST_CASE("certain-jump convention shifts by the compensated mean") {
  const auto tree = build_tree(ScenarioSpec::uniform(1.0, 1, 2, 1.0));
  PredictableField z = PredictableField::zeros(tree);
  z.at(0, 0) = 2.0;
  z.at(0, 1) = 4.0;  // zbar = 3
  const auto back = represent(tree, integrate(tree, z));
  CHECK(back.at(0, 0) == doctest::Approx(-1.0));
  CHECK(back.at(0, 1) == doctest::Approx(1.0));
  // Same martingale either way.
  const auto m1 = integrate(tree, z);
  const auto m2 = integrate(tree, back);
  for (int n = 0; n < tree.num_nodes(); ++n) CHECK(m1[n] == doctest::Approx(m2[n]).epsilon(1e-15));
}

TEST_CASE("bracket") {
  const auto tree = build_tree(ScenarioSpec::uniform(1.0, 1, 2, 0.5));
  SUBCASE("null integrand") {
    const auto b = bracket(tree, PredictableField::zeros(tree));
    for (double v : b) CHECK(v == 0.0);
  }
  SUBCASE("hand value matches the second moment") {
    PredictableField z = PredictableField::zeros(tree);
    z.at(0, 0) = 1.0;
    z.at(0, 1) = -1.0;
    const auto b = bracket(tree, z);
    const auto m = integrate(tree, z);
    std::vector<double> m2(tree.num_nodes());
    for (int n = 0; n < tree.num_nodes(); ++n) m2[n] = m[n] * m[n];
    CHECK(b[tree.leaf_begin()] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(expectation_at_leaves(tree, b) ==
          doctest::Approx(expectation_at_leaves(tree, m2)).epsilon(1e-14));
  }
}

TEST_CASE("isometry: expected bracket equals expected squared integral") {
  Rng rng(303);
  RandomScenarioParams params;
  params.max_periods = 3;
  for (int i = 0; i < 60; ++i) {
    const auto tree = build_tree(random_scenario(rng, params));
    const auto z = random_field(rng, tree, 2.5);
    const auto m = integrate(tree, z);
    const auto b = bracket(tree, z);
    double em2 = 0.0, eb = 0.0;
    for (int n = tree.leaf_begin(); n < tree.num_nodes(); ++n) {
      em2 += tree.path_prob(n) * m[n] * m[n];
      eb += tree.path_prob(n) * b[n];
    }
    CHECK(std::abs(em2 - eb) < 1e-12 * std::max(1.0, eb));
  }
}

TEST_SUITE_END();
