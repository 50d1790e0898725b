#include <cmath>

#include "doctest.h"
#include "rbsde/scenario.hpp"

using namespace rbsde;

TEST_SUITE_BEGIN("scenario");

TEST_CASE("one period, two marks, uniform kernel") {
  const auto tree = build_tree(ScenarioSpec::uniform(1.0, 1, 2, 0.5));
  REQUIRE(tree.num_nodes() == 4);
  REQUIRE(tree.num_leaves() == 3);
  CHECK(tree.cond_prob(tree.child_by_branch(0, EventTree::kNoEvent)) == 0.5);
  CHECK(tree.cond_prob(tree.child_by_branch(0, 0)) == 0.25);
  CHECK(tree.cond_prob(tree.child_by_branch(0, 1)) == 0.25);
  CHECK(tree.compensator(0, 0) == 0.25);
  CHECK(tree.cum_k(0) == 0.0);
  CHECK(tree.cum_k(1) == 0.5);
}

TEST_CASE("two periods: level probabilities sum to one") {
  const auto tree = build_tree(ScenarioSpec::uniform(1.0, 2, 2, 0.5));
  REQUIRE(tree.num_leaves() == 9);
  for (int lvl = 0; lvl <= 2; ++lvl) {
    double sum = 0.0;
    for (int n = tree.level_begin(lvl); n < tree.level_end(lvl); ++n) {
      sum += tree.path_prob(n);
    }
    CHECK(std::abs(sum - 1.0) < 1e-14);
  }
  for (int n = 0; n < tree.num_interior(); ++n) {
    double sum = 0.0;
    for (int c = tree.first_child(n); c < tree.first_child(n) + tree.num_children(n); ++c) {
      sum += tree.cond_prob(c);
    }
    CHECK(std::abs(sum - 1.0) < 1e-14);
  }
}

TEST_CASE("degenerate no-jump measure") {
  const auto tree = build_tree(ScenarioSpec::uniform(1.0, 1, 2, 0.0));
  REQUIRE(tree.num_children(0) == 1);
  const int child = tree.first_child(0);
  CHECK(tree.branch(child) == EventTree::kNoEvent);
  CHECK(tree.cond_prob(child) == 1.0);
  CHECK(tree.compensator(0, 0) == 0.0);
  CHECK(tree.compensator(0, 1) == 0.0);
}

TEST_CASE("certain jump prunes the no-event branch") {
  const auto tree = build_tree(ScenarioSpec::uniform(1.0, 1, 2, 1.0));
  REQUIRE(tree.num_children(0) == 2);
  CHECK(tree.child_by_branch(0, EventTree::kNoEvent) == -1);
  CHECK(tree.cond_prob(tree.first_child(0)) == 0.5);
}

TEST_CASE("cumulative intensity is nondecreasing from zero") {
  Rng rng(7);
  const auto spec = random_scenario(rng, {});
  const auto tree = build_tree(spec);
  CHECK(tree.cum_k(0) == 0.0);
  for (int n = 1; n < tree.num_nodes(); ++n) {
    CHECK(tree.cum_k(n) >= tree.cum_k(tree.parent(n)));
    // One-period compensator mass over all marks is the event probability.
    if (!tree.is_leaf(n)) {
      double mass = 0.0;
      for (int j = 0; j < tree.num_marks(); ++j) mass += tree.compensator(n, j);
      CHECK(mass == doctest::Approx(tree.delta_k(n)).epsilon(1e-14));
    }
  }
}

TEST_CASE("input validation") {
  auto spec = ScenarioSpec::uniform(1.0, 2, 2, 0.5);
  SUBCASE("event probability above one") {
    spec.event_prob[1] = 1.5;
    CHECK_THROWS_AS(build_tree(spec), InputError);
  }
  SUBCASE("negative event probability") {
    spec.event_prob[0] = -0.1;
    CHECK_THROWS_AS(build_tree(spec), InputError);
  }
  SUBCASE("kernel does not sum to one") {
    spec.mark_kernel[1] = {0.5, 0.4};
    CHECK_THROWS_WITH_AS(build_tree(spec),
                         doctest::Contains("period 2"), InputError);
  }
  SUBCASE("no periods") {
    spec.periods = 0;
    CHECK_THROWS_AS(build_tree(spec), InputError);
  }
  SUBCASE("nonpositive horizon") {
    spec.horizon = 0.0;
    CHECK_THROWS_AS(build_tree(spec), InputError);
  }
}

TEST_CASE("node-dependent laws through the callback") {
  const auto shape = ScenarioSpec::uniform(1.0, 2, 1, 0.5);
  // Event probability drops to 0.1 after a first event.
  const PeriodLawFn law = [](const EventTree& partial, int parent) {
    bool seen_event = false;
    for (int n = parent; n > 0; n = partial.parent(n)) {
      if (partial.branch(n) != EventTree::kNoEvent) seen_event = true;
    }
    return PeriodLaw{seen_event ? 0.1 : 0.5, {1.0}};
  };
  const auto tree = build_tree(shape, law);
  const int no_event = tree.child_by_branch(0, EventTree::kNoEvent);
  const int event = tree.child_by_branch(0, 0);
  CHECK(tree.delta_k(no_event) == 0.5);
  CHECK(tree.delta_k(event) == 0.1);
  CHECK(tree.cum_k(tree.child_by_branch(event, 0)) == doctest::Approx(0.6));
  double sum = 0.0;
  for (int n = tree.leaf_begin(); n < tree.num_nodes(); ++n) sum += tree.path_prob(n);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("obstacle validation") {
  const auto tree = build_tree(ScenarioSpec::uniform(1.0, 1, 2, 0.5));
  SUBCASE("constants are valid") {
    CHECK(validate_obstacle(tree, constant_obstacle(tree, 1.0)).valid());
  }
  SUBCASE("downward right jump is allowed") {
    auto obs = constant_obstacle(tree, 0.0);
    obs.at[0] = 2.0;
    CHECK(validate_obstacle(tree, obs).valid());
  }
  SUBCASE("upward right jump is rejected at the offending node") {
    auto obs = constant_obstacle(tree, 0.0);
    obs.post[0] = 1.0;
    const auto report = validate_obstacle(tree, obs);
    REQUIRE_FALSE(report.valid());
    CHECK(report.violations.front().node == 0);
  }
  SUBCASE("non-finite values are rejected") {
    auto obs = constant_obstacle(tree, 0.0);
    obs.at[2] = std::nan("");
    CHECK_FALSE(validate_obstacle(tree, obs).valid());
  }
  SUBCASE("terminal slots must agree") {
    auto obs = constant_obstacle(tree, 0.0);
    obs.at[tree.leaf_begin()] = 1.0;
    CHECK_FALSE(validate_obstacle(tree, obs).valid());
  }
}

TEST_CASE("terminal payoff by event count") {
  const auto tree = build_tree(ScenarioSpec::uniform(1.0, 2, 2, 0.5));
  const double payoff[] = {0.0, 1.0, 1.0};
  const auto obs = terminal_payoff_obstacle(tree, payoff, 0.0);
  double expect = 0.0;
  for (int n = tree.leaf_begin(); n < tree.num_nodes(); ++n) {
    expect += tree.path_prob(n) * obs.at[n];
  }
  CHECK(expect == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("seeded generators are reproducible bit for bit") {
  for (std::uint64_t seed : {1ull, 42ull, 977ull}) {
    Rng a(seed), b(seed);
    const auto sa = random_scenario(a, {});
    const auto sb = random_scenario(b, {});
    CHECK(sa.event_prob == sb.event_prob);
    CHECK(sa.mark_kernel == sb.mark_kernel);
    const auto ta = build_tree(sa);
    const auto tb = build_tree(sb);
    const auto oa = random_obstacle(a, ta, {});
    const auto ob = random_obstacle(b, tb, {});
    CHECK(oa.at == ob.at);
    CHECK(oa.post == ob.post);
    CHECK(random_gain(a, ta, 1.0) == random_gain(b, tb, 1.0));
  }
}

TEST_CASE("random obstacles satisfy the representation constraint") {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const auto tree = build_tree(random_scenario(rng, {}));
    const auto obs = random_obstacle(rng, tree, {});
    CHECK(validate_obstacle(tree, obs).valid());
  }
}

TEST_SUITE_END();
