#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "brex/mdp.hpp"
#include "brex/rex.hpp"
#include "worlds.hpp"

using namespace brex;
using namespace testing_worlds;

TEST_CASE("value iteration on hand-solvable worlds") {
  SUBCASE("absorbing state, gamma 0.9: V = 1 / (1 - 0.9)") {
    const auto q = value_iteration(single_state(0.9), std::vector<double>{1.0});
    CHECK(std::abs(q.v[0] - 10.0) <= kDefaultSolverTol);
  }
  SUBCASE("two-state chain, gamma 0.5") {
    const auto q = value_iteration(two_state_chain(0.5), std::vector<double>{1.0});
    CHECK(std::abs(q.v[1] - 2.0) <= kDefaultSolverTol);
    CHECK(std::abs(q.v[0] - 1.0) <= kDefaultSolverTol);
  }
  SUBCASE("stay/switch world: stay in the rewarding state") {
    const auto world = two_state_switch(0.9);
    const auto q = value_iteration(world, std::vector<double>{1.0, 0.0});
    CHECK(std::abs(q.v[0] - 10.0) <= kDefaultSolverTol);
    CHECK(std::abs(q.v[1] - 9.0) <= kDefaultSolverTol);
    const auto pi = greedy_policy(q);
    CHECK(pi.at(0, 0) == 1.0);
    CHECK(pi.at(1, 1) == 1.0);
  }
  SUBCASE("gamma 0 gives the immediate reward") {
    const auto q = value_iteration(two_state_chain(0.0), std::vector<double>{3.0});
    CHECK(q.v[0] == 0.0);
    CHECK(q.v[1] == 3.0);
  }
}

TEST_CASE("value iteration converges on random grids") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto world = random_world(seed);
    Rng rng(seed + 100);
    const auto w = random_unit_vector(4, rng);
    const auto q = value_iteration(world, w);
    CHECK(bellman_residual(world, w, q) < 1e-7);
    const auto v_greedy = evaluate_policy_exact(world, greedy_policy(q), w);
    for (int s = 0; s < world.num_states(); ++s) CHECK(std::abs(v_greedy[s] - q.v[s]) < 1e-7);
    // Warm start from the solution converges immediately to the same values.
    const auto warm = value_iteration(world, w, kDefaultSolverTol, &q);
    CHECK(warm.iterations <= 2);
    for (int s = 0; s < world.num_states(); ++s) CHECK(std::abs(warm.v[s] - q.v[s]) < 1e-7);
  }
}

TEST_CASE("grid transitions") {
  const auto world = random_world(3, 3, 2, 2);
  // s = row * width + col
  CHECK(world.next_state(0, static_cast<int>(Move::Up)) == 0);
  CHECK(world.next_state(0, static_cast<int>(Move::Left)) == 0);
  CHECK(world.next_state(0, static_cast<int>(Move::Right)) == 1);
  CHECK(world.next_state(0, static_cast<int>(Move::Down)) == 3);
  CHECK(world.next_state(5, static_cast<int>(Move::Right)) == 5);
  CHECK(world.next_state(4, static_cast<int>(Move::Up)) == 1);
  CHECK(world.is_grid());
  for (int s = 0; s < world.num_states(); ++s) {
    double total = 0.0;
    for (double x : world.features(s)) total += x;
    CHECK(total == 1.0);
  }
}

TEST_CASE("invalid worlds are rejected") {
  CHECK_THROWS_AS(two_state_chain(1.0), std::invalid_argument);
  CHECK_THROWS_AS(two_state_chain(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(GridWorld::custom(1, {0}, FeatureTable(1, 1, {0.5}), 0.9), std::invalid_argument);
  CHECK_THROWS_AS(GridWorld::custom(1, {2, 0}, FeatureTable(2, 1, {0, 1}), 0.9),
                  std::invalid_argument);
  CHECK_THROWS_AS(GridWorld::custom(2, {0, 1}, FeatureTable(2, 1, {0, 1}), 0.9),
                  std::invalid_argument);
  CHECK_THROWS_AS(value_iteration(single_state(0.9), std::vector<double>{1.0, 2.0}),
                  std::invalid_argument);
}

TEST_CASE("Boltzmann policy") {
  QTable q{1, 4, {1.0, 0.0, 0.0, 0.0}, {1.0}, 1};
  const auto p = boltzmann_policy(q, std::log(3.0));
  CHECK(p.at(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  for (int a = 1; a < 4; ++a) CHECK(p.at(0, a) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));

  const auto flat = boltzmann_policy(q, 0.0);
  for (int a = 0; a < 4; ++a) CHECK(flat.at(0, a) == 0.25);

  QTable big{1, 2, {1000.0, 999.0}, {1000.0}, 1};
  const auto stable = boltzmann_policy(big, 50.0);
  CHECK(std::isfinite(stable.at(0, 0)));
  CHECK(stable.at(0, 0) == doctest::Approx(1.0 / (1.0 + std::exp(-50.0))));

  CHECK_THROWS_AS(boltzmann_policy(q, -1.0), std::invalid_argument);
}

TEST_CASE("greedy policy takes the first maximiser") {
  QTable q{1, 4, {0.0, 2.0, 2.0, 1.0}, {2.0}, 1};
  const auto p = greedy_policy(q);
  CHECK(p.at(0, 1) == 1.0);
  CHECK(p.at(0, 2) == 0.0);
}

TEST_CASE("rollouts") {
  const auto world = random_world(4, 3, 3, 2);
  SUBCASE("stay-in-place policy repeats the start") {
    const std::vector<int> up(9, static_cast<int>(Move::Up));
    const auto pi = StochasticPolicy::deterministic(4, up);
    Rng rng(1);
    const auto t = rollout(world, pi, 1, 4, rng);
    CHECK(t.states == std::vector<int>{1, 1, 1, 1});
    CHECK(t.length() == 4);
  }
  SUBCASE("rollouts are transition-consistent and reproducible") {
    const auto pi = StochasticPolicy::uniform(9, 4);
    Rng a(7), b(7);
    const auto ta = rollout(world, pi, 4, 30, a);
    const auto tb = rollout(world, pi, 4, 30, b);
    CHECK(ta.states == tb.states);
    CHECK(ta.actions == tb.actions);
    for (int t = 0; t + 1 < ta.length(); ++t)
      CHECK(ta.states[t + 1] == world.next_state(ta.states[t], ta.actions[t]));
  }
  SUBCASE("bad arguments") {
    Rng rng(1);
    const auto pi = StochasticPolicy::uniform(9, 4);
    CHECK_THROWS_AS(rollout(world, pi, 9, 3, rng), std::invalid_argument);
    CHECK_THROWS_AS(rollout(world, pi, 0, 0, rng), std::invalid_argument);
  }
}

TEST_CASE("feature expectations") {
  const auto world = two_state_switch(0.9);
  const auto uniform = StochasticPolicy::uniform(2, 2);

  SUBCASE("stay policy, horizon 4") {
    const auto stay = StochasticPolicy::deterministic(2, std::vector<int>{0, 0});
    Rng rng(2);
    const auto mc = feature_expectations_mc(world, stay, 4, 10, rng, 0);
    CHECK(mc == std::vector<double>{4.0, 0.0});
    CHECK(feature_expectations_horizon(world, stay, 4, 0) == std::vector<double>{4.0, 0.0});
  }

  SUBCASE("horizon propagation against path enumeration") {
    // Enumerate every action sequence under the uniform policy from each start.
    const int horizon = 4;
    std::vector<double> oracle(2, 0.0);
    for (int start = 0; start < 2; ++start) {
      for (int code = 0; code < (1 << (horizon - 1)); ++code) {
        const double prob = 0.5 * std::pow(0.5, horizon - 1);
        int s = start;
        for (int t = 0; t < horizon; ++t) {
          oracle[s] += prob;
          if (t + 1 < horizon) s = world.next_state(s, (code >> t) & 1);
        }
      }
    }
    const auto exact = feature_expectations_horizon(world, uniform, horizon);
    CHECK(exact[0] == doctest::Approx(oracle[0]).epsilon(1e-12));
    CHECK(exact[1] == doctest::Approx(oracle[1]).epsilon(1e-12));
  }

  SUBCASE("Monte Carlo estimate within 3 sigma of the exact finite-horizon value") {
    StochasticPolicy mixed = uniform;
    mixed.probs = {0.8, 0.2, 0.3, 0.7};
    const int horizon = 6, rollouts = 20000;
    Rng rng(11);
    const auto mc = feature_expectations_mc(world, mixed, horizon, rollouts, rng);
    const auto exact = feature_expectations_horizon(world, mixed, horizon);
    // Per-rollout sums lie in [0, horizon], so sigma <= horizon / 2.
    const double bound = 3.0 * (horizon / 2.0) / std::sqrt(rollouts);
    CHECK(std::abs(mc[0] - exact[0]) < bound);
    CHECK(std::abs(mc[1] - exact[1]) < bound);
    CHECK(exact[0] + exact[1] == doctest::Approx(horizon));
  }

  SUBCASE("discounted expectations, uniform policy on the switch world") {
    // After one step the state distribution is (1/2, 1/2) from either start,
    // so the uniform-start average is (1/2)/(1 - gamma) per feature.
    const auto mu = feature_expectations_exact(world, uniform);
    CHECK(mu[0] == doctest::Approx(5.0).epsilon(1e-10));
    CHECK(mu[1] == doctest::Approx(5.0).epsilon(1e-10));
  }

  SUBCASE("w . Phi matches the mean policy value") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto grid = random_world(seed);
      Rng rng(seed);
      const auto w = random_unit_vector(4, rng);
      const auto q = value_iteration(grid, random_unit_vector(4, rng));
      const auto pi = boltzmann_policy(q, 2.0);
      const auto mu = feature_expectations_exact(grid, pi);
      const auto v = evaluate_policy_exact(grid, pi, w, 1e-12);
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= grid.num_states();
      CHECK(dot(w, mu) == doctest::Approx(mean).epsilon(1e-9));
    }
  }
}

TEST_CASE("policy loss") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto world = random_world(seed);
    Rng rng(seed);
    const auto w = random_unit_vector(4, rng);
    const auto q = value_iteration(world, w);
    CHECK(std::abs(policy_loss(world, greedy_policy(q), w)) < 1e-7);
    CHECK(policy_loss(world, StochasticPolicy::uniform(36, 4), w) >= -1e-7);
    std::vector<double> neg(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) neg[i] = -w[i];
    const auto anti = greedy_policy(value_iteration(world, neg));
    CHECK(policy_loss(world, anti, w) > 0.0);
  }
}

TEST_CASE("norm helpers") {
  const std::vector<double> v{3.0, -4.0};
  CHECK(l1_norm(v) == 7.0);
  CHECK(l2_norm(v) == 5.0);
  RewardWeights r{{0.6, -0.8}, NormTag::L2};
  CHECK(r.satisfies_norm());
  r.norm = NormTag::L1;
  CHECK_FALSE(r.satisfies_norm());
}
