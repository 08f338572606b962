#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "../oracles.hpp"
#include "brex/birl.hpp"
#include "worlds.hpp"

using namespace brex;
using namespace testing_worlds;

TEST_CASE("beta 0 gives a uniform action likelihood") {
  const auto world = random_world(1);
  const std::vector<std::pair<int, int>> pairs{{0, 1}, {5, 2}, {7, 3}};
  const double ll = boltzmann_log_likelihood(world, pairs, std::vector<double>{0.5, -0.5, 0.5, 0.5}, 0.0);
  CHECK(ll == doctest::Approx(-3.0 * std::log(4.0)).epsilon(1e-14));
}

TEST_CASE("hand-computed two-state likelihood") {
  // Q(s0, stay) = 10, Q(s0, switch) = 9.1, Q(s1, switch) = 9, Q(s1, stay) = 8.1.
  const auto world = two_state_switch(0.9);
  const std::vector<std::pair<int, int>> pairs{{0, 0}, {1, 1}};
  const double ll = boltzmann_log_likelihood(world, pairs, std::vector<double>{1.0, 0.0}, 1.0);
  CHECK(ll == doctest::Approx(-0.6823077494641756).epsilon(1e-9));
}

TEST_CASE("optimal demonstrations under the true reward approach likelihood 0") {
  const auto world = random_world(3);
  Rng rng(3);
  const auto truth = sample_ground_truth_reward(4, rng);
  const auto demos = generate_optimal_demos(world, truth, 20, {0, 10, 20}, rng);
  const auto pairs = dedup_state_actions(demos.trajectories);
  double prev = -std::numeric_limits<double>::infinity();
  for (double beta : {1.0, 10.0, 100.0, 1000.0}) {
    const double ll = boltzmann_log_likelihood(world, pairs, truth.w, beta);
    CHECK(ll <= 0.0);
    CHECK(ll >= prev - 1e-12);
    prev = ll;
  }
}

TEST_CASE("likelihood is invariant to a per-state shift of Q") {
  const auto world = random_world(4);
  Rng rng(4);
  const auto w = random_unit_vector(4, rng);
  auto q = value_iteration(world, w);
  const std::vector<std::pair<int, int>> pairs{{0, 0}, {3, 2}, {3, 1}, {20, 3}};
  const double before = boltzmann_log_likelihood(q, pairs, 5.0);
  for (int a = 0; a < 4; ++a) q.q[3 * 4 + a] += 17.5;
  CHECK(boltzmann_log_likelihood(q, pairs, 5.0) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("one value-iteration solve per evaluation") {
  const auto world = random_world(5);
  BoltzmannLikelihood lik(world, {{0, 0}, {1, 1}}, 50.0);
  Rng rng(5);
  for (int i = 0; i < 7; ++i) lik(random_unit_vector(4, rng));
  CHECK(lik.value_iteration_calls() == 7);

  McmcConfig cfg = McmcConfig::gridworld_defaults();
  cfg.n_steps = 200;
  cfg.burn_in = 20;
  const auto res = run_mcmc_birl(world, {{0, 0}, {1, 1}}, cfg, rng);
  // One solve for the initial state (always finite under a flat prior) plus one per proposal.
  CHECK(res.value_iteration_calls == cfg.n_steps + 1);
  CHECK(res.chain.size() == 201);
}

TEST_CASE("warm starting does not change the likelihood") {
  const auto world = random_world(6);
  const std::vector<std::pair<int, int>> pairs{{0, 0}, {8, 3}, {30, 1}};
  BoltzmannLikelihood warm(world, pairs, 50.0, 1e-10, true);
  BoltzmannLikelihood cold(world, pairs, 50.0, 1e-10, false);
  Rng rng(6);
  for (int i = 0; i < 10; ++i) {
    const auto w = random_unit_vector(4, rng);
    CHECK(warm(w) == doctest::Approx(cold(w)).epsilon(1e-6));
  }
}

TEST_CASE("posterior concentrates on the halfspace implied by the demonstration") {
  // 3x1 corridor: the left cell carries feature 0, the others feature 1. An
  // expert walking left from both right cells prefers feature 0.
  const auto world = GridWorld::grid(3, 1, FeatureTable(3, 2, {1, 0, 0, 1, 0, 1}), 0.9);
  const std::vector<std::pair<int, int>> pairs{{1, static_cast<int>(Move::Left)},
                                               {2, static_cast<int>(Move::Left)}};
  const double beta = 50.0;

  // Exhaustive likelihood over 4096 angles.
  const auto bins = oracle::circle_posterior_bins(
      [&](const std::vector<double>& w) { return boltzmann_log_likelihood(world, pairs, w, beta); },
      4096, 4096);
  double exact_mass = 0.0;
  for (int j = 0; j < 4096; ++j) {
    const double t = -std::numbers::pi + 2.0 * std::numbers::pi * (j + 0.5) / 4096;
    if (std::cos(t) > std::sin(t)) exact_mass += bins[j];
  }
  CHECK(exact_mass > 0.9);

  McmcConfig cfg = McmcConfig::gridworld_defaults();
  cfg.step_sigma = 0.2;
  cfg.n_steps = 20000;
  cfg.burn_in = 2000;
  cfg.thin = 1;
  Rng rng(8);
  const auto chain = run_mcmc_birl(world, pairs, cfg, rng).chain.retained(cfg.burn_in, 1);
  double in_half = 0.0;
  for (std::size_t i = 0; i < chain.size(); ++i)
    if (chain.sample(i)[0] > chain.sample(i)[1]) in_half += 1.0;
  in_half /= static_cast<double>(chain.size());
  CHECK(in_half == doctest::Approx(exact_mass).epsilon(0.05));
}

TEST_CASE("B-IRL input errors") {
  const auto world = random_world(7);
  McmcConfig cfg = McmcConfig::gridworld_defaults();
  Rng rng(7);
  CHECK_THROWS_AS(run_mcmc_birl(world, {}, cfg, rng), std::invalid_argument);
  CHECK_THROWS_AS(BoltzmannLikelihood(world, {{36, 0}}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(BoltzmannLikelihood(world, {{0, 4}}, 1.0), std::invalid_argument);
}
