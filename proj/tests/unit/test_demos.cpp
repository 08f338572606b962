#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <stdexcept>

#include "brex/demos.hpp"
#include "worlds.hpp"

using namespace brex;
using namespace testing_worlds;

TEST_CASE("ground-truth reward sampler") {
  Rng rng(5);
  const int n = 100000, k = 4;
  std::vector<double> sum(k, 0.0), sq(k, 0.0);
  for (int i = 0; i < n; ++i) {
    const auto r = sample_ground_truth_reward(k, rng);
    REQUIRE(r.norm == NormTag::L1);
    REQUIRE(std::abs(l1_norm(r.w) - 1.0) < 1e-12);
    for (int j = 0; j < k; ++j) {
      sum[j] += r.w[j];
      sq[j] += r.w[j] * r.w[j];
    }
  }
  for (int j = 0; j < k; ++j) {
    const double mean = sum[j] / n;
    const double sd = std::sqrt(sq[j] / n - mean * mean);
    CHECK(std::abs(mean) < 3.0 * sd / std::sqrt(n));
    // |w_j| is Beta(1, k-1) on the simplex: E[w_j^2] = 2 / (k (k + 1)).
    CHECK(sq[j] / n == doctest::Approx(2.0 / (k * (k + 1))).epsilon(0.02));
  }
}

TEST_CASE("ranked random demonstrations") {
  const auto world = random_world(2);
  Rng rng(3);
  const auto truth = sample_ground_truth_reward(4, rng);
  const auto data = generate_ranked_random_demos(world, truth, 10, 20, rng);
  CHECK(data.size() == 10);
  CHECK(data.prefs.size() == 45);
  CHECK(data.ranking_source == RankingSource::GroundTruth);
  CHECK_NOTHROW(data.validate());
  for (const auto& t : data.trajectories) CHECK(t.length() == 20);
  for (const auto& p : data.prefs) {
    const double rw = truth.dot(data.feature_sums[p.worse]);
    const double rb = truth.dot(data.feature_sums[p.better]);
    CHECK(rw <= rb);
    if (rw == rb) CHECK(p.worse < p.better);
  }
  CHECK(data.lowest_ranked().has_value());
  CHECK_THROWS_AS(generate_ranked_random_demos(world, truth, 1, 20, rng), std::invalid_argument);
}

TEST_CASE("ties rank the earlier trajectory lower") {
  // A single-state world makes every return equal.
  const auto world = single_state(0.9);
  Rng rng(1);
  const auto data = generate_ranked_random_demos(world, {{1.0}, NormTag::L1}, 3, 5, rng);
  CHECK(data.prefs == std::vector<Preference>{{0, 1}, {0, 2}, {1, 2}});
  CHECK(data.lowest_ranked() == 0);
}

TEST_CASE("optimal demonstrations follow Q*") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto world = random_world(seed, 3, 3, 3);
    Rng rng(seed);
    const auto truth = sample_ground_truth_reward(3, rng);
    const auto q = value_iteration(world, truth.w);
    const int horizon = 4;
    std::vector<int> starts{0, 4, 8};
    const auto data = generate_optimal_demos(world, truth, horizon, starts, rng);
    CHECK(data.prefs.empty());
    REQUIRE(data.size() == 3);
    const auto reward = world.state_rewards(truth.w);
    for (int i = 0; i < 3; ++i) {
      // Brute force over all 4^horizon action sequences of
      // sum_t gamma^t r(s_t) + gamma^horizon V*(s_horizon); the demo must attain the max.
      const auto& traj = data.trajectories[i];
      double best = -std::numeric_limits<double>::infinity();
      std::function<void(int, int, double, double)> search = [&](int s, int t, double acc,
                                                                  double disc) {
        if (t == horizon) {
          best = std::max(best, acc + disc * q.v[s]);
          return;
        }
        for (int a = 0; a < 4; ++a)
          search(world.next_state(s, a), t + 1, acc + disc * reward[s], disc * world.gamma());
      };
      search(starts[i], 0, 0.0, 1.0);
      double demo = 0.0, disc = 1.0;
      int s = traj.states[0];
      for (int t = 0; t < horizon; ++t) {
        demo += disc * reward[traj.states[t]];
        disc *= world.gamma();
        s = world.next_state(traj.states[t], traj.actions[t]);
      }
      demo += disc * q.v[s];
      CHECK(demo == doctest::Approx(best).epsilon(1e-9));
      CHECK(traj.states[0] == starts[i]);
    }
  }
}

TEST_CASE("Boltzmann demonstrator is stochastic but valid") {
  const auto world = random_world(9);
  Rng rng(9);
  const auto truth = sample_ground_truth_reward(4, rng);
  const auto data = generate_optimal_demos(world, truth, 20, {0, 1, 2}, rng, {1.0});
  for (const auto& t : data.trajectories)
    for (int i = 0; i + 1 < t.length(); ++i)
      CHECK(t.states[i + 1] == world.next_state(t.states[i], t.actions[i]));
}

TEST_CASE("auto-ranking against random rollouts") {
  const auto world = random_world(4);
  Rng rng(4);
  const auto truth = sample_ground_truth_reward(4, rng);
  const auto optimal = generate_optimal_demos(world, truth, 20, {1, 2, 3}, rng);

  const auto same = auto_rank_vs_random(optimal, world, 0, 20, rng);
  CHECK(same.size() == 3);
  CHECK(same.prefs.empty());

  const auto data = auto_rank_vs_random(optimal, world, 5, 20, rng);
  CHECK(data.size() == 8);
  CHECK(data.prefs.size() == 15);
  CHECK(data.ranking_source == RankingSource::AutoGenerated);
  for (const auto& p : data.prefs) {
    CHECK(p.worse >= 3);
    CHECK(p.better < 3);
  }
  // Every random rollout is minimal, so there is no unique lowest-ranked one.
  CHECK_FALSE(data.lowest_ranked().has_value());
  CHECK_NOTHROW(data.validate());
}

TEST_CASE("state-action deduplication") {
  Trajectory stay{{1, 1, 1, 1}, {0, 0, 0, 0}};
  CHECK(dedup_state_actions(stay).size() == 1);
  Trajectory distinct{{0, 1, 2, 3}, {3, 3, 3, 1}};
  const auto pairs = dedup_state_actions(distinct);
  CHECK(pairs.size() == 4);
  CHECK(pairs[2] == std::pair<int, int>{2, 3});
  const auto both = dedup_state_actions(std::vector<Trajectory>{distinct, stay, distinct});
  CHECK(both.size() == 5);
  CHECK(both.back() == std::pair<int, int>{1, 0});
}

TEST_CASE("dataset validation and lowest-ranked detection") {
  PreferenceDataset data;
  for (int i = 0; i < 3; ++i) {
    data.trajectories.push_back({{0}, {0}});
    data.feature_sums.push_back({static_cast<double>(i)});
  }
  data.prefs = {{0, 1}, {1, 2}};
  CHECK_NOTHROW(data.validate());
  CHECK(data.lowest_ranked() == 0);

  data.prefs = {{0, 2}, {1, 2}};
  CHECK_FALSE(data.lowest_ranked().has_value());

  data.prefs = {{0, 0}};
  CHECK_THROWS_AS(data.validate(), std::invalid_argument);
  data.prefs = {{0, 3}};
  CHECK_THROWS_AS(data.validate(), std::invalid_argument);
  data.prefs = {{0, 1}, {1, 0}};
  CHECK_THROWS_AS(data.validate(), std::invalid_argument);
  data.prefs = {{0, 1}, {0, 1}};
  CHECK_NOTHROW(data.validate());

  data.prefs.clear();
  data.feature_sums[1] = {1.0, 2.0};
  CHECK_THROWS_AS(data.validate(), std::invalid_argument);
}

TEST_CASE("prefs_from_order") {
  CHECK(prefs_from_order({2, 0, 1}) == std::vector<Preference>{{2, 0}, {2, 1}, {0, 1}});
  CHECK(prefs_from_order({}).empty());
}

TEST_CASE("ranking source names round-trip") {
  for (auto s : {RankingSource::GroundTruth, RankingSource::AutoGenerated, RankingSource::External})
    CHECK(ranking_source_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(ranking_source_from_string("human"), std::invalid_argument);
}
