#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "../oracles.hpp"
#include "brex/hcpe.hpp"
#include "worlds.hpp"

using namespace brex;
using namespace testing_worlds;

namespace {

PosteriorChain random_chain(int n, int k, Rng& rng) {
  PosteriorChain chain;
  chain.k = k;
  for (int i = 0; i < n; ++i) chain.push(random_unit_vector(k, rng), 0.0);
  return chain;
}

}  // namespace

TEST_CASE("VaR order statistic") {
  std::vector<double> xs(100);
  for (int i = 0; i < 100; ++i) xs[i] = 100 - i;  // 100..1, unsorted input
  CHECK(var_bound(xs, 0.05) == 5.0);
  CHECK(var_bound(xs, 0.5) == 50.0);
  CHECK(var_bound(xs, 0.01) == 1.0);
  CHECK(var_bound(xs, 0.999) == 100.0);
  CHECK(var_order_index(100, 0.05) == 5);
  CHECK(var_order_index(10, 0.01) == 1);
  CHECK(var_order_index(3, 0.5) == 2);
  CHECK(var_bound(std::vector<double>{7.0}, 0.05) == 7.0);
  CHECK_THROWS_AS(var_bound(xs, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(var_bound(xs, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(var_bound(std::vector<double>{}, 0.5), std::invalid_argument);
}

TEST_CASE("VaR equals the full-sort oracle") {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> xs(1000);
    for (double& x : xs) x = standard_normal(rng);
    for (double delta : {0.01, 0.05, 0.5}) CHECK(var_bound(xs, delta) == oracle::sorted_var(xs, delta));
  }
}

TEST_CASE("posterior returns are linear in the evaluation features") {
  Rng rng(2);
  const auto chain = random_chain(500, 4, rng);
  const std::vector<double> a{1.0, 2.0, -1.0, 0.5}, b{0.0, -3.0, 4.0, 1.5};
  const double ca = 0.7, cb = -1.3;
  std::vector<double> mix(4);
  for (int j = 0; j < 4; ++j) mix[j] = ca * a[j] + cb * b[j];
  const auto ra = posterior_returns(chain, a), rb = posterior_returns(chain, b);
  const auto rm = posterior_returns(chain, mix);
  for (std::size_t i = 0; i < chain.size(); ++i) CHECK(std::abs(rm[i] - (ca * ra[i] + cb * rb[i])) < 1e-9);

  // Mean return equals the unnormalised chain mean dotted with phi.
  const auto mean = chain_mean(chain, 0, 1);
  double avg = 0.0;
  for (double r : ra) avg += r;
  avg /= static_cast<double>(ra.size());
  CHECK(std::abs(avg - dot(mean.raw, a)) < 1e-9);
  CHECK_THROWS_AS(posterior_returns(chain, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("report ordering") {
  Rng rng(3);
  PosteriorChain chain;
  chain.k = 2;
  for (int i = 0; i < 400; ++i) {
    // Both coordinates positive so that phi (2, 2) dominates (1, 1) samplewise.
    chain.push(std::vector<double>{0.2 + uniform01(rng), 0.2 + uniform01(rng)}, 0.0);
  }
  const std::vector<EvalPolicy> policies{
      {"low", {1.0, 1.0}, 2.0, 20}, {"high", {2.0, 2.0}, 4.0, 20}, {"low-copy", {1.0, 1.0}, 2.0, 20}};
  const auto report = evaluate_policies(chain, policies, 0.05);
  REQUIRE(report.rows.size() == 3);
  CHECK(report.rows[0].name == "high");
  CHECK(report.rows[0].mean > report.rows[1].mean);
  CHECK(report.rows[0].var > report.rows[1].var);
  // Identical inputs give identical rows; the stable sort keeps input order.
  CHECK(report.rows[1].name == "low");
  CHECK(report.rows[2].name == "low-copy");
  CHECK(report.rows[1].mean == report.rows[2].mean);
  CHECK(report.rows[1].var == report.rows[2].var);

  const auto csv = report.to_csv();
  CHECK(csv.find("policy,mean_return,var_bound,true_return,length\n") != std::string::npos);
  CHECK(csv.find("high,") != std::string::npos);
  const auto j = nlohmann::json::parse(report.to_json());
  CHECK(j["rows"].size() == 3);
  CHECK(j["rows"][0]["policy"] == "high");
  CHECK(j["delta"].get<double>() == 0.05);
}

TEST_CASE("VaR ranks checkpoint-graded gridworld policies") {
  // Four policies mixing the optimal and uniform policies; more optimal mass
  // means a better checkpoint. Count trials where the VaR ordering matches
  // the ground-truth ordering.
  int matches = 0;
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const auto world = random_world(1000 + trial);
    Rng rng(2000 + trial);
    const auto truth = sample_ground_truth_reward(4, rng);
    const auto data = generate_ranked_random_demos(world, truth, 20, 20, rng);
    McmcConfig cfg = McmcConfig::gridworld_defaults();
    const auto chain = run_mcmc(data, cfg, rng).retained(cfg.burn_in, cfg.thin);

    const auto opt = greedy_policy(value_iteration(world, truth.w));
    const auto uni = StochasticPolicy::uniform(world.num_states(), 4);
    std::vector<EvalPolicy> policies;
    const double mix[] = {0.0, 0.4, 0.7, 1.0};
    for (int c = 0; c < 4; ++c) {
      StochasticPolicy pi = uni;
      for (std::size_t i = 0; i < pi.probs.size(); ++i)
        pi.probs[i] = mix[c] * opt.probs[i] + (1.0 - mix[c]) * uni.probs[i];
      const auto phi = feature_expectations_horizon(world, pi, 20);
      policies.push_back({"ckpt" + std::to_string(c), phi, truth.dot(phi), 20});
    }
    const auto report = evaluate_policies(chain, policies, 0.05);
    std::vector<EvalRow> by_truth = report.rows;
    std::stable_sort(by_truth.begin(), by_truth.end(),
                     [](const EvalRow& a, const EvalRow& b) { return *a.true_return > *b.true_return; });
    bool same = true;
    for (int i = 0; i < 4; ++i) same = same && by_truth[i].name == report.rows[i].name;
    matches += same;
  }
  CHECK(matches >= 16);
}

TEST_CASE("rerank with a new demonstration") {
  const auto world = random_world(5);
  Rng rng(5);
  const auto truth = sample_ground_truth_reward(4, rng);
  const auto data = generate_ranked_random_demos(world, truth, 6, 20, rng);
  McmcConfig cfg = McmcConfig::gridworld_defaults();
  cfg.n_steps = 2000;
  cfg.burn_in = 200;
  const Trajectory extra{{0, 1, 2}, {3, 3, 3}};

  const auto worst = rerank_with_new_demo(data, extra, world.feature_table(), RankPosition::Worst, cfg, rng);
  CHECK(worst.data.size() == 7);
  CHECK(worst.data.prefs.size() == data.prefs.size() + 6);
  CHECK(worst.data.lowest_ranked() == 6);
  CHECK(worst.chain.size() == 2001);

  const auto best = rerank_with_new_demo(data, extra, world.feature_table(), RankPosition::Best, cfg, rng);
  for (std::size_t i = data.prefs.size(); i < best.data.prefs.size(); ++i) CHECK(best.data.prefs[i].better == 6);

  CHECK_THROWS_AS(rerank_with_new_demo(data, extra, FeatureTable(36, 2, std::vector<double>(72, 0.0)),
                                       RankPosition::Worst, cfg, rng),
                  std::invalid_argument);
}

TEST_CASE("a demonstration added without preferences leaves the likelihood unchanged") {
  const auto world = random_world(6);
  Rng rng(6);
  const auto data = generate_ranked_random_demos(world, sample_ground_truth_reward(4, rng), 5, 20, rng);
  PreferenceDataset more = data;
  more.add_trajectory(world.feature_table(), Trajectory{{3, 4}, {3, 3}});
  for (int i = 0; i < 20; ++i) {
    const auto w = random_unit_vector(4, rng);
    CHECK(ranking_log_likelihood(w, more, 50.0) == ranking_log_likelihood(w, data, 50.0));
  }
}

TEST_CASE("ranking a long zero-progress trajectory worst lowers its mean return") {
  // State 0 is alive without progress (0, 1); state 1 makes progress (1, 1).
  const FeatureTable table(2, 2, {0.0, 1.0, 1.0, 1.0});
  auto walk = [](int progress, int length) {
    Trajectory t;
    for (int i = 0; i < length; ++i) t.states.push_back(i < progress ? 1 : 0);
    t.actions.assign(static_cast<std::size_t>(length), 0);
    return t;
  };
  PreferenceDataset data;
  for (int i = 1; i <= 3; ++i) data.add_trajectory(table, walk(i, 10 * i));
  data.prefs = prefs_from_order({0, 1, 2});
  const std::vector<double> hack_phi{0.0, 100.0};
  const McmcConfig cfg = McmcConfig::gridworld_defaults();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const auto before = run_mcmc(data, cfg, rng).retained(cfg.burn_in, cfg.thin);
    const auto after = rerank_with_new_demo(data, walk(0, 100), table, RankPosition::Worst, cfg, rng);
    const auto old_mean = chain_mean(before, 0, 1).raw;
    const auto new_mean = chain_mean(after.chain, cfg.burn_in, cfg.thin).raw;
    CHECK(dot(new_mean, hack_phi) < dot(old_mean, hack_phi));
  }
}
