#include "brex/demos.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace brex {

const char* to_string(RankingSource source) {
  switch (source) {
    case RankingSource::GroundTruth:
      return "ground-truth";
    case RankingSource::AutoGenerated:
      return "auto-generated";
    case RankingSource::External:
      return "external";
  }
  return "external";
}

RankingSource ranking_source_from_string(const std::string& name) {
  if (name == "ground-truth") return RankingSource::GroundTruth;
  if (name == "auto-generated") return RankingSource::AutoGenerated;
  if (name == "external") return RankingSource::External;
  throw std::invalid_argument("unknown ranking_source '" + name + "'");
}

void PreferenceDataset::validate() const {
  if (feature_sums.size() != trajectories.size())
    throw std::invalid_argument("feature_sums must have one entry per trajectory");
  const std::size_t k = feature_sums.empty() ? 0 : feature_sums.front().size();
  for (const auto& f : feature_sums)
    if (f.size() != k) throw std::invalid_argument("feature sums differ in length");
  for (const auto& t : trajectories)
    if (t.states.size() != t.actions.size())
      throw std::invalid_argument("trajectory states and actions differ in length");
  std::set<std::pair<int, int>> seen;
  const int m = size();
  for (const auto& p : prefs) {
    if (p.worse < 0 || p.worse >= m || p.better < 0 || p.better >= m)
      throw std::invalid_argument("preference index out of range");
    if (p.worse == p.better) throw std::invalid_argument("preference pairs a trajectory with itself");
    if (seen.count({p.better, p.worse}))
      throw std::invalid_argument("contradictory preferences between " + std::to_string(p.worse) +
                                  " and " + std::to_string(p.better));
    seen.insert({p.worse, p.better});
  }
}

std::optional<int> PreferenceDataset::lowest_ranked() const {
  std::vector<char> is_better(static_cast<std::size_t>(size()), 0);
  std::vector<char> is_worse(static_cast<std::size_t>(size()), 0);
  for (const auto& p : prefs) {
    is_better[p.better] = 1;
    is_worse[p.worse] = 1;
  }
  std::optional<int> found;
  for (int i = 0; i < size(); ++i) {
    if (is_worse[i] && !is_better[i]) {
      if (found) return std::nullopt;
      found = i;
    }
  }
  return found;
}

void PreferenceDataset::add_trajectory(const FeatureTable& table, Trajectory traj) {
  feature_sums.push_back(trajectory_feature_sum(table, traj));
  trajectories.push_back(std::move(traj));
}

void recompute_feature_sums(PreferenceDataset& data, const FeatureTable& table) {
  data.feature_sums.clear();
  for (const auto& t : data.trajectories) data.feature_sums.push_back(trajectory_feature_sum(table, t));
}

RewardWeights sample_ground_truth_reward(int k, Rng& rng) {
  if (k < 1) throw std::invalid_argument("reward dimension must be at least 1");
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> w(static_cast<std::size_t>(k));
  double total = 0.0;
  for (double& x : w) {
    x = expo(rng);
    total += x;
  }
  for (double& x : w) {
    x /= total;
    if (uniform01(rng) < 0.5) x = -x;
  }
  // Renormalize to absorb rounding in the division.
  const double norm = l1_norm(w);
  for (double& x : w) x /= norm;
  return {std::move(w), NormTag::L1};
}

std::vector<Preference> prefs_from_order(const std::vector<int>& ascending) {
  std::vector<Preference> prefs;
  prefs.reserve(ascending.size() * (ascending.size() - (ascending.empty() ? 0 : 1)) / 2);
  for (std::size_t a = 0; a < ascending.size(); ++a)
    for (std::size_t b = a + 1; b < ascending.size(); ++b)
      prefs.push_back({ascending[a], ascending[b]});
  return prefs;
}

PreferenceDataset generate_ranked_random_demos(const GridWorld& mdp,
                                               const RewardWeights& true_reward, int m,
                                               int horizon, Rng& rng) {
  if (m < 2) throw std::invalid_argument("need at least two demonstrations to rank");
  const auto uniform = StochasticPolicy::uniform(mdp.num_states(), mdp.num_actions());
  PreferenceDataset data;
  data.ranking_source = RankingSource::GroundTruth;
  std::vector<double> returns;
  for (int i = 0; i < m; ++i) {
    const int start = uniform_int(rng, 0, mdp.num_states() - 1);
    data.add_trajectory(mdp.feature_table(), rollout(mdp, uniform, start, horizon, rng));
    returns.push_back(true_reward.dot(data.feature_sums.back()));
  }
  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return returns[a] < returns[b]; });
  data.prefs = prefs_from_order(order);
  return data;
}

PreferenceDataset generate_optimal_demos(const GridWorld& mdp, const RewardWeights& true_reward,
                                         int horizon, const std::vector<int>& starts, Rng& rng,
                                         const DemonstratorOptions& opts) {
  const QTable q = value_iteration(mdp, true_reward.w);
  const StochasticPolicy policy =
      opts.boltzmann_beta ? boltzmann_policy(q, *opts.boltzmann_beta) : greedy_policy(q);
  PreferenceDataset data;
  data.ranking_source = RankingSource::External;
  for (int s : starts) data.add_trajectory(mdp.feature_table(), rollout(mdp, policy, s, horizon, rng));
  return data;
}

PreferenceDataset auto_rank_vs_random(const PreferenceDataset& optimal, const GridWorld& mdp,
                                      int n_random, int horizon, Rng& rng) {
  if (optimal.size() == 0) throw std::invalid_argument("need at least one optimal demonstration");
  if (n_random < 0) throw std::invalid_argument("n_random must be nonnegative");
  PreferenceDataset data = optimal;
  if (n_random == 0) return data;
  const auto uniform = StochasticPolicy::uniform(mdp.num_states(), mdp.num_actions());
  const int m_opt = optimal.size();
  for (int r = 0; r < n_random; ++r) {
    const int start = uniform_int(rng, 0, mdp.num_states() - 1);
    data.add_trajectory(mdp.feature_table(), rollout(mdp, uniform, start, horizon, rng));
    const int idx = data.size() - 1;
    for (int i = 0; i < m_opt; ++i) data.prefs.push_back({idx, i});
  }
  data.ranking_source = RankingSource::AutoGenerated;
  return data;
}

std::vector<std::pair<int, int>> dedup_state_actions(const Trajectory& traj) {
  return dedup_state_actions(std::vector<Trajectory>{traj});
}

std::vector<std::pair<int, int>> dedup_state_actions(const std::vector<Trajectory>& trajs) {
  std::unordered_set<std::uint64_t> seen;
  std::vector<std::pair<int, int>> out;
  for (const auto& t : trajs) {
    for (std::size_t i = 0; i < t.states.size(); ++i) {
      const std::uint64_t key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(t.states[i])) << 32) |
                                static_cast<std::uint32_t>(t.actions[i]);
      if (seen.insert(key).second) out.emplace_back(t.states[i], t.actions[i]);
    }
  }
  return out;
}

}  // namespace brex
