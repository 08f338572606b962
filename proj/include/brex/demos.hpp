#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "brex/mdp.hpp"
#include "brex/rng.hpp"

namespace brex {

/// (worse, better): trajectories[worse] is preferred less than trajectories[better].
struct Preference {
  int worse = 0;
  int better = 0;

  friend bool operator==(const Preference&, const Preference&) = default;
};

enum class RankingSource { GroundTruth, AutoGenerated, External };

const char* to_string(RankingSource source);
RankingSource ranking_source_from_string(const std::string& name);

struct DatasetProvenance {
  std::uint64_t seed = 0;
  std::uint64_t world_hash = 0;
};

struct PreferenceDataset {
  std::vector<Trajectory> trajectories;
  std::vector<std::vector<double>> feature_sums;
  std::vector<Preference> prefs;
  RankingSource ranking_source = RankingSource::External;
  DatasetProvenance provenance;

  int size() const { return static_cast<int>(trajectories.size()); }
  int feature_dim() const {
    return feature_sums.empty() ? 0 : static_cast<int>(feature_sums.front().size());
  }

  /// Throws std::invalid_argument when an invariant is broken: index ranges,
  /// self-pairs, contradictory duplicates, or feature-sum arity.
  void validate() const;

  /// The unique trajectory that is never preferred over anything but appears
  /// on the worse side of some preference; nullopt when absent or ambiguous.
  std::optional<int> lowest_ranked() const;

  void add_trajectory(const FeatureTable& table, Trajectory traj);
};

/// Recomputes every feature sum from the stored trajectories with `table`.
void recompute_feature_sums(PreferenceDataset& data, const FeatureTable& table);

/// Uniform on the L1 unit sphere: simplex point from normalized exponentials,
/// then independent random signs.
RewardWeights sample_ground_truth_reward(int k, Rng& rng);

/// Uniform-random-policy rollouts from uniform start states, totally ordered by
/// true return (ties: lower generation index ranks lower), expanded to all pairs.
PreferenceDataset generate_ranked_random_demos(const GridWorld& mdp,
                                               const RewardWeights& true_reward, int m,
                                               int horizon, Rng& rng);

struct DemonstratorOptions {
  /// Empty: greedy on Q*. Otherwise Boltzmann-rational with this beta.
  std::optional<double> boltzmann_beta;
};

/// Demonstrations from `starts`, no preferences.
PreferenceDataset generate_optimal_demos(const GridWorld& mdp, const RewardWeights& true_reward,
                                         int horizon, const std::vector<int>& starts, Rng& rng,
                                         const DemonstratorOptions& opts = {});

/// Appends `n_random` uniform-random rollouts, each labelled worse than every
/// trajectory already in `optimal`.
PreferenceDataset auto_rank_vs_random(const PreferenceDataset& optimal, const GridWorld& mdp,
                                      int n_random, int horizon, Rng& rng);

/// Distinct (state, action) pairs in order of first occurrence.
std::vector<std::pair<int, int>> dedup_state_actions(const Trajectory& traj);
std::vector<std::pair<int, int>> dedup_state_actions(const std::vector<Trajectory>& trajs);

/// All pairs implied by an ascending ranking (ranking[0] is the worst).
std::vector<Preference> prefs_from_order(const std::vector<int>& ascending);

}  // namespace brex
