#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "brex/rex.hpp"

namespace brex {

/// The three gridworld ablations.
///   RankedVsOptimal: B-REX on ranked random demos, B-IRL on optimal demos.
///   OnlyRanked:      both on the same ranked random demos.
///   OnlyOptimal:     B-IRL on optimal demos, B-REX on the same demos auto-ranked
///                    against as many random rollouts.
enum class Ablation { RankedVsOptimal, OnlyRanked, OnlyOptimal };

const char* to_string(Ablation a);
/// Accepts "c1", "c2", "c3".
Ablation ablation_from_string(const std::string& name);

struct ExperimentConfig {
  Ablation ablation = Ablation::RankedVsOptimal;
  int n_worlds = 100;
  std::vector<int> demo_counts{2, 5, 10, 20, 30};
  std::uint64_t seed = 0;
  int width = 6;
  int height = 6;
  int num_features = 4;
  double gamma = 0.9;
  int horizon = 20;
  McmcConfig mcmc = McmcConfig::gridworld_defaults();
  int workers = 1;

  void validate() const;
  /// Stable textual form of every field; hashed into output headers.
  std::string canonical() const;
};

/// Losses for one world; nullopt marks a failed run.
struct WorldOutcome {
  std::vector<std::optional<double>> birl;  // one per demo count
  std::vector<std::optional<double>> brex;
  std::vector<std::string> errors;
};

struct ExperimentRow {
  int demo_count = 0;
  double birl_loss = 0.0;
  double brex_loss = 0.0;
  int birl_failures = 0;
  int brex_failures = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<WorldOutcome> worlds;
  std::vector<ExperimentRow> rows;

  /// demo_count,birl_loss,brex_loss with '#' header lines for format,
  /// ablation, seed, config hash and failure counts.
  std::string to_csv() const;
};

/// Runs world `index` (seed = cfg.seed + index) for every demo count.
WorldOutcome run_world(const ExperimentConfig& cfg, int index);

/// Distributes worlds over cfg.workers threads; aggregation is in world order,
/// so the result does not depend on the worker count.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct BenchConfig {
  int n_trajectories = 12;  // all pairs: 66 preferences
  int k = 64;
  int n_proposals = 100000;
  double beta = 1.0;
  double step_sigma = 0.005;
  std::uint64_t seed = 0;
  /// When positive, also time this many B-IRL and B-REX proposals on a random
  /// 6x6 gridworld and report the per-proposal cost ratio.
  int birl_proposals = 0;
};

struct BenchResult {
  int n_prefs = 0;
  int k = 0;
  int n_proposals = 0;
  double seconds = 0.0;
  double proposals_per_second = 0.0;
  double acceptance_rate = 0.0;
  std::optional<double> brex_seconds_per_proposal;
  std::optional<double> birl_seconds_per_proposal;
  std::int64_t birl_value_iteration_calls = 0;

  std::string to_json() const;
};

BenchResult run_bench(const BenchConfig& cfg);

}  // namespace brex
