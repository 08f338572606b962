#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "brex/demos.hpp"
#include "brex/rex.hpp"

namespace brex {

/// The only performance statistic implemented: expected return w.Phi.
enum class PerformanceStatistic { ExpectedReturn };

/// One row per chain sample: w.phi_eval.
std::vector<double> posterior_returns(const PosteriorChain& chain, std::span<const double> phi_eval);

/// The ceil(delta N)-th smallest value (1-based, clamped to [1, N]).
double var_bound(std::span<const double> returns, double delta);

/// 1-based rank ceil(delta N) clamped to [1, N], used by var_bound.
std::size_t var_order_index(std::size_t n, double delta);

struct EvalPolicy {
  std::string name;
  std::vector<double> phi;
  std::optional<double> true_return;
  double length = 0.0;
};

struct EvalRow {
  std::string name;
  double mean = 0.0;
  double var = 0.0;
  std::optional<double> true_return;
  double length = 0.0;
};

struct EvalReport {
  double delta = 0.05;
  PerformanceStatistic statistic = PerformanceStatistic::ExpectedReturn;
  std::string provenance;
  std::vector<EvalRow> rows;  // sorted by VaR, highest first

  std::string to_csv() const;
  std::string to_json() const;
};

EvalRow summarize_returns(const std::string& name, std::span<const double> returns, double delta);

/// Mean and delta-VaR per policy over a (burned and thinned) chain.
EvalReport evaluate_policies(const PosteriorChain& chain, const std::vector<EvalPolicy>& policies,
                             double delta);

/// Same, over any sample matrix of returns (one vector per policy); used for
/// the ensemble and dropout baselines.
EvalReport evaluate_return_samples(const std::vector<EvalPolicy>& policies,
                                   const std::vector<std::vector<double>>& returns, double delta);

enum class RankPosition { Best, Worst };

struct RerankResult {
  PreferenceDataset data;
  PosteriorChain chain;
};

/// Appends `new_traj` (featurized with `table`) ranked below or above every
/// existing trajectory, then reruns Bayesian REX.
RerankResult rerank_with_new_demo(const PreferenceDataset& data, const Trajectory& new_traj,
                                  const FeatureTable& table, RankPosition position,
                                  const McmcConfig& cfg, Rng& rng);

}  // namespace brex
