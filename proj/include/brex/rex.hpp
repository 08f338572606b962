#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "brex/demos.hpp"
#include "brex/mdp.hpp"
#include "brex/rng.hpp"

namespace brex {

struct McmcConfig {
  double beta = 1.0;          // inverse temperature on returns
  double step_sigma = 0.005;  // Gaussian proposal width before renormalising
  int n_steps = 200000;       // proposals; the chain holds n_steps + 1 states
  int burn_in = 5000;
  int thin = 20;
  std::uint64_t seed = 0;
  int max_init_retries = 10000;

  void validate() const;

  /// Settings used for the high-dimensional (learned feature) experiments.
  static McmcConfig deep_defaults();
  /// Settings used for the gridworld ablations: beta 50, step 0.05, 10000
  /// proposals, 10% burn-in, every 5th sample.
  static McmcConfig gridworld_defaults();
};

/// Ordered MCMC states, one weight vector per row, with the unnormalised log
/// posterior of each row.
struct PosteriorChain {
  int k = 0;
  std::vector<double> samples;  // row-major (sample, k)
  std::vector<double> log_post;
  std::int64_t accept_count = 0;
  std::int64_t proposals = 0;
  McmcConfig config;

  std::size_t size() const { return log_post.size(); }
  std::span<const double> sample(std::size_t i) const {
    return {samples.data() + i * static_cast<std::size_t>(k), static_cast<std::size_t>(k)};
  }
  double acceptance_rate() const {
    return proposals == 0 ? 0.0 : static_cast<double>(accept_count) / static_cast<double>(proposals);
  }

  /// Rows burn_in, burn_in + thin, burn_in + 2 thin, ...
  PosteriorChain retained(int burn_in, int thin) const;
  void push(std::span<const double> w, double lp);
};

/// Pairwise ranking likelihood on cached feature sums, plus the non-negative
/// return prior on the lowest-ranked trajectory.
///
/// Holds scratch space; use one instance per thread.
class RankingModel {
 public:
  RankingModel(const PreferenceDataset& data, double beta);

  int dim() const { return k_; }
  double log_likelihood(std::span<const double> w) const;
  /// 0 when the lowest-ranked trajectory has non-negative return (or no such
  /// trajectory exists), -inf otherwise.
  double log_prior(std::span<const double> w) const;
  double log_posterior(std::span<const double> w) const;
  bool has_prior() const { return lowest_.has_value(); }

 private:
  int m_ = 0;
  int k_ = 0;
  double beta_ = 1.0;
  std::vector<double> phi_;  // (m, k)
  std::vector<Preference> prefs_;
  std::optional<int> lowest_;
  mutable std::vector<double> returns_;
};

double ranking_log_likelihood(std::span<const double> w, const PreferenceDataset& data,
                              double beta);
double log_prior(std::span<const double> w, const PreferenceDataset& data);

/// normalize(w + sigma z), z standard normal.
RewardWeights propose(std::span<const double> w, double step_sigma, Rng& rng);
void propose_into(std::span<const double> w, double step_sigma, Rng& rng, std::span<double> out);

/// Uniformly random point on the L2 unit sphere.
std::vector<double> random_unit_vector(int k, Rng& rng);

using LogDensity = std::function<double(std::span<const double>)>;

/// Random-walk Metropolis-Hastings on the unit sphere with the plain
/// posterior ratio as acceptance test. The chain starts at a random unit
/// vector, redrawn until the density is finite.
PosteriorChain metropolis_hastings(int k, const LogDensity& log_density, const McmcConfig& cfg,
                                   Rng& rng);

PosteriorChain run_mcmc(const PreferenceDataset& data, const McmcConfig& cfg, Rng& rng);

struct ChainMean {
  std::vector<double> raw;  // plain average of retained samples
  RewardWeights weights;    // raw projected back onto the L2 sphere
};

ChainMean chain_mean(const PosteriorChain& chain, int burn_in, int thin);
RewardWeights chain_map(const PosteriorChain& chain);

}  // namespace brex
