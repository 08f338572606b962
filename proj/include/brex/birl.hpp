#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "brex/mdp.hpp"
#include "brex/rex.hpp"

namespace brex {

/// Boltzmann-rational state-action likelihood. Every evaluation solves the MDP
/// for Q*; the previous solution warm-starts the next solve.
///
/// Stateful (warm start and call counter); use one instance per thread.
class BoltzmannLikelihood {
 public:
  BoltzmannLikelihood(const GridWorld& mdp, std::vector<std::pair<int, int>> demo_pairs,
                      double beta, double tol = kDefaultSolverTol, bool warm_start = true);

  double operator()(std::span<const double> w);
  std::int64_t value_iteration_calls() const { return calls_; }

 private:
  const GridWorld* mdp_;
  std::vector<std::pair<int, int>> pairs_;
  double beta_;
  double tol_;
  bool warm_start_;
  QTable last_;
  bool have_last_ = false;
  std::int64_t calls_ = 0;
};

/// sum over pairs of beta Q*(s,a) - logsumexp_b beta Q*(s,b), Q* solved for w.
double boltzmann_log_likelihood(const GridWorld& mdp, const std::vector<std::pair<int, int>>& pairs,
                                std::span<const double> w, double beta);

/// Same per-pair sum for an already solved Q table.
double boltzmann_log_likelihood(const QTable& q, const std::vector<std::pair<int, int>>& pairs,
                                double beta);

struct BirlResult {
  PosteriorChain chain;
  std::int64_t value_iteration_calls = 0;
};

/// Metropolis-Hastings over unit-L2 weights with a flat prior and the same
/// proposal as Bayesian REX. `demo_pairs` should already be deduplicated.
BirlResult run_mcmc_birl(const GridWorld& mdp, const std::vector<std::pair<int, int>>& demo_pairs,
                         const McmcConfig& cfg, Rng& rng);

}  // namespace brex
