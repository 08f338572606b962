#include "brex/birl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace brex {

double boltzmann_log_likelihood(const QTable& q, const std::vector<std::pair<int, int>>& pairs,
                                double beta) {
  double total = 0.0;
  for (const auto& [s, a] : pairs) {
    if (s < 0 || s >= q.num_states || a < 0 || a >= q.num_actions)
      throw std::invalid_argument("demonstration pair out of range");
    const auto row = q.row(s);
    const double top = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double qb : row) z += std::exp(beta * (qb - top));
    total += beta * (row[a] - top) - std::log(z);
  }
  return total;
}

double boltzmann_log_likelihood(const GridWorld& mdp, const std::vector<std::pair<int, int>>& pairs,
                                std::span<const double> w, double beta) {
  return boltzmann_log_likelihood(value_iteration(mdp, w), pairs, beta);
}

BoltzmannLikelihood::BoltzmannLikelihood(const GridWorld& mdp,
                                         std::vector<std::pair<int, int>> demo_pairs, double beta,
                                         double tol, bool warm_start)
    : mdp_(&mdp), pairs_(std::move(demo_pairs)), beta_(beta), tol_(tol), warm_start_(warm_start) {
  for (const auto& [s, a] : pairs_) {
    mdp.check_state(s);
    if (a < 0 || a >= mdp.num_actions()) throw std::invalid_argument("demonstration action out of range");
  }
}

double BoltzmannLikelihood::operator()(std::span<const double> w) {
  QTable q = value_iteration(*mdp_, w, tol_, warm_start_ && have_last_ ? &last_ : nullptr);
  ++calls_;
  const double ll = boltzmann_log_likelihood(q, pairs_, beta_);
  last_ = std::move(q);
  have_last_ = true;
  return ll;
}

BirlResult run_mcmc_birl(const GridWorld& mdp, const std::vector<std::pair<int, int>>& demo_pairs,
                         const McmcConfig& cfg, Rng& rng) {
  if (demo_pairs.empty()) throw std::invalid_argument("Bayesian IRL needs at least one demonstration");
  BoltzmannLikelihood likelihood(mdp, demo_pairs, cfg.beta);
  BirlResult out;
  out.chain = metropolis_hastings(
      mdp.num_features(), [&likelihood](std::span<const double> w) { return likelihood(w); }, cfg,
      rng);
  out.value_iteration_calls = likelihood.value_iteration_calls();
  return out;
}

}  // namespace brex
