#include "brex/rex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "brex/log.hpp"

namespace brex {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

void McmcConfig::validate() const {
  if (!(step_sigma > 0.0)) throw std::invalid_argument("step_sigma must be positive");
  if (n_steps < 0) throw std::invalid_argument("n_steps must be nonnegative");
  if (burn_in < 0 || burn_in >= std::max(n_steps, 1))
    throw std::invalid_argument("burn_in must lie in [0, n_steps)");
  if (thin < 1) throw std::invalid_argument("thin must be at least 1");
  if (!std::isfinite(beta) || beta < 0.0) throw std::invalid_argument("beta must be finite and >= 0");
}

McmcConfig McmcConfig::deep_defaults() { return McmcConfig{}; }

McmcConfig McmcConfig::gridworld_defaults() {
  McmcConfig cfg;
  cfg.beta = 50.0;
  cfg.step_sigma = 0.05;
  cfg.n_steps = 10000;
  cfg.burn_in = 1000;
  cfg.thin = 5;
  return cfg;
}

void PosteriorChain::push(std::span<const double> w, double lp) {
  samples.insert(samples.end(), w.begin(), w.end());
  log_post.push_back(lp);
}

PosteriorChain PosteriorChain::retained(int burn_in, int thin) const {
  if (burn_in < 0 || thin < 1) throw std::invalid_argument("invalid burn-in or thinning");
  PosteriorChain out;
  out.k = k;
  out.accept_count = accept_count;
  out.proposals = proposals;
  out.config = config;
  for (std::size_t i = static_cast<std::size_t>(burn_in); i < size(); i += thin) out.push(sample(i), log_post[i]);
  return out;
}

RankingModel::RankingModel(const PreferenceDataset& data, double beta)
    : m_(data.size()), k_(data.feature_dim()), beta_(beta), prefs_(data.prefs),
      returns_(static_cast<std::size_t>(data.size())) {
  data.validate();
  lowest_ = data.lowest_ranked();
  phi_.reserve(static_cast<std::size_t>(m_) * k_);
  for (const auto& f : data.feature_sums) phi_.insert(phi_.end(), f.begin(), f.end());
}

double RankingModel::log_likelihood(std::span<const double> w) const {
  if (static_cast<int>(w.size()) != k_) throw std::invalid_argument("weight dimension mismatch");
  for (int i = 0; i < m_; ++i) returns_[i] = dot(w, {phi_.data() + static_cast<std::size_t>(i) * k_, static_cast<std::size_t>(k_)});
  double total = 0.0;
  for (const auto& p : prefs_) total -= softplus(beta_ * (returns_[p.worse] - returns_[p.better]));
  return total;
}

double RankingModel::log_prior(std::span<const double> w) const {
  if (!lowest_) return 0.0;
  const double ret = dot(w, {phi_.data() + static_cast<std::size_t>(*lowest_) * k_, static_cast<std::size_t>(k_)});
  return ret >= 0.0 ? 0.0 : kNegInf;
}

double RankingModel::log_posterior(std::span<const double> w) const {
  const double prior = log_prior(w);
  if (prior == kNegInf) return kNegInf;
  return prior + log_likelihood(w);
}

double ranking_log_likelihood(std::span<const double> w, const PreferenceDataset& data, double beta) {
  return RankingModel(data, beta).log_likelihood(w);
}

double log_prior(std::span<const double> w, const PreferenceDataset& data) {
  const RankingModel model(data, 1.0);
  if (!model.has_prior()) log_warning("no unique lowest-ranked trajectory; prior is flat");
  return model.log_prior(w);
}

void propose_into(std::span<const double> w, double step_sigma, Rng& rng, std::span<double> out) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    double norm2 = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      out[i] = w[i] + step_sigma * standard_normal(rng);
      norm2 += out[i] * out[i];
    }
    if (norm2 > 0.0) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (double& x : out) x *= inv;
      return;
    }
  }
  throw std::runtime_error("proposal kept landing on the origin");
}

RewardWeights propose(std::span<const double> w, double step_sigma, Rng& rng) {
  RewardWeights out{std::vector<double>(w.size()), NormTag::L2};
  propose_into(w, step_sigma, rng, out.w);
  return out;
}

std::vector<double> random_unit_vector(int k, Rng& rng) {
  std::vector<double> zero(static_cast<std::size_t>(k), 0.0);
  std::vector<double> out(zero.size());
  propose_into(zero, 1.0, rng, out);
  return out;
}

PosteriorChain metropolis_hastings(int k, const LogDensity& log_density, const McmcConfig& cfg,
                                   Rng& rng) {
  cfg.validate();
  if (k < 1) throw std::invalid_argument("dimension must be at least 1");
  PosteriorChain chain;
  chain.k = k;
  chain.config = cfg;
  chain.samples.reserve((static_cast<std::size_t>(cfg.n_steps) + 1) * k);
  chain.log_post.reserve(static_cast<std::size_t>(cfg.n_steps) + 1);

  std::vector<double> current;
  double current_lp = kNegInf;
  for (int attempt = 0; attempt < cfg.max_init_retries; ++attempt) {
    current = random_unit_vector(k, rng);
    current_lp = log_density(current);
    if (std::isfinite(current_lp)) break;
  }
  if (!std::isfinite(current_lp))
    throw std::runtime_error("no prior-admissible initial weights after " +
                             std::to_string(cfg.max_init_retries) + " draws");
  chain.push(current, current_lp);

  std::vector<double> candidate(static_cast<std::size_t>(k));
  for (int step = 0; step < cfg.n_steps; ++step) {
    propose_into(current, cfg.step_sigma, rng, candidate);
    const double lp = log_density(candidate);
    const double u = uniform01(rng);
    ++chain.proposals;
    if (!std::isnan(lp) && u < std::exp(lp - current_lp)) {
      current.swap(candidate);
      current_lp = lp;
      ++chain.accept_count;
    }
    chain.push(current, current_lp);
  }

  const double rate = chain.acceptance_rate();
  if (cfg.n_steps > 0 && (rate < 0.05 || rate > 0.95))
    log_info("MCMC acceptance rate " + std::to_string(rate) + " outside [0.05, 0.95]");
  return chain;
}

PosteriorChain run_mcmc(const PreferenceDataset& data, const McmcConfig& cfg, Rng& rng) {
  if (data.prefs.empty()) throw std::invalid_argument("Bayesian REX needs at least one preference");
  const RankingModel model(data, cfg.beta);
  if (!model.has_prior()) log_info("no unique lowest-ranked trajectory; using a flat prior");
  return metropolis_hastings(
      model.dim(), [&model](std::span<const double> w) { return model.log_posterior(w); }, cfg, rng);
}

ChainMean chain_mean(const PosteriorChain& chain, int burn_in, int thin) {
  const PosteriorChain kept = chain.retained(burn_in, thin);
  if (kept.size() == 0) throw std::invalid_argument("no samples left after burn-in and thinning");
  ChainMean out;
  out.raw.assign(static_cast<std::size_t>(chain.k), 0.0);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto w = kept.sample(i);
    for (int j = 0; j < chain.k; ++j) out.raw[j] += w[j];
  }
  for (double& x : out.raw) x /= static_cast<double>(kept.size());
  out.weights = {out.raw, NormTag::L2};
  const double norm = l2_norm(out.raw);
  if (norm > 0.0)
    for (double& x : out.weights.w) x /= norm;
  else
    out.weights.norm = NormTag::Unconstrained;
  return out;
}

RewardWeights chain_map(const PosteriorChain& chain) {
  if (chain.size() == 0) throw std::invalid_argument("empty chain");
  const auto best = std::max_element(chain.log_post.begin(), chain.log_post.end()) - chain.log_post.begin();
  const auto w = chain.sample(static_cast<std::size_t>(best));
  return {std::vector<double>(w.begin(), w.end()), NormTag::L2};
}

}  // namespace brex
