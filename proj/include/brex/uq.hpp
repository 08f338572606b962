#pragma once

#include <span>
#include <vector>

#include "brex/demos.hpp"
#include "brex/rex.hpp"
#include "brex/rng.hpp"

namespace brex {

/// Linear reward head on cached feature sums: R(tau) = w.Phi_tau.
using LinearHead = std::vector<double>;

struct TrexTrainConfig {
  int epochs = 200;
  double learning_rate = 0.01;
  double weight_decay = 0.001;
  double beta = 1.0;
  double init_scale = 0.1;
};

/// Per-pair SGD on -log P(worse < better). With dropout_p > 0 a keep-mask is
/// drawn per pair and shared by both trajectories; only kept coordinates move.
LinearHead train_trex_head(const PreferenceDataset& data, std::span<const Preference> prefs,
                           const TrexTrainConfig& cfg, double dropout_p, Rng& rng);

struct EnsembleConfig {
  int n_members = 5;
  double subsample_fraction = 0.8;  // of preference pairs, without replacement
  TrexTrainConfig train;
};

/// Member i trains on its own subsample with stream derive_rng(base, {i}),
/// base being one draw from `rng`.
std::vector<LinearHead> train_ensemble(const PreferenceDataset& data, const EnsembleConfig& cfg,
                                       Rng& rng);

/// Member prediction for phi_eval minus the same member's prediction for
/// baseline_phi.
std::vector<double> ensemble_returns(const std::vector<LinearHead>& heads,
                                     std::span<const double> phi_eval,
                                     std::span<const double> baseline_phi);

LinearHead train_dropout_head(const PreferenceDataset& data, double p, const TrexTrainConfig& cfg,
                              Rng& rng);

/// 0/1 keep-mask, each coordinate dropped with probability p.
std::vector<double> sample_dropout_mask(int k, double p, Rng& rng);

/// n_masks returns (mask . w).Phi, no inverted-dropout rescaling.
std::vector<double> dropout_returns(const LinearHead& head, std::span<const double> phi_eval,
                                    int n_masks, double p, Rng& rng);

/// Wraps sample rows as a chain (log posterior 0) so hcpe consumes them unchanged.
PosteriorChain heads_as_chain(const std::vector<LinearHead>& heads);

/// n_masks masked copies of `head` as chain rows.
PosteriorChain dropout_chain(const LinearHead& head, int n_masks, double p, Rng& rng);

}  // namespace brex
