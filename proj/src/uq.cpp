#include "brex/uq.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace brex {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_trainable(const PreferenceDataset& data) {
  data.validate();
  if (data.prefs.empty()) throw std::invalid_argument("need at least one preference to train");
}

}  // namespace

std::vector<double> sample_dropout_mask(int k, double p, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("dropout probability must lie in [0, 1)");
  std::vector<double> mask(static_cast<std::size_t>(k), 1.0);
  for (double& m : mask)
    if (uniform01(rng) < p) m = 0.0;
  return mask;
}

LinearHead train_trex_head(const PreferenceDataset& data, std::span<const Preference> prefs,
                           const TrexTrainConfig& cfg, double dropout_p, Rng& rng) {
  check_trainable(data);
  const int k = data.feature_dim();
  LinearHead w(static_cast<std::size_t>(k));
  for (double& x : w) x = cfg.init_scale * standard_normal(rng);

  std::vector<std::size_t> order(prefs.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> mask(static_cast<std::size_t>(k), 1.0);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      const Preference& p = prefs[idx];
      if (dropout_p > 0.0) mask = sample_dropout_mask(k, dropout_p, rng);
      const auto& worse = data.feature_sums[p.worse];
      const auto& better = data.feature_sums[p.better];
      double margin = 0.0;  // R(worse) - R(better) under the masked head
      for (int c = 0; c < k; ++c) margin += mask[c] * w[c] * (worse[c] - better[c]);
      const double scale = cfg.beta * sigmoid(cfg.beta * margin);
      for (int c = 0; c < k; ++c) {
        if (mask[c] == 0.0) continue;
        const double grad = scale * (worse[c] - better[c]);
        w[c] -= cfg.learning_rate * (grad + cfg.weight_decay * w[c]);
      }
    }
    for (double x : w)
      if (!std::isfinite(x))
        throw std::runtime_error("ranking-loss training diverged at epoch " + std::to_string(epoch));
  }
  return w;
}

std::vector<LinearHead> train_ensemble(const PreferenceDataset& data, const EnsembleConfig& cfg,
                                       Rng& rng) {
  check_trainable(data);
  if (cfg.n_members < 1) throw std::invalid_argument("ensemble needs at least one member");
  if (!(cfg.subsample_fraction > 0.0 && cfg.subsample_fraction <= 1.0))
    throw std::invalid_argument("subsample fraction must lie in (0, 1]");
  const std::uint64_t base = rng();
  std::vector<LinearHead> heads;
  for (int member = 0; member < cfg.n_members; ++member) {
    Rng member_rng = derive_rng(base, {static_cast<std::uint64_t>(member)});
    std::vector<Preference> subset = data.prefs;
    if (cfg.subsample_fraction < 1.0) {
      std::shuffle(subset.begin(), subset.end(), member_rng);
      const auto keep = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(cfg.subsample_fraction * static_cast<double>(subset.size()))));
      subset.resize(keep);
    }
    try {
      heads.push_back(train_trex_head(data, subset, cfg.train, 0.0, member_rng));
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("ensemble member " + std::to_string(member) + " failed (" +
                               std::to_string(heads.size()) + " of " + std::to_string(cfg.n_members) +
                               " trained): " + e.what());
    }
  }
  return heads;
}

std::vector<double> ensemble_returns(const std::vector<LinearHead>& heads,
                                     std::span<const double> phi_eval,
                                     std::span<const double> baseline_phi) {
  std::vector<double> out;
  out.reserve(heads.size());
  for (const auto& w : heads) {
    if (w.size() != phi_eval.size() || w.size() != baseline_phi.size())
      throw std::invalid_argument("head and feature dimensions differ");
    out.push_back(dot(w, phi_eval) - dot(w, baseline_phi));
  }
  return out;
}

LinearHead train_dropout_head(const PreferenceDataset& data, double p, const TrexTrainConfig& cfg,
                              Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("dropout probability must lie in [0, 1)");
  return train_trex_head(data, data.prefs, cfg, p, rng);
}

std::vector<double> dropout_returns(const LinearHead& head, std::span<const double> phi_eval,
                                    int n_masks, double p, Rng& rng) {
  if (head.size() != phi_eval.size()) throw std::invalid_argument("head and feature dimensions differ");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max(n_masks, 0)));
  for (int i = 0; i < n_masks; ++i) {
    const auto mask = sample_dropout_mask(static_cast<int>(head.size()), p, rng);
    double r = 0.0;
    for (std::size_t c = 0; c < head.size(); ++c) r += mask[c] * head[c] * phi_eval[c];
    out.push_back(r);
  }
  return out;
}

PosteriorChain heads_as_chain(const std::vector<LinearHead>& heads) {
  PosteriorChain chain;
  if (heads.empty()) return chain;
  chain.k = static_cast<int>(heads.front().size());
  for (const auto& h : heads) chain.push(h, 0.0);
  return chain;
}

PosteriorChain dropout_chain(const LinearHead& head, int n_masks, double p, Rng& rng) {
  std::vector<LinearHead> rows;
  for (int i = 0; i < n_masks; ++i) {
    const auto mask = sample_dropout_mask(static_cast<int>(head.size()), p, rng);
    LinearHead row(head.size());
    for (std::size_t c = 0; c < head.size(); ++c) row[c] = mask[c] * head[c];
    rows.push_back(std::move(row));
  }
  return heads_as_chain(rows);
}

}  // namespace brex
