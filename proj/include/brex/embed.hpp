#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "brex/demos.hpp"
#include "brex/mdp.hpp"
#include "brex/rng.hpp"

namespace brex {

/// Affine map y = W x (+ b) stored at `offset` in a flat parameter vector.
/// W is row-major (out x in), followed by the bias when present.
struct Dense {
  int in = 0;
  int out = 0;
  bool bias = true;
  std::size_t offset = 0;

  std::size_t param_count() const {
    return static_cast<std::size_t>(in) * out + (bias ? static_cast<std::size_t>(out) : 0);
  }
};

void dense_forward(const Dense& layer, std::span<const double> params, std::span<const double> x,
                   std::span<double> y);
/// Adds dL/dW, dL/db into `grad`; overwrites `dx` with dL/dx unless it is empty.
void dense_backward(const Dense& layer, std::span<const double> params, std::span<const double> x,
                    std::span<const double> dy, std::span<double> grad, std::span<double> dx);

/// Dense state encoder phi(s). Leaky-rectified hidden layers, linear output.
struct Encoder {
  int input_dim = 0;
  double slope = 0.01;
  std::vector<Dense> layers;
  std::vector<double> params;

  /// widths = {hidden..., latent}.
  static Encoder create(int input_dim, const std::vector<int>& widths, double slope, Rng& rng);

  int latent_dim() const { return layers.empty() ? input_dim : layers.back().out; }
  std::vector<double> encode(std::span<const double> state) const;
};

struct EncoderTape {
  std::vector<std::vector<double>> inputs;  // input of each layer
  std::vector<std::vector<double>> pre;     // pre-activation of each layer
  std::vector<double> output;
};

EncoderTape encode_with_tape(const Encoder& enc, std::span<const double> state);
/// Accumulates parameter gradients for d_output; returns dL/d(state).
std::vector<double> encoder_backward(const Encoder& enc, const EncoderTape& tape,
                                     std::span<const double> d_output, std::span<double> grad);

/// Single affine maps atop the latent space, one per pretraining objective.
struct LossHeads {
  int latent_dim = 0;
  int state_dim = 0;
  int num_actions = 0;
  Dense inverse;   // [phi_t; phi_t1] -> action logits
  Dense forward;   // [phi_t; onehot(a_t)] -> next raw state
  Dense temporal;  // [phi_t; phi_tx] -> normalised distance
  Dense logvar;    // phi -> per-dimension log-variance (the mean is phi itself)
  Dense decoder;   // z -> raw-state logits
  Dense ranking;   // phi -> scalar reward, no bias
  std::vector<double> params;

  static LossHeads create(int latent_dim, int state_dim, int num_actions, Rng& rng);
};

struct Gradients {
  std::vector<double> encoder;
  std::vector<double> heads;

  static Gradients zeros_like(const Encoder& enc, const LossHeads& heads);
  void add_scaled(const Gradients& other, double scale);
};

/// Softmax cross-entropy of the action predicted from (phi(s_t), phi(s_t1)).
double inverse_dynamics_loss(const Encoder& enc, const LossHeads& heads, std::span<const double> s_t,
                             std::span<const double> s_t1, int action, Gradients* grad);

/// Chained one-step predictions: x_0 = s_t, x_{j+1} = f_FD(phi(x_j), a_{t+j}),
/// each compared to the true s_{t+j+1} by mean squared error; averaged over steps.
double forward_dynamics_loss(const Encoder& enc, const LossHeads& heads,
                             std::span<const double> s_t, std::span<const int> actions,
                             const std::vector<std::vector<double>>& next_states, Gradients* grad);

/// (f_TD(phi(s_t), phi(s_tx)) - target)^2, target the normalised step distance.
double temporal_distance_loss(const Encoder& enc, const LossHeads& heads,
                              std::span<const double> s_t, std::span<const double> s_tx,
                              double target, Gradients* grad);

/// sum_i 0.5 (mu_i^2 + exp(lv_i) - 1 - lv_i)
double gaussian_kl(std::span<const double> mu, std::span<const double> logvar);

struct VaeTerms {
  double reconstruction = 0.0;
  double kl = 0.0;
  double total() const { return reconstruction + kl; }
};

/// Bernoulli cross-entropy reconstruction of s_t from z = phi + exp(lv/2) eps,
/// plus KL(N(phi, exp(lv)) || N(0, I)). `noise` is eps.
VaeTerms vae_loss(const Encoder& enc, const LossHeads& heads, std::span<const double> s_t,
                  std::span<const double> noise, Gradients* grad);
VaeTerms vae_loss(const Encoder& enc, const LossHeads& heads, std::span<const double> s_t, Rng& rng,
                  Gradients* grad);

/// -log P(worse < better) with per-state reward r(s) = w.phi(s) summed over
/// each trajectory's states.
double ranking_loss(const Encoder& enc, const LossHeads& heads,
                    const std::vector<std::vector<double>>& worse_states,
                    const std::vector<std::vector<double>>& better_states, Gradients* grad);

struct LossWeights {
  double inverse = 1.0;
  double forward = 1.0;
  double temporal = 1.0;
  double vae = 1.0;
  double ranking = 1.0;
};

struct PretrainConfig {
  LossWeights weights;
  double learning_rate = 0.001;
  double weight_decay = 0.001;
  int steps = 2000;
  int forward_repeats = 5;
  int hidden_dim = 64;
  int latent_dim = 16;
  double slope = 0.01;
  std::uint64_t seed = 0;
};

struct TrainLogRow {
  int step = 0;
  double inverse = 0.0;
  double forward = 0.0;
  double temporal = 0.0;
  double vae = 0.0;
  double ranking = 0.0;
  double total = 0.0;
};

struct PretrainResult {
  Encoder encoder;
  LossHeads heads;
  std::vector<TrainLogRow> log;
  int skipped_forward = 0;
  int skipped_temporal = 0;

  std::string log_csv() const;
};

/// One-hot grid position concatenated with the cell's features, per state.
FeatureTable state_vector_table(const GridWorld& mdp);

/// Trains encoder and heads on the weighted loss sum, one sample per
/// objective per step, with AdamW. Throws std::runtime_error on a
/// non-finite loss.
PretrainResult pretrain(const PreferenceDataset& data, const FeatureTable& state_vectors,
                        int num_actions, const PretrainConfig& cfg, Rng& rng);

/// Encodes every row of `state_vectors`.
FeatureTable latent_feature_table(const Encoder& enc, const FeatureTable& state_vectors);

}  // namespace brex
