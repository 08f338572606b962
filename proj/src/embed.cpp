#include "brex/embed.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "brex/optim.hpp"

namespace brex {

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Dense append_dense(std::vector<double>& params, int in, int out, bool bias, Rng& rng) {
  Dense d{in, out, bias, params.size()};
  const double scale = std::sqrt(2.0 / std::max(in, 1));
  for (int i = 0; i < in * out; ++i) params.push_back(scale * standard_normal(rng));
  if (bias) params.insert(params.end(), static_cast<std::size_t>(out), 0.0);
  return d;
}

std::vector<double> apply(const Dense& d, std::span<const double> params, std::span<const double> x) {
  std::vector<double> y(static_cast<std::size_t>(d.out));
  dense_forward(d, params, x, y);
  return y;
}

std::vector<double> concat(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

void check_dim(std::span<const double> x, int expected, const char* what) {
  if (static_cast<int>(x.size()) != expected)
    throw std::invalid_argument(std::string(what) + " has length " + std::to_string(x.size()) +
                                ", expected " + std::to_string(expected));
}

}  // namespace

void dense_forward(const Dense& layer, std::span<const double> params, std::span<const double> x,
                   std::span<double> y) {
  const double* w = params.data() + layer.offset;
  const double* b = w + static_cast<std::size_t>(layer.in) * layer.out;
  for (int o = 0; o < layer.out; ++o) {
    double acc = layer.bias ? b[o] : 0.0;
    const double* row = w + static_cast<std::size_t>(o) * layer.in;
    for (int i = 0; i < layer.in; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
}

void dense_backward(const Dense& layer, std::span<const double> params, std::span<const double> x,
                    std::span<const double> dy, std::span<double> grad, std::span<double> dx) {
  const double* w = params.data() + layer.offset;
  double* gw = grad.data() + layer.offset;
  double* gb = gw + static_cast<std::size_t>(layer.in) * layer.out;
  if (!dx.empty()) std::fill(dx.begin(), dx.end(), 0.0);
  for (int o = 0; o < layer.out; ++o) {
    const double g = dy[o];
    if (g == 0.0) continue;
    const double* row = w + static_cast<std::size_t>(o) * layer.in;
    double* grow = gw + static_cast<std::size_t>(o) * layer.in;
    for (int i = 0; i < layer.in; ++i) {
      grow[i] += g * x[i];
      if (!dx.empty()) dx[i] += g * row[i];
    }
    if (layer.bias) gb[o] += g;
  }
}

Encoder Encoder::create(int input_dim, const std::vector<int>& widths, double slope, Rng& rng) {
  if (input_dim < 1 || widths.empty()) throw std::invalid_argument("encoder needs an input and a layer");
  Encoder enc;
  enc.input_dim = input_dim;
  enc.slope = slope;
  int in = input_dim;
  for (int w : widths) {
    if (w < 1) throw std::invalid_argument("layer widths must be positive");
    enc.layers.push_back(append_dense(enc.params, in, w, true, rng));
    in = w;
  }
  return enc;
}

EncoderTape encode_with_tape(const Encoder& enc, std::span<const double> state) {
  check_dim(state, enc.input_dim, "state vector");
  EncoderTape tape;
  std::vector<double> x(state.begin(), state.end());
  for (std::size_t l = 0; l < enc.layers.size(); ++l) {
    std::vector<double> pre = apply(enc.layers[l], enc.params, x);
    tape.inputs.push_back(std::move(x));
    x = pre;
    if (l + 1 < enc.layers.size())
      for (double& v : x)
        if (v < 0.0) v *= enc.slope;
    tape.pre.push_back(std::move(pre));
  }
  tape.output = std::move(x);
  return tape;
}

std::vector<double> Encoder::encode(std::span<const double> state) const {
  return encode_with_tape(*this, state).output;
}

std::vector<double> encoder_backward(const Encoder& enc, const EncoderTape& tape,
                                     std::span<const double> d_output, std::span<double> grad) {
  std::vector<double> d(d_output.begin(), d_output.end());
  for (std::size_t l = enc.layers.size(); l-- > 0;) {
    if (l + 1 < enc.layers.size())
      for (std::size_t i = 0; i < d.size(); ++i)
        if (tape.pre[l][i] < 0.0) d[i] *= enc.slope;
    std::vector<double> dx(static_cast<std::size_t>(enc.layers[l].in));
    dense_backward(enc.layers[l], enc.params, tape.inputs[l], d, grad, dx);
    d = std::move(dx);
  }
  return d;
}

LossHeads LossHeads::create(int latent_dim, int state_dim, int num_actions, Rng& rng) {
  LossHeads h;
  h.latent_dim = latent_dim;
  h.state_dim = state_dim;
  h.num_actions = num_actions;
  h.inverse = append_dense(h.params, 2 * latent_dim, num_actions, true, rng);
  h.forward = append_dense(h.params, latent_dim + num_actions, state_dim, true, rng);
  h.temporal = append_dense(h.params, 2 * latent_dim, 1, true, rng);
  h.logvar = append_dense(h.params, latent_dim, latent_dim, true, rng);
  h.decoder = append_dense(h.params, latent_dim, state_dim, true, rng);
  h.ranking = append_dense(h.params, latent_dim, 1, false, rng);
  return h;
}

Gradients Gradients::zeros_like(const Encoder& enc, const LossHeads& heads) {
  return {std::vector<double>(enc.params.size(), 0.0), std::vector<double>(heads.params.size(), 0.0)};
}

void Gradients::add_scaled(const Gradients& other, double scale) {
  for (std::size_t i = 0; i < encoder.size(); ++i) encoder[i] += scale * other.encoder[i];
  for (std::size_t i = 0; i < heads.size(); ++i) heads[i] += scale * other.heads[i];
}

double inverse_dynamics_loss(const Encoder& enc, const LossHeads& heads, std::span<const double> s_t,
                             std::span<const double> s_t1, int action, Gradients* grad) {
  if (action < 0 || action >= heads.num_actions) throw std::invalid_argument("action index out of range");
  const EncoderTape a = encode_with_tape(enc, s_t);
  const EncoderTape b = encode_with_tape(enc, s_t1);
  const std::vector<double> h = concat(a.output, b.output);
  const std::vector<double> logits = apply(heads.inverse, heads.params, h);
  const double top = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - top);
  const double loss = top + std::log(z) - logits[action];
  if (grad != nullptr) {
    std::vector<double> dlogits(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) dlogits[i] = std::exp(logits[i] - top) / z;
    dlogits[action] -= 1.0;
    std::vector<double> dh(h.size());
    dense_backward(heads.inverse, heads.params, h, dlogits, grad->heads, dh);
    const auto L = static_cast<std::size_t>(heads.latent_dim);
    encoder_backward(enc, a, std::span<const double>(dh).first(L), grad->encoder);
    encoder_backward(enc, b, std::span<const double>(dh).subspan(L), grad->encoder);
  }
  return loss;
}

double forward_dynamics_loss(const Encoder& enc, const LossHeads& heads,
                             std::span<const double> s_t, std::span<const int> actions,
                             const std::vector<std::vector<double>>& next_states, Gradients* grad) {
  const std::size_t repeats = actions.size();
  if (repeats == 0 || next_states.size() != repeats)
    throw std::invalid_argument("forward dynamics needs one next state per action");
  const auto L = static_cast<std::size_t>(heads.latent_dim);
  const double norm = 1.0 / (static_cast<double>(repeats) * heads.state_dim);

  std::vector<EncoderTape> tapes;
  std::vector<std::vector<double>> head_in;
  std::vector<std::vector<double>> preds;
  std::vector<double> x(s_t.begin(), s_t.end());
  double loss = 0.0;
  for (std::size_t j = 0; j < repeats; ++j) {
    const int a = actions[j];
    if (a < 0 || a >= heads.num_actions) throw std::invalid_argument("action index out of range");
    check_dim(next_states[j], heads.state_dim, "next state");
    tapes.push_back(encode_with_tape(enc, x));
    std::vector<double> in = tapes.back().output;
    in.resize(L + static_cast<std::size_t>(heads.num_actions), 0.0);
    in[L + static_cast<std::size_t>(a)] = 1.0;
    std::vector<double> pred = apply(heads.forward, heads.params, in);
    for (int d = 0; d < heads.state_dim; ++d) {
      const double e = pred[d] - next_states[j][d];
      loss += norm * e * e;
    }
    head_in.push_back(std::move(in));
    x = pred;
    preds.push_back(std::move(pred));
  }

  if (grad != nullptr) {
    std::vector<double> carry(static_cast<std::size_t>(heads.state_dim), 0.0);
    for (std::size_t j = repeats; j-- > 0;) {
      std::vector<double> dpred(carry);
      for (int d = 0; d < heads.state_dim; ++d)
        dpred[d] += 2.0 * norm * (preds[j][d] - next_states[j][d]);
      std::vector<double> din(head_in[j].size());
      dense_backward(heads.forward, heads.params, head_in[j], dpred, grad->heads, din);
      carry = encoder_backward(enc, tapes[j], std::span<const double>(din).first(L), grad->encoder);
    }
  }
  return loss;
}

double temporal_distance_loss(const Encoder& enc, const LossHeads& heads,
                              std::span<const double> s_t, std::span<const double> s_tx,
                              double target, Gradients* grad) {
  const EncoderTape a = encode_with_tape(enc, s_t);
  const EncoderTape b = encode_with_tape(enc, s_tx);
  const std::vector<double> h = concat(a.output, b.output);
  const double pred = apply(heads.temporal, heads.params, h)[0];
  const double err = pred - target;
  if (grad != nullptr) {
    const double dpred[1] = {2.0 * err};
    std::vector<double> dh(h.size());
    dense_backward(heads.temporal, heads.params, h, dpred, grad->heads, dh);
    const auto L = static_cast<std::size_t>(heads.latent_dim);
    encoder_backward(enc, a, std::span<const double>(dh).first(L), grad->encoder);
    encoder_backward(enc, b, std::span<const double>(dh).subspan(L), grad->encoder);
  }
  return err * err;
}

double gaussian_kl(std::span<const double> mu, std::span<const double> logvar) {
  double kl = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    kl += 0.5 * (mu[i] * mu[i] + std::exp(logvar[i]) - 1.0 - logvar[i]);
  return kl;
}

VaeTerms vae_loss(const Encoder& enc, const LossHeads& heads, std::span<const double> s_t,
                  std::span<const double> noise, Gradients* grad) {
  check_dim(noise, heads.latent_dim, "noise");
  check_dim(s_t, heads.state_dim, "state vector");
  const EncoderTape tape = encode_with_tape(enc, s_t);
  const std::vector<double>& mu = tape.output;
  const std::vector<double> lv = apply(heads.logvar, heads.params, mu);
  std::vector<double> z(mu.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = mu[i] + std::exp(0.5 * lv[i]) * noise[i];
  const std::vector<double> logits = apply(heads.decoder, heads.params, z);

  VaeTerms terms;
  for (std::size_t d = 0; d < logits.size(); ++d) terms.reconstruction += softplus(logits[d]) - s_t[d] * logits[d];
  terms.kl = gaussian_kl(mu, lv);

  if (grad != nullptr) {
    std::vector<double> dlogits(logits.size());
    for (std::size_t d = 0; d < logits.size(); ++d) dlogits[d] = sigmoid(logits[d]) - s_t[d];
    std::vector<double> dz(z.size());
    dense_backward(heads.decoder, heads.params, z, dlogits, grad->heads, dz);
    std::vector<double> dmu(mu.size()), dlv(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const double sd = std::exp(0.5 * lv[i]);
      dmu[i] = dz[i] + mu[i];
      dlv[i] = dz[i] * noise[i] * 0.5 * sd + 0.5 * (std::exp(lv[i]) - 1.0);
    }
    std::vector<double> dphi(mu.size());
    dense_backward(heads.logvar, heads.params, mu, dlv, grad->heads, dphi);
    for (std::size_t i = 0; i < mu.size(); ++i) dphi[i] += dmu[i];
    encoder_backward(enc, tape, dphi, grad->encoder);
  }
  return terms;
}

VaeTerms vae_loss(const Encoder& enc, const LossHeads& heads, std::span<const double> s_t, Rng& rng,
                  Gradients* grad) {
  std::vector<double> noise(static_cast<std::size_t>(heads.latent_dim));
  for (double& e : noise) e = standard_normal(rng);
  return vae_loss(enc, heads, s_t, noise, grad);
}

double ranking_loss(const Encoder& enc, const LossHeads& heads,
                    const std::vector<std::vector<double>>& worse_states,
                    const std::vector<std::vector<double>>& better_states, Gradients* grad) {
  std::vector<EncoderTape> worse_tapes, better_tapes;
  double r_worse = 0.0, r_better = 0.0;
  for (const auto& s : worse_states) {
    worse_tapes.push_back(encode_with_tape(enc, s));
    r_worse += apply(heads.ranking, heads.params, worse_tapes.back().output)[0];
  }
  for (const auto& s : better_states) {
    better_tapes.push_back(encode_with_tape(enc, s));
    r_better += apply(heads.ranking, heads.params, better_tapes.back().output)[0];
  }
  const double margin = r_worse - r_better;
  if (grad != nullptr) {
    const double p = sigmoid(margin);
    std::vector<double> dphi(static_cast<std::size_t>(heads.latent_dim));
    auto backprop = [&](const std::vector<EncoderTape>& tapes, double dr) {
      const double dy[1] = {dr};
      for (const auto& tape : tapes) {
        dense_backward(heads.ranking, heads.params, tape.output, dy, grad->heads, dphi);
        encoder_backward(enc, tape, dphi, grad->encoder);
      }
    };
    backprop(worse_tapes, p);
    backprop(better_tapes, -p);
  }
  return softplus(margin);
}

std::string PretrainResult::log_csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "step,inverse_dynamics,forward_dynamics,temporal_distance,vae,ranking,total\n";
  for (const auto& r : log)
    os << r.step << ',' << r.inverse << ',' << r.forward << ',' << r.temporal << ',' << r.vae << ','
       << r.ranking << ',' << r.total << '\n';
  return os.str();
}

FeatureTable state_vector_table(const GridWorld& mdp) {
  const int n = mdp.num_states();
  const int k = mdp.num_features();
  const int dim = n + k;
  std::vector<double> values(static_cast<std::size_t>(n) * dim, 0.0);
  for (int s = 0; s < n; ++s) {
    double* row = values.data() + static_cast<std::size_t>(s) * dim;
    row[s] = 1.0;
    const auto phi = mdp.features(s);
    std::copy(phi.begin(), phi.end(), row + n);
  }
  return FeatureTable(n, dim, std::move(values));
}

FeatureTable latent_feature_table(const Encoder& enc, const FeatureTable& state_vectors) {
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(state_vectors.rows()) * enc.latent_dim());
  for (int s = 0; s < state_vectors.rows(); ++s) {
    const auto z = enc.encode(state_vectors.row(s));
    values.insert(values.end(), z.begin(), z.end());
  }
  return FeatureTable(state_vectors.rows(), enc.latent_dim(), std::move(values));
}

PretrainResult pretrain(const PreferenceDataset& data, const FeatureTable& state_vectors,
                        int num_actions, const PretrainConfig& cfg, Rng& rng) {
  data.validate();
  if (data.size() == 0) throw std::invalid_argument("pretraining needs demonstrations");
  if (cfg.forward_repeats < 1) throw std::invalid_argument("forward_repeats must be at least 1");
  const int state_dim = state_vectors.dim();
  auto vec = [&](int s) {
    const auto r = state_vectors.row(s);
    return std::vector<double>(r.begin(), r.end());
  };

  PretrainResult result;
  result.encoder = Encoder::create(state_dim, {cfg.hidden_dim, cfg.latent_dim}, cfg.slope, rng);
  result.heads = LossHeads::create(cfg.latent_dim, state_dim, num_actions, rng);
  Encoder& enc = result.encoder;
  LossHeads& heads = result.heads;

  AdamConfig adam_cfg;
  adam_cfg.learning_rate = cfg.learning_rate;
  adam_cfg.weight_decay = cfg.weight_decay;
  AdamW enc_opt(enc.params.size(), adam_cfg);
  AdamW head_opt(heads.params.size(), adam_cfg);

  const LossWeights& w = cfg.weights;
  const int m = data.size();
  for (int step = 0; step < cfg.steps; ++step) {
    Gradients total = Gradients::zeros_like(enc, heads);
    TrainLogRow row;
    row.step = step;

    const Trajectory& traj = data.trajectories[uniform_int(rng, 0, m - 1)];
    const int len = traj.length();
    if (len >= 2) {
      Gradients g = Gradients::zeros_like(enc, heads);
      const int t = uniform_int(rng, 0, len - 2);
      row.inverse = inverse_dynamics_loss(enc, heads, state_vectors.row(traj.states[t]),
                                          state_vectors.row(traj.states[t + 1]), traj.actions[t], &g);
      total.add_scaled(g, w.inverse);

      g = Gradients::zeros_like(enc, heads);
      const int t1 = uniform_int(rng, 0, len - 2);
      const int t2 = uniform_int(rng, t1 + 1, len - 1);
      const double target = static_cast<double>(t2 - t1) / len;
      row.temporal = temporal_distance_loss(enc, heads, state_vectors.row(traj.states[t1]),
                                            state_vectors.row(traj.states[t2]), target, &g);
      total.add_scaled(g, w.temporal);
    } else {
      ++result.skipped_temporal;
    }

    if (len > cfg.forward_repeats) {
      Gradients g = Gradients::zeros_like(enc, heads);
      const int t = uniform_int(rng, 0, len - 1 - cfg.forward_repeats);
      std::vector<int> actions(traj.actions.begin() + t, traj.actions.begin() + t + cfg.forward_repeats);
      std::vector<std::vector<double>> next;
      for (int j = 1; j <= cfg.forward_repeats; ++j) next.push_back(vec(traj.states[t + j]));
      row.forward = forward_dynamics_loss(enc, heads, state_vectors.row(traj.states[t]), actions, next, &g);
      total.add_scaled(g, w.forward);
    } else {
      ++result.skipped_forward;
    }

    {
      Gradients g = Gradients::zeros_like(enc, heads);
      const int s = traj.states[uniform_int(rng, 0, len - 1)];
      row.vae = vae_loss(enc, heads, state_vectors.row(s), rng, &g).total();
      total.add_scaled(g, w.vae);
    }

    if (!data.prefs.empty()) {
      Gradients g = Gradients::zeros_like(enc, heads);
      const Preference& p = data.prefs[uniform_int(rng, 0, static_cast<int>(data.prefs.size()) - 1)];
      std::vector<std::vector<double>> worse, better;
      for (int s : data.trajectories[p.worse].states) worse.push_back(vec(s));
      for (int s : data.trajectories[p.better].states) better.push_back(vec(s));
      row.ranking = ranking_loss(enc, heads, worse, better, &g);
      total.add_scaled(g, w.ranking);
    }

    row.total = w.inverse * row.inverse + w.forward * row.forward + w.temporal * row.temporal +
                w.vae * row.vae + w.ranking * row.ranking;
    if (!std::isfinite(row.total)) {
      std::ostringstream os;
      os << "pretraining diverged at step " << step << " (inverse=" << row.inverse
         << " forward=" << row.forward << " temporal=" << row.temporal << " vae=" << row.vae
         << " ranking=" << row.ranking << ")";
      throw std::runtime_error(os.str());
    }
    enc_opt.step(enc.params, total.encoder);
    head_opt.step(heads.params, total.heads);
    result.log.push_back(row);
  }
  return result;
}

}  // namespace brex
