#include "brex/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace brex {

namespace {

void check_weights(const GridWorld& mdp, std::span<const double> w) {
  if (static_cast<int>(w.size()) != mdp.num_features())
    throw std::invalid_argument("reward length " + std::to_string(w.size()) +
                                " does not match feature count " +
                                std::to_string(mdp.num_features()));
  for (double x : w)
    if (!std::isfinite(x)) throw std::invalid_argument("reward weights must be finite");
}

void check_policy_shape(const GridWorld& mdp, const StochasticPolicy& policy) {
  if (policy.num_states != mdp.num_states() || policy.num_actions != mdp.num_actions())
    throw std::invalid_argument("policy shape does not match the MDP");
}

// Stopping threshold on successive sup-norm differences. Tightened by (1 - gamma)
// so that the value error, not only the residual, is within tol.
double stop_threshold(double gamma, double tol) {
  if (gamma <= 0.0) return std::numeric_limits<double>::infinity();
  return tol * (1.0 - gamma) / gamma;
}

int sample_action(std::span<const double> probs, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  int last_positive = 0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    if (probs[a] <= 0.0) continue;
    last_positive = static_cast<int>(a);
    acc += probs[a];
    if (u < acc) return static_cast<int>(a);
  }
  return last_positive;
}

}  // namespace

FeatureTable::FeatureTable(int rows, int dim, std::vector<double> values)
    : rows_(rows), dim_(dim), values_(std::move(values)) {
  if (rows < 0 || dim < 0 ||
      values_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(dim))
    throw std::invalid_argument("feature table size mismatch");
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double l1_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += std::abs(x);
  return acc;
}

double l2_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double RewardWeights::dot(std::span<const double> phi) const { return brex::dot(w, phi); }

bool RewardWeights::satisfies_norm() const {
  switch (norm) {
    case NormTag::L1:
      return std::abs(l1_norm(w) - 1.0) <= 1e-9;
    case NormTag::L2:
      return std::abs(l2_norm(w) - 1.0) <= 1e-9;
    case NormTag::Unconstrained:
      return true;
  }
  return true;
}

GridWorld GridWorld::grid(int width, int height, FeatureTable features, double gamma) {
  if (width < 1 || height < 1) throw std::invalid_argument("grid dimensions must be positive");
  if (features.rows() != width * height)
    throw std::invalid_argument("feature rows must equal width * height");
  std::vector<int> next(static_cast<std::size_t>(width) * height * kNumMoves);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const int s = r * width + c;
      auto* row = &next[static_cast<std::size_t>(s) * kNumMoves];
      row[static_cast<int>(Move::Up)] = r > 0 ? s - width : s;
      row[static_cast<int>(Move::Down)] = r + 1 < height ? s + width : s;
      row[static_cast<int>(Move::Left)] = c > 0 ? s - 1 : s;
      row[static_cast<int>(Move::Right)] = c + 1 < width ? s + 1 : s;
    }
  }
  GridWorld world = custom(kNumMoves, std::move(next), std::move(features), gamma);
  world.is_grid_ = true;
  world.width_ = width;
  world.height_ = height;
  return world;
}

GridWorld GridWorld::custom(int num_actions, std::vector<int> transitions, FeatureTable features,
                            double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
  if (num_actions < 1) throw std::invalid_argument("need at least one action");
  const int n = features.rows();
  if (n < 1) throw std::invalid_argument("need at least one state");
  if (transitions.size() != static_cast<std::size_t>(n) * num_actions)
    throw std::invalid_argument("transition table must cover every state-action pair");
  for (int t : transitions)
    if (t < 0 || t >= n) throw std::invalid_argument("transition target out of range");
  for (double x : features.values())
    if (x != 0.0 && x != 1.0) throw std::invalid_argument("state features must be binary");

  GridWorld world;
  world.num_actions_ = num_actions;
  world.gamma_ = gamma;
  world.transitions_ = std::move(transitions);
  world.features_ = std::move(features);
  world.width_ = n;
  world.height_ = 1;
  return world;
}

std::vector<double> GridWorld::state_rewards(std::span<const double> w) const {
  check_weights(*this, w);
  std::vector<double> r(static_cast<std::size_t>(num_states()));
  for (int s = 0; s < num_states(); ++s) r[s] = dot(w, features(s));
  return r;
}

void GridWorld::check_state(int s) const {
  if (s < 0 || s >= num_states())
    throw std::invalid_argument("state " + std::to_string(s) + " out of range");
}

GridWorld random_grid_world(int width, int height, int num_features, double gamma, Rng& rng) {
  if (num_features < 1) throw std::invalid_argument("need at least one feature");
  const int n = width * height;
  std::vector<double> values(static_cast<std::size_t>(n) * num_features, 0.0);
  for (int s = 0; s < n; ++s)
    values[static_cast<std::size_t>(s) * num_features + uniform_int(rng, 0, num_features - 1)] =
        1.0;
  return GridWorld::grid(width, height, FeatureTable(n, num_features, std::move(values)), gamma);
}

StochasticPolicy StochasticPolicy::uniform(int num_states, int num_actions) {
  return {num_states, num_actions,
          std::vector<double>(static_cast<std::size_t>(num_states) * num_actions,
                              1.0 / num_actions)};
}

StochasticPolicy StochasticPolicy::deterministic(int num_actions, std::span<const int> actions) {
  StochasticPolicy p{static_cast<int>(actions.size()), num_actions,
                     std::vector<double>(actions.size() * num_actions, 0.0)};
  for (std::size_t s = 0; s < actions.size(); ++s) {
    if (actions[s] < 0 || actions[s] >= num_actions)
      throw std::invalid_argument("action index out of range");
    p.probs[s * num_actions + actions[s]] = 1.0;
  }
  return p;
}

void StochasticPolicy::validate() const {
  if (probs.size() != static_cast<std::size_t>(num_states) * num_actions)
    throw std::invalid_argument("policy table size mismatch");
  for (int s = 0; s < num_states; ++s) {
    double total = 0.0;
    for (double p : row(s)) {
      if (!(p >= 0.0)) throw std::invalid_argument("policy probabilities must be nonnegative");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw std::invalid_argument("policy row " + std::to_string(s) + " does not sum to 1");
  }
}

QTable value_iteration(const GridWorld& mdp, std::span<const double> w, double tol,
                       const QTable* warm_start) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const std::vector<double> reward = mdp.state_rewards(w);
  const int n = mdp.num_states();
  const int na = mdp.num_actions();
  const double gamma = mdp.gamma();
  const double threshold = stop_threshold(gamma, tol);

  QTable out;
  out.num_states = n;
  out.num_actions = na;
  out.q.assign(static_cast<std::size_t>(n) * na, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n), 0.0);
  if (warm_start != nullptr && warm_start->num_states == n &&
      static_cast<int>(warm_start->v.size()) == n)
    v = warm_start->v;
  std::vector<double> v_next(v.size());

  for (int it = 1;; ++it) {
    double delta = 0.0;
    for (int s = 0; s < n; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < na; ++a) {
        const double q = reward[s] + gamma * v[mdp.next_state(s, a)];
        out.q[static_cast<std::size_t>(s) * na + a] = q;
        best = std::max(best, q);
      }
      v_next[s] = best;
      delta = std::max(delta, std::abs(best - v[s]));
    }
    v.swap(v_next);
    if (!std::isfinite(delta)) throw std::runtime_error("value iteration diverged");
    if (delta <= threshold || it >= 100000) {
      out.iterations = it;
      break;
    }
  }
  out.v = std::move(v);
  return out;
}

double bellman_residual(const GridWorld& mdp, std::span<const double> w, const QTable& q) {
  const std::vector<double> reward = mdp.state_rewards(w);
  double worst = 0.0;
  for (int s = 0; s < mdp.num_states(); ++s) {
    for (int a = 0; a < mdp.num_actions(); ++a) {
      const auto next = q.row(mdp.next_state(s, a));
      const double target = reward[s] + mdp.gamma() * *std::max_element(next.begin(), next.end());
      worst = std::max(worst, std::abs(target - q.at(s, a)));
    }
  }
  return worst;
}

StochasticPolicy boltzmann_policy(const QTable& q, double beta) {
  if (!std::isfinite(beta)) throw std::invalid_argument("beta must be finite");
  if (beta < 0.0) throw std::invalid_argument("beta must be nonnegative");
  StochasticPolicy p{q.num_states, q.num_actions, std::vector<double>(q.q.size())};
  for (int s = 0; s < q.num_states; ++s) {
    const auto row = q.row(s);
    const double top = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (int a = 0; a < q.num_actions; ++a) {
      const double e = std::exp(beta * (row[a] - top));
      p.probs[static_cast<std::size_t>(s) * q.num_actions + a] = e;
      total += e;
    }
    for (int a = 0; a < q.num_actions; ++a)
      p.probs[static_cast<std::size_t>(s) * q.num_actions + a] /= total;
  }
  return p;
}

StochasticPolicy greedy_policy(const QTable& q) {
  std::vector<int> actions(static_cast<std::size_t>(q.num_states));
  for (int s = 0; s < q.num_states; ++s) {
    const auto row = q.row(s);
    actions[s] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return StochasticPolicy::deterministic(q.num_actions, actions);
}

std::vector<double> evaluate_policy_exact(const GridWorld& mdp, const StochasticPolicy& policy,
                                          std::span<const double> w, double tol) {
  check_policy_shape(mdp, policy);
  const std::vector<double> reward = mdp.state_rewards(w);
  const int n = mdp.num_states();
  const double gamma = mdp.gamma();
  const double threshold = stop_threshold(gamma, tol);
  std::vector<double> v(static_cast<std::size_t>(n), 0.0), v_next(v.size());
  for (int it = 0; it < 1000000; ++it) {
    double delta = 0.0;
    for (int s = 0; s < n; ++s) {
      double expect = 0.0;
      for (int a = 0; a < mdp.num_actions(); ++a) {
        const double p = policy.at(s, a);
        if (p != 0.0) expect += p * v[mdp.next_state(s, a)];
      }
      v_next[s] = reward[s] + gamma * expect;
      delta = std::max(delta, std::abs(v_next[s] - v[s]));
    }
    v.swap(v_next);
    if (delta <= threshold) break;
  }
  return v;
}

Trajectory rollout(const GridWorld& mdp, const StochasticPolicy& policy, int start, int length,
                   Rng& rng) {
  mdp.check_state(start);
  check_policy_shape(mdp, policy);
  if (length < 1) throw std::invalid_argument("rollout length must be at least 1");
  Trajectory traj;
  traj.states.reserve(static_cast<std::size_t>(length));
  traj.actions.reserve(static_cast<std::size_t>(length));
  int s = start;
  for (int t = 0; t < length; ++t) {
    const int a = sample_action(policy.row(s), rng);
    traj.states.push_back(s);
    traj.actions.push_back(a);
    s = mdp.next_state(s, a);
  }
  return traj;
}

std::vector<double> trajectory_feature_sum(const FeatureTable& table, const Trajectory& traj) {
  std::vector<double> sum(static_cast<std::size_t>(table.dim()), 0.0);
  for (int s : traj.states) {
    if (s < 0 || s >= table.rows()) throw std::invalid_argument("trajectory state out of range");
    const auto phi = table.row(s);
    for (int i = 0; i < table.dim(); ++i) sum[i] += phi[i];
  }
  return sum;
}

std::vector<double> feature_expectations_mc(const GridWorld& mdp, const StochasticPolicy& policy,
                                            int length, int rollouts, Rng& rng,
                                            std::optional<int> start) {
  if (rollouts < 1) throw std::invalid_argument("need at least one rollout");
  std::vector<double> total(static_cast<std::size_t>(mdp.num_features()), 0.0);
  for (int c = 0; c < rollouts; ++c) {
    const int s0 = start ? *start : uniform_int(rng, 0, mdp.num_states() - 1);
    const Trajectory traj = rollout(mdp, policy, s0, length, rng);
    const auto sum = trajectory_feature_sum(mdp.feature_table(), traj);
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += sum[i];
  }
  for (double& x : total) x /= rollouts;
  return total;
}

std::vector<double> feature_expectations_exact(const GridWorld& mdp,
                                               const StochasticPolicy& policy, double tol) {
  check_policy_shape(mdp, policy);
  const int n = mdp.num_states();
  const int k = mdp.num_features();
  const double gamma = mdp.gamma();
  const double threshold = stop_threshold(gamma, tol);
  const auto& phi = mdp.feature_table().values();
  std::vector<double> mu(phi.size(), 0.0), mu_next(phi.size());
  for (int it = 0; it < 1000000; ++it) {
    double delta = 0.0;
    for (int s = 0; s < n; ++s) {
      for (int i = 0; i < k; ++i) {
        double expect = 0.0;
        for (int a = 0; a < mdp.num_actions(); ++a) {
          const double p = policy.at(s, a);
          if (p != 0.0) expect += p * mu[static_cast<std::size_t>(mdp.next_state(s, a)) * k + i];
        }
        const std::size_t idx = static_cast<std::size_t>(s) * k + i;
        mu_next[idx] = phi[idx] + gamma * expect;
        delta = std::max(delta, std::abs(mu_next[idx] - mu[idx]));
      }
    }
    mu.swap(mu_next);
    if (delta <= threshold) break;
  }
  std::vector<double> out(static_cast<std::size_t>(k), 0.0);
  for (int s = 0; s < n; ++s)
    for (int i = 0; i < k; ++i) out[i] += mu[static_cast<std::size_t>(s) * k + i];
  for (double& x : out) x /= n;
  return out;
}

std::vector<double> feature_expectations_horizon(const GridWorld& mdp,
                                                 const StochasticPolicy& policy, int horizon,
                                                 std::optional<int> start) {
  check_policy_shape(mdp, policy);
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  const int n = mdp.num_states();
  const int k = mdp.num_features();
  std::vector<double> dist(static_cast<std::size_t>(n), start ? 0.0 : 1.0 / n);
  if (start) {
    mdp.check_state(*start);
    dist[*start] = 1.0;
  }
  std::vector<double> next(dist.size());
  std::vector<double> out(static_cast<std::size_t>(k), 0.0);
  for (int t = 0; t < horizon; ++t) {
    for (int s = 0; s < n; ++s) {
      if (dist[s] == 0.0) continue;
      const auto phi = mdp.features(s);
      for (int i = 0; i < k; ++i) out[i] += dist[s] * phi[i];
    }
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s < n; ++s)
      for (int a = 0; a < mdp.num_actions(); ++a)
        next[mdp.next_state(s, a)] += dist[s] * policy.at(s, a);
    dist.swap(next);
  }
  return out;
}

double policy_loss(const GridWorld& mdp, const StochasticPolicy& learned,
                   std::span<const double> true_w, double tol) {
  const QTable opt = value_iteration(mdp, true_w, tol);
  const std::vector<double> v = evaluate_policy_exact(mdp, learned, true_w, tol);
  double total = 0.0;
  for (int s = 0; s < mdp.num_states(); ++s) total += opt.v[s] - v[s];
  return total / mdp.num_states();
}

}  // namespace brex
