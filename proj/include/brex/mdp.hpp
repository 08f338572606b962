#pragma once

#include <optional>
#include <span>
#include <vector>

#include "brex/rng.hpp"

namespace brex {

inline constexpr double kDefaultSolverTol = 1e-8;

/// Cardinal moves of a grid world, in action-index order.
enum class Move : int { Up = 0, Down = 1, Left = 2, Right = 3 };
inline constexpr int kNumMoves = 4;

/// Row-major (rows x dim) real matrix; one row per state.
class FeatureTable {
 public:
  FeatureTable() = default;
  FeatureTable(int rows, int dim, std::vector<double> values);

  int rows() const { return rows_; }
  int dim() const { return dim_; }
  std::span<const double> row(int r) const {
    return {values_.data() + static_cast<std::size_t>(r) * dim_, static_cast<std::size_t>(dim_)};
  }
  const std::vector<double>& values() const { return values_; }

 private:
  int rows_ = 0;
  int dim_ = 0;
  std::vector<double> values_;
};

enum class NormTag { Unconstrained, L1, L2 };

struct RewardWeights {
  std::vector<double> w;
  NormTag norm = NormTag::Unconstrained;

  int dim() const { return static_cast<int>(w.size()); }
  double dot(std::span<const double> phi) const;

  /// Checks the norm invariant implied by `norm` (tolerance 1e-9).
  bool satisfies_norm() const;
};

double l1_norm(std::span<const double> v);
double l2_norm(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);

/// Finite deterministic MDP with state-based linear rewards R(s) = w.phi(s).
///
/// Grid worlds index states row-major (s = row * width + col); moving off the
/// grid leaves the agent in place. Custom worlds carry an explicit transition
/// table and exist mainly for hand-checkable test problems.
class GridWorld {
 public:
  static GridWorld grid(int width, int height, FeatureTable features, double gamma);
  static GridWorld custom(int num_actions, std::vector<int> transitions, FeatureTable features,
                          double gamma);

  bool is_grid() const { return is_grid_; }
  int width() const { return width_; }
  int height() const { return height_; }
  int num_states() const { return features_.rows(); }
  int num_actions() const { return num_actions_; }
  int num_features() const { return features_.dim(); }
  double gamma() const { return gamma_; }

  int next_state(int s, int a) const {
    return transitions_[static_cast<std::size_t>(s) * num_actions_ + a];
  }
  const std::vector<int>& transitions() const { return transitions_; }
  std::span<const double> features(int s) const { return features_.row(s); }
  const FeatureTable& feature_table() const { return features_; }

  std::vector<double> state_rewards(std::span<const double> w) const;
  void check_state(int s) const;

 private:
  GridWorld() = default;

  bool is_grid_ = false;
  int width_ = 0;
  int height_ = 0;
  int num_actions_ = 0;
  double gamma_ = 0.0;
  std::vector<int> transitions_;
  FeatureTable features_;
};

/// Random grid where each cell carries exactly one of `num_features` binary
/// features, chosen uniformly.
GridWorld random_grid_world(int width, int height, int num_features, double gamma, Rng& rng);

struct QTable {
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> q;  // row-major (state, action)
  std::vector<double> v;
  int iterations = 0;

  double at(int s, int a) const { return q[static_cast<std::size_t>(s) * num_actions + a]; }
  std::span<const double> row(int s) const {
    return {q.data() + static_cast<std::size_t>(s) * num_actions,
            static_cast<std::size_t>(num_actions)};
  }
};

struct StochasticPolicy {
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> probs;  // row-major (state, action)

  double at(int s, int a) const { return probs[static_cast<std::size_t>(s) * num_actions + a]; }
  std::span<const double> row(int s) const {
    return {probs.data() + static_cast<std::size_t>(s) * num_actions,
            static_cast<std::size_t>(num_actions)};
  }

  static StochasticPolicy uniform(int num_states, int num_actions);
  /// Deterministic policy choosing `actions[s]` in state s.
  static StochasticPolicy deterministic(int num_actions, std::span<const int> actions);
  void validate() const;
};

struct Trajectory {
  std::vector<int> states;
  std::vector<int> actions;

  int length() const { return static_cast<int>(states.size()); }
};

QTable value_iteration(const GridWorld& mdp, std::span<const double> w,
                       double tol = kDefaultSolverTol, const QTable* warm_start = nullptr);

/// sup_s,a |R(s) + gamma V(s') - Q(s,a)| with V(s') = max_b Q(s',b).
double bellman_residual(const GridWorld& mdp, std::span<const double> w, const QTable& q);

StochasticPolicy boltzmann_policy(const QTable& q, double beta);
/// Puts all mass on the first maximising action.
StochasticPolicy greedy_policy(const QTable& q);

std::vector<double> evaluate_policy_exact(const GridWorld& mdp, const StochasticPolicy& policy,
                                          std::span<const double> w,
                                          double tol = kDefaultSolverTol);

Trajectory rollout(const GridWorld& mdp, const StochasticPolicy& policy, int start, int length,
                   Rng& rng);

/// Undiscounted finite-horizon Monte Carlo estimate (1/C) sum_i sum_{s in tau_i} phi(s).
/// Without `start`, each rollout begins in a uniformly drawn state.
std::vector<double> feature_expectations_mc(const GridWorld& mdp, const StochasticPolicy& policy,
                                            int length, int rollouts, Rng& rng,
                                            std::optional<int> start = std::nullopt);

/// Discounted expected feature counts averaged over a uniform start state, so
/// that w.Phi equals the mean of evaluate_policy_exact for every w.
std::vector<double> feature_expectations_exact(const GridWorld& mdp,
                                               const StochasticPolicy& policy,
                                               double tol = 1e-12);

/// Exact undiscounted expected feature sum over `horizon` visited states, via
/// forward propagation of the state distribution.
std::vector<double> feature_expectations_horizon(const GridWorld& mdp,
                                                 const StochasticPolicy& policy, int horizon,
                                                 std::optional<int> start = std::nullopt);

/// Mean over states of V*_{R*}(s) - V^learned_{R*}(s).
double policy_loss(const GridWorld& mdp, const StochasticPolicy& learned,
                   std::span<const double> true_w, double tol = kDefaultSolverTol);

std::vector<double> trajectory_feature_sum(const FeatureTable& table, const Trajectory& traj);

}  // namespace brex
