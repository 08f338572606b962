"""Bayesian reward extrapolation, Bayesian IRL and VaR policy evaluation."""

from ._brex import (
    GridWorld,
    InputError,
    McmcConfig,
    PosteriorChain,
    Preference,
    PreferenceDataset,
    evaluate_policies,
    optimal_values,
    policy_loss,
    posterior_returns,
    random_grid_world,
    ranked_random_demos,
    ranking_log_likelihood,
    run_birl,
    run_brex,
    run_experiment,
    sample_ground_truth_reward,
    var_bound,
)

__all__ = [
    "GridWorld",
    "InputError",
    "McmcConfig",
    "PosteriorChain",
    "Preference",
    "PreferenceDataset",
    "evaluate_policies",
    "optimal_values",
    "policy_loss",
    "posterior_returns",
    "random_grid_world",
    "ranked_random_demos",
    "ranking_log_likelihood",
    "run_birl",
    "run_brex",
    "run_experiment",
    "sample_ground_truth_reward",
    "var_bound",
]
