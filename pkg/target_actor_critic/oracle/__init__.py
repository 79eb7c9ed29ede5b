"""Exact closed-form oracles for every theory quantity at a fixed θ."""

from target_actor_critic.oracle.linalg import (
    ChainStructure,
    chain_structure,
    set_condition_warning,
    solve_dense,
    stationary_distribution,
)
from target_actor_critic.oracle.quantities import (
    CriticMatrices,
    FixedPoints,
    advantage,
    artificial_state_matrix,
    bellman_apply,
    bias,
    critic_matrices,
    d_norm,
    discounted_occupancy,
    exact_gradient,
    expected_return,
    fa_error,
    fixed_points,
    occupancy_from_stationary,
    occupancy_series,
    projection,
    q_hat,
    reward_vector,
    state_action_kernel,
    state_action_occupancy,
    steady_state_drift,
    transition_matrix,
    true_q,
    true_value,
)
from target_actor_critic.oracle.report import OracleCache, OracleReport, Tracking, oracle_report
from target_actor_critic.oracle.spectral import SpectralReport, spectral_report

__all__ = [
    "ChainStructure",
    "chain_structure",
    "set_condition_warning",
    "solve_dense",
    "stationary_distribution",
    "CriticMatrices",
    "FixedPoints",
    "advantage",
    "artificial_state_matrix",
    "bellman_apply",
    "bias",
    "critic_matrices",
    "d_norm",
    "discounted_occupancy",
    "exact_gradient",
    "expected_return",
    "fa_error",
    "fixed_points",
    "occupancy_from_stationary",
    "occupancy_series",
    "projection",
    "q_hat",
    "reward_vector",
    "state_action_kernel",
    "state_action_occupancy",
    "steady_state_drift",
    "transition_matrix",
    "true_q",
    "true_value",
    "OracleCache",
    "OracleReport",
    "oracle_report",
    "Tracking",
    "SpectralReport",
    "spectral_report",
]
