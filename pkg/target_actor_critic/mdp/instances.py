"""Generated and hand-built MDP instances."""

import numpy as np

from target_actor_critic.mdp.finite import FiniteMdp


def garnet(
    n_states: int,
    n_actions: int,
    branching: int,
    discount: float,
    rng: np.random.Generator,
    reward_noise_halfwidth: float = 0.0,
) -> FiniteMdp:
    """
    Garnet random MDP.

    Each (s, a) gets `branching` distinct successors chosen uniformly, weighted by a
    Dirichlet(1, ..., 1) draw; mean rewards are uniform in [0, 1]; ρ is uniform.

    Args:
        n_states: Number of states
        n_actions: Number of actions
        branching: Successors per (s, a), 1 <= branching <= n_states
        discount: γ
        rng: Generator consumed in a fixed order (successors, weights, rewards)
        reward_noise_halfwidth: Half-width of the uniform reward noise

    Returns:
        FiniteMdp
    """
    if not 1 <= branching <= n_states:
        raise ValueError(f"branching {branching} must lie in [1, {n_states}]")
    kernel = np.zeros((n_states, n_actions, n_states))
    for s in range(n_states):
        for a in range(n_actions):
            successors = rng.choice(n_states, size=branching, replace=False)
            weights = rng.dirichlet(np.ones(branching))
            kernel[s, a, successors] = weights
    # renormalise away the Dirichlet rounding so rows sum to 1 at 1e-12
    kernel /= kernel.sum(axis=2, keepdims=True)
    reward = rng.uniform(0.0, 1.0, size=(n_states, n_actions))
    return FiniteMdp(
        kernel=kernel,
        reward=reward,
        discount=discount,
        init_dist=np.full(n_states, 1.0 / n_states),
        reward_noise_halfwidth=reward_noise_halfwidth,
        reward_bound=1.0 + reward_noise_halfwidth,
    )


def two_cycle(discount: float = 0.9, n_actions: int = 1) -> FiniteMdp:
    """Deterministic 0 -> 1 -> 0 chain, every action alike, ρ = δ_0."""
    kernel = np.zeros((2, n_actions, 2))
    kernel[0, :, 1] = 1.0
    kernel[1, :, 0] = 1.0
    reward = np.tile(np.array([[1.0], [0.0]]), (1, n_actions))
    return FiniteMdp(kernel=kernel, reward=reward, discount=discount, init_dist=np.array([1.0, 0.0]))


def two_state_example(discount: float = 0.5) -> FiniteMdp:
    """Small 2-state, 2-action MDP for hand-checked traces."""
    kernel = np.array(
        [
            [[0.8, 0.2], [0.1, 0.9]],
            [[0.5, 0.5], [0.3, 0.7]],
        ]
    )
    reward = np.array([[1.0, 0.0], [0.5, -0.5]])
    return FiniteMdp(
        kernel=kernel,
        reward=reward,
        discount=discount,
        init_dist=np.array([0.6, 0.4]),
    )
