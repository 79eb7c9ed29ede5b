"""Deterministic random streams and the reset-mixture environment step."""

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from target_actor_critic.mdp.finite import FiniteMdp


def make_rng(seed: int, replicate: int = 0) -> np.random.Generator:
    """
    Counter-based generator (Philox) for one Monte-Carlo replicate.

    Replicate r of a study seeded with s uses the stream of seed s + r.
    """
    return np.random.Generator(np.random.Philox(int(seed) + int(replicate)))


def sample_categorical(probs: np.ndarray, rng: np.random.Generator) -> int:
    """
    Inverse-CDF draw from a probability row.

    The cumulative sum runs left to right; the last bucket absorbs the rounding residue.
    """
    u = rng.random()
    cdf = np.cumsum(probs)
    index = int(np.searchsorted(cdf, u, side="right"))
    return min(index, len(probs) - 1)


def inverse_cdf(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    """
    Row-wise inverse-CDF index: count(cdf <= u), capped at K − 1.

    Same outcome as sample_categorical for the same uniform.

    Args:
        cdf: Array (R, K) of cumulative rows, or (K,) shared by every row
        u: Array (R,) of uniforms in [0, 1)

    Returns:
        Integer array (R,)
    """
    index = (cdf <= u[:, None]).sum(axis=-1)
    return np.minimum(index, cdf.shape[-1] - 1)


@dataclass(frozen=True, eq=False)
class ChainState:
    """
    The sampler's chain state S̃_t.

    The generator is owned by this chain; each chain must hold its own stream.
    """

    tilde_state: int
    rng: np.random.Generator
    step: int = 0


class EnvStep(NamedTuple):
    next_state: int
    reward: float
    next_tilde_state: int
    bernoulli: int
    chain: ChainState


def initial_chain(mdp: FiniteMdp, rng: np.random.Generator) -> ChainState:
    """S̃_0 drawn from ρ."""
    return ChainState(tilde_state=sample_categorical(mdp.init_dist, rng), rng=rng, step=0)


def sample_env_step(mdp: FiniteMdp, chain: ChainState, action: int) -> EnvStep:
    """
    Sample S_{t+1}, R_{t+1} and the next reset-mixture state S̃_{t+1}.

    Draw order on the stream: S_{t+1}, reward noise, B_{t+1}, S^ρ_{t+1}. All four
    draws happen on every call so the stream layout does not depend on the values.

    Args:
        mdp: The environment
        chain: Current chain state (S̃_t and its generator)
        action: Ã_t

    Returns:
        EnvStep with the next true state, reward, next chain state, B_{t+1} and the
        advanced chain

    Raises:
        IndexError: If the action index is out of range
    """
    if not 0 <= action < mdp.n_actions:
        raise IndexError(f"action {action} out of range for {mdp.n_actions} actions")
    rng = chain.rng
    s = chain.tilde_state

    next_state = sample_categorical(mdp.kernel[s, action], rng)
    w = mdp.reward_noise_halfwidth
    noise = rng.uniform(-1.0, 1.0) * w
    reward = float(mdp.reward[s, action]) + noise
    bernoulli = 1 if rng.random() < mdp.discount else 0
    reset_state = sample_categorical(mdp.init_dist, rng)
    next_tilde = next_state if bernoulli else reset_state

    return EnvStep(
        next_state=next_state,
        reward=reward,
        next_tilde_state=next_tilde,
        bernoulli=bernoulli,
        chain=replace(chain, tilde_state=next_tilde, step=chain.step + 1),
    )
