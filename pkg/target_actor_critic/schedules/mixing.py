"""Geometric-mixing diagnostic of the reset-mixture chain and the mixing time τ_T."""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from target_actor_critic.mdp import FiniteMdp
from target_actor_critic.oracle import artificial_state_matrix, state_action_kernel, stationary_distribution
from target_actor_critic.policy import SoftmaxPolicy
from target_actor_critic.schedules.power import PowerSchedule

logger = logging.getLogger(__name__)

TV_FLOOR = 1e-13
SIGMA_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class MixingFit:
    """
    Constants (c, σ) with sup_s d_TV(P(S̃_t ∈ ·|S̃_0 = s), d_ρ,θ) <= cσᵗ for t <= max_t.

    Attributes:
        sigma: Second-largest eigenvalue modulus of K̃_θ
        c: Smallest constant making the bound hold on the measured decay
        tv: Exact worst-case TV distance for t = 0..max_t
    """

    sigma: float
    c: float
    tv: np.ndarray

    @property
    def max_t(self) -> int:
        return len(self.tv) - 1

    def bound(self) -> np.ndarray:
        return self.c * self.sigma ** np.arange(len(self.tv))

    @property
    def holds(self) -> bool:
        return bool(np.all(self.tv <= self.bound() + TV_FLOOR))


def second_eigenvalue_modulus(K: np.ndarray) -> float:
    moduli = np.sort(np.abs(linalg.eigvals(K)))[::-1]
    return float(moduli[1]) if len(moduli) > 1 else 0.0


def tv_decay(P: np.ndarray, target: np.ndarray, max_t: int) -> np.ndarray:
    """max_s ½‖Pᵗ(s, ·) − target‖₁ for t = 0..max_t by repeated multiplication."""
    power = np.eye(P.shape[0])
    out = np.empty(max_t + 1)
    for t in range(max_t + 1):
        out[t] = 0.5 * np.max(np.sum(np.abs(power - target[None, :]), axis=1))
        power = power @ P
    return out


def estimate_mixing_constants(mdp: FiniteMdp, policy: SoftmaxPolicy, max_t: int = 200) -> MixingFit:
    """
    Fit (c, σ) from the exact matrix powers of P̃_θ.

    σ is the second-largest eigenvalue modulus of K̃_θ. The nonunit spectrum of K̃_θ and
    of P̃_θ coincide, so the state-level decay is measured on the smaller matrix.
    """
    sigma = max(second_eigenvalue_modulus(state_action_kernel(mdp, policy, artificial=True)), SIGMA_FLOOR)
    P = artificial_state_matrix(mdp, policy)
    d = stationary_distribution(P)
    tv = tv_decay(P, d, max_t)

    t = np.arange(max_t + 1)
    informative = tv > TV_FLOOR
    with np.errstate(over="ignore", divide="ignore"):
        ratios = tv[informative] / sigma ** t[informative]
    c = float(np.max(ratios)) if ratios.size else float(tv[0])
    fit = MixingFit(sigma=float(sigma), c=max(c, float(tv[0])), tv=tv)
    logger.debug(f"Mixing fit: σ = {fit.sigma:.6g}, c = {fit.c:.6g} over t <= {max_t}")
    return fit


def mixing_time(
    schedule: PowerSchedule,
    horizon: int,
    c: Optional[float] = None,
    sigma: Optional[float] = None,
    mdp: Optional[FiniteMdp] = None,
    policy: Optional[SoftmaxPolicy] = None,
) -> int:
    """
    τ_T = min{t >= 1 : cσ^{t−1} <= min(α_T, ξ_T, β_T)}.

    Closed form through logarithms, then corrected by direct evaluation. With α ≡ 0 the
    minimum runs over the positive rates only.

    Args:
        schedule: Step sizes
        horizon: T
        c, sigma: Mixing constants; estimated from (mdp, policy) when either is missing

    Returns:
        τ_T

    Raises:
        ValueError: If the constants are out of range or cannot be estimated
    """
    if c is None or sigma is None:
        if mdp is None or policy is None:
            raise ValueError("mixing_time needs (c, sigma) or an (mdp, policy) pair to estimate them")
        fit = estimate_mixing_constants(mdp, policy)
        c = fit.c if c is None else c
        sigma = fit.sigma if sigma is None else sigma
    if not c > 0:
        raise ValueError(f"c must be positive, got {c}")
    if not 0.0 < sigma < 1.0:
        raise ValueError(f"sigma must lie in (0, 1), got {sigma}")

    rates = [r for r in schedule.rates_at(horizon) if r > 0]
    target = min(rates)
    if c <= target:
        return 1
    tau = 1 + math.ceil(math.log(target / c) / math.log(sigma))
    while c * sigma ** (tau - 1) > target:
        tau += 1
    while tau > 1 and c * sigma ** (tau - 2) <= target:
        tau -= 1
    return tau
