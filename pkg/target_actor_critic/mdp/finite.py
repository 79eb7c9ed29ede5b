"""Finite MDP container, validation, the artificial kernel and the MDP file format."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from target_actor_critic.errors import InvalidMdpError, InvalidConfigError
from target_actor_critic.storage import load_document

logger = logging.getLogger(__name__)

PROB_TOL = 1e-12
SCHEMA_VERSION = 1
MDP_KEYS = {
    "schema_version",
    "kind",
    "n_states",
    "n_actions",
    "discount",
    "init_dist",
    "kernel",
    "reward",
    "reward_noise_halfwidth",
    "reward_bound",
}


@dataclass(frozen=True)
class Violation:
    """One failed MDP invariant."""

    field: str
    index: Optional[tuple]
    message: str

    def __str__(self) -> str:
        where = f"[{', '.join(str(i) for i in self.index)}]" if self.index else ""
        return f"{self.field}{where}: {self.message}"


@dataclass(frozen=True, eq=False)
class FiniteMdp:
    """
    Finite MDP (S, A, p, R, γ, ρ) with bounded mean-zero uniform reward noise.

    Attributes:
        kernel: Array (n_states, n_actions, n_states), kernel[s, a, s'] = p(s'|s, a)
        reward: Array (n_states, n_actions), the mean reward R(s, a)
        discount: γ in (0, 1)
        init_dist: ρ, probability vector over states
        reward_noise_halfwidth: w >= 0, R_{t+1} = R(s, a) + Uniform[-w, w]
        reward_bound: declared U_R; defaults to max|R| + w
    """

    kernel: np.ndarray
    reward: np.ndarray
    discount: float
    init_dist: np.ndarray
    reward_noise_halfwidth: float = 0.0
    reward_bound: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kernel", np.asarray(self.kernel, dtype=float))
        object.__setattr__(self, "reward", np.asarray(self.reward, dtype=float))
        object.__setattr__(self, "init_dist", np.asarray(self.init_dist, dtype=float))
        object.__setattr__(self, "discount", float(self.discount))
        object.__setattr__(self, "reward_noise_halfwidth", float(self.reward_noise_halfwidth))
        if self.reward_bound is None and self.reward.size:
            bound = float(np.max(np.abs(self.reward))) + self.reward_noise_halfwidth
            object.__setattr__(self, "reward_bound", bound)

    @property
    def n_states(self) -> int:
        return int(self.kernel.shape[0])

    @property
    def n_actions(self) -> int:
        return int(self.kernel.shape[1])

    def to_document(self) -> Dict[str, Any]:
        """Serialise to the structured MDP document (dense row-major kernel)."""
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "mdp",
            "n_states": self.n_states,
            "n_actions": self.n_actions,
            "discount": self.discount,
            "init_dist": self.init_dist.tolist(),
            "kernel": self.kernel.reshape(self.n_states * self.n_actions, self.n_states).tolist(),
            "reward": self.reward.tolist(),
            "reward_noise_halfwidth": self.reward_noise_halfwidth,
            "reward_bound": self.reward_bound,
        }


def validate(mdp: FiniteMdp) -> List[Violation]:
    """
    Check every FiniteMdp invariant.

    Args:
        mdp: The MDP to check

    Returns:
        List of violations, empty iff the MDP is well formed
    """
    violations: List[Violation] = []
    kernel, reward, rho = mdp.kernel, mdp.reward, mdp.init_dist

    if kernel.ndim != 3 or kernel.shape[0] != kernel.shape[2] or kernel.shape[0] < 1:
        violations.append(Violation("kernel", None, f"shape {kernel.shape} is not (n, A, n)"))
        return violations
    n, n_actions = kernel.shape[0], kernel.shape[1]
    if n_actions < 1:
        violations.append(Violation("n_actions", None, "must be positive"))
        return violations

    for s in range(n):
        for a in range(n_actions):
            row = kernel[s, a]
            if not np.all(np.isfinite(row)):
                violations.append(Violation("kernel", (s, a), "non-finite entries"))
            elif np.any(row < 0):
                violations.append(Violation("kernel", (s, a), f"negative entry {row.min():.3g}"))
            elif abs(row.sum() - 1.0) > PROB_TOL:
                violations.append(Violation("kernel", (s, a), f"row sums to {row.sum():.15g}"))

    if reward.shape != (n, n_actions):
        violations.append(Violation("reward", None, f"shape {reward.shape} != {(n, n_actions)}"))
    elif not np.all(np.isfinite(reward)):
        violations.append(Violation("reward", None, "non-finite entries"))
    else:
        if mdp.reward_noise_halfwidth < 0:
            violations.append(Violation("reward_noise_halfwidth", None, "must be nonnegative"))
        bound = mdp.reward_bound
        for s, a in zip(*np.nonzero(np.abs(reward) + mdp.reward_noise_halfwidth > bound + PROB_TOL)):
            violations.append(
                Violation("reward", (int(s), int(a)), f"|R| + w exceeds U_R = {bound:.6g}")
            )

    if not 0.0 < mdp.discount < 1.0:
        violations.append(Violation("discount", None, f"{mdp.discount} not in (0, 1)"))

    if rho.shape != (n,):
        violations.append(Violation("init_dist", None, f"shape {rho.shape} != {(n,)}"))
    elif np.any(rho < 0) or not np.all(np.isfinite(rho)):
        violations.append(Violation("init_dist", None, "negative or non-finite entries"))
    elif abs(rho.sum() - 1.0) > PROB_TOL:
        violations.append(Violation("init_dist", None, f"sums to {rho.sum():.15g}"))

    return violations


def artificial_kernel(mdp: FiniteMdp) -> np.ndarray:
    """
    The reset-mixture kernel p̃(s'|s, a) = γ p(s'|s, a) + (1 − γ) ρ(s').

    Its state chain under π_θ has the discounted occupancy d_ρ,θ as stationary law.

    Returns:
        Array (n_states, n_actions, n_states)
    """
    gamma = mdp.discount
    return gamma * mdp.kernel + (1.0 - gamma) * mdp.init_dist[None, None, :]


def mdp_from_document(document: Dict[str, Any], source: Optional[str] = None) -> FiniteMdp:
    """
    Build and validate an MDP from its structured document.

    Raises:
        InvalidConfigError: Unknown or missing keys, wrong schema version
        InvalidMdpError: The MDP fails validate()
    """
    unknown = sorted(set(document) - MDP_KEYS)
    if unknown:
        raise InvalidConfigError(f"Unknown MDP keys: {', '.join(unknown)}", unknown)
    missing = sorted({"n_states", "n_actions", "discount", "init_dist", "kernel", "reward"} - set(document))
    if missing:
        raise InvalidConfigError(f"Missing MDP keys: {', '.join(missing)}", missing)
    version = document.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise InvalidConfigError(f"Unsupported MDP schema_version {version}")

    n, n_actions = int(document["n_states"]), int(document["n_actions"])
    kernel = np.asarray(document["kernel"], dtype=float)
    if kernel.size != n * n_actions * n:
        raise InvalidMdpError(
            [Violation("kernel", None, f"{kernel.size} entries, expected {n * n_actions * n}")],
            source,
        )
    reward = np.asarray(document["reward"], dtype=float)
    if reward.size != n * n_actions:
        raise InvalidMdpError(
            [Violation("reward", None, f"{reward.size} entries, expected {n * n_actions}")],
            source,
        )
    mdp = FiniteMdp(
        kernel=kernel.reshape(n, n_actions, n),
        reward=reward.reshape(n, n_actions),
        discount=float(document["discount"]),
        init_dist=np.asarray(document["init_dist"], dtype=float),
        reward_noise_halfwidth=float(document.get("reward_noise_halfwidth", 0.0)),
        reward_bound=document.get("reward_bound"),
    )
    violations = validate(mdp)
    if violations:
        raise InvalidMdpError(violations, source)
    return mdp


def load_mdp(path: Union[str, Path]) -> FiniteMdp:
    """Load an MDP file, rejecting files that fail validate()."""
    mdp = mdp_from_document(load_document(path), source=str(path))
    logger.info(f"Loaded MDP {path}: {mdp.n_states} states, {mdp.n_actions} actions")
    return mdp
