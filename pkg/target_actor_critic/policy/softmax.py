"""Softmax (Gibbs) policy over linear policy features."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
from scipy.special import logsumexp, softmax

from target_actor_critic.errors import InvalidConfigError
from target_actor_critic.mdp.sampling import sample_categorical
from target_actor_critic.storage import load_document

logger = logging.getLogger(__name__)

MIN_PROB = 1e-300
POLICY_KEYS = {"schema_version", "kind", "n_states", "n_actions", "dim", "features"}


@dataclass(frozen=True, eq=False)
class SoftmaxPolicy:
    """
    π_θ(a|s) ∝ exp(θᵀx(s, a)).

    Attributes:
        features: Array (n_states, n_actions, d) of policy features x(s, a)
        theta: Array (d,)
    """

    features: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "features", np.asarray(self.features, dtype=float))
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float).reshape(-1))
        if self.features.ndim != 3:
            raise ValueError(f"policy features must be (n_states, n_actions, d), got {self.features.shape}")
        if self.features.shape[2] != self.theta.shape[0]:
            raise ValueError(
                f"theta has dimension {self.theta.shape[0]}, features have d = {self.features.shape[2]}"
            )

    @property
    def n_states(self) -> int:
        return int(self.features.shape[0])

    @property
    def n_actions(self) -> int:
        return int(self.features.shape[1])

    @property
    def dim(self) -> int:
        return int(self.features.shape[2])

    def with_theta(self, theta: np.ndarray) -> "SoftmaxPolicy":
        return SoftmaxPolicy(self.features, theta)

    def logits(self, s: int) -> np.ndarray:
        return self.features[s] @ self.theta

    def action_probs(self, s: int) -> np.ndarray:
        """Probability vector over actions at state s (max-shifted softmax)."""
        return softmax(self.logits(s))

    def all_probs(self) -> np.ndarray:
        """Array (n_states, n_actions) of π_θ(a|s)."""
        return softmax(self.features @ self.theta, axis=1)

    def log_prob(self, s: int, a: int) -> float:
        logits = self.logits(s)
        return float(logits[a] - logsumexp(logits))

    def score(self, s: int, a: int) -> np.ndarray:
        """ψ_θ(s, a) = x(s, a) − Σ_b π_θ(b|s) x(s, b)."""
        x = self.features[s]
        return x[a] - self.action_probs(s) @ x

    def score_matrix(self) -> np.ndarray:
        """Array (n_states, n_actions, d) of ψ_θ(s, a)."""
        probs = self.all_probs()
        mean = np.einsum("sa,sad->sd", probs, self.features)
        return self.features - mean[:, None, :]

    def sample_action(self, s: int, rng: np.random.Generator) -> int:
        """Ã ~ π_θ(·|s) by inverse CDF."""
        return sample_categorical(self.action_probs(s), rng)

    def validate(self) -> List[str]:
        """Problems with the policy (non-finite features, d < 1, vanishing probabilities)."""
        problems = []
        if self.dim < 1:
            problems.append("feature dimension d must be at least 1")
        if not np.all(np.isfinite(self.features)):
            problems.append("policy features contain non-finite entries")
        if not np.all(np.isfinite(self.theta)):
            problems.append("theta contains non-finite entries")
        elif not problems:
            low = float(self.all_probs().min())
            if not low > MIN_PROB:
                problems.append(f"smallest action probability {low:.3e} is not > {MIN_PROB}")
        return problems

    def score_bound(self) -> float:
        """2·max_{s,b}‖x(s, b)‖, the bound every ‖ψ_θ(s, a)‖ respects."""
        return 2.0 * float(np.max(np.linalg.norm(self.features, axis=2)))


def tabular_policy_features(n_states: int, n_actions: int) -> np.ndarray:
    """One-hot features, d = n_states·n_actions, x(s, a) = e_{s·|A| + a}."""
    return np.eye(n_states * n_actions).reshape(n_states, n_actions, n_states * n_actions)


def policy_features_from_document(document: Dict[str, Any]) -> np.ndarray:
    """Policy-feature document: dense matrix with one row per (s, a) pair, s-major."""
    unknown = sorted(set(document) - POLICY_KEYS)
    if unknown:
        raise InvalidConfigError(f"Unknown policy-feature keys: {', '.join(unknown)}", unknown)
    n, n_actions = int(document["n_states"]), int(document["n_actions"])
    matrix = np.asarray(document["features"], dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != n * n_actions:
        raise InvalidConfigError(
            f"policy features must have {n * n_actions} rows, got shape {matrix.shape}"
        )
    return matrix.reshape(n, n_actions, matrix.shape[1])


def policy_features_to_document(features: np.ndarray) -> Dict[str, Any]:
    n, n_actions, d = features.shape
    return {
        "schema_version": 1,
        "kind": "policy_features",
        "n_states": n,
        "n_actions": n_actions,
        "dim": d,
        "features": features.reshape(n * n_actions, d).tolist(),
    }


def load_policy_features(path: Union[str, Path]) -> np.ndarray:
    features = policy_features_from_document(load_document(path))
    logger.info(f"Loaded policy features {path}: shape {features.shape}")
    return features
