"""Critic feature matrix Φ, its rank certificate and the shipped feature sets."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
from scipy import linalg

from target_actor_critic.errors import InvalidConfigError
from target_actor_critic.storage import load_document

logger = logging.getLogger(__name__)

FEATURE_KEYS = {"schema_version", "kind", "n_states", "dim", "matrix", "norm_bound", "rank_tol"}

RANK_TOL = 1e-9


def set_rank_tol(tol: float) -> None:
    """Process-wide rank-certificate tolerance for features built without an explicit one."""
    global RANK_TOL
    if not 0 < tol < 1:
        raise ValueError(f"rank tolerance must lie in (0, 1), got {tol}")
    RANK_TOL = float(tol)


@dataclass(frozen=True)
class RankReport:
    """Outcome of the full-column-rank certificate."""

    rank: int
    ratio: float
    full_rank: bool
    singular_values: tuple


@dataclass(frozen=True, eq=False)
class CriticFeatures:
    """
    Φ of shape (n, m); row s is φ(s)ᵀ.

    Attributes:
        matrix: Array (n_states, m)
        rank_tol: Relative tolerance on σ_min/σ_max for the rank certificate; None takes
            the process-wide RANK_TOL at construction
        norm_bound: When set, every ‖φ(s)‖ must be at most 1
    """

    matrix: np.ndarray
    rank_tol: Optional[float] = None
    norm_bound: bool = False

    def __post_init__(self):
        if self.rank_tol is None:
            object.__setattr__(self, "rank_tol", RANK_TOL)
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.ndim != 2:
            raise ValueError(f"feature matrix must be 2-D, got shape {matrix.shape}")
        object.__setattr__(self, "matrix", matrix)

    @property
    def n_states(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def m(self) -> int:
        return int(self.matrix.shape[1])

    def phi(self, s: int) -> np.ndarray:
        return self.matrix[s]

    def value_of(self, omega: np.ndarray, s: int) -> float:
        """V_ω(s) = φ(s)ᵀω."""
        omega = np.asarray(omega, dtype=float)
        if omega.shape != (self.m,):
            raise ValueError(f"omega has shape {omega.shape}, expected ({self.m},)")
        return float(self.matrix[s] @ omega)

    def values(self, omega: np.ndarray) -> np.ndarray:
        return self.matrix @ omega

    def check_rank(self) -> RankReport:
        """
        Certify full column rank from the singular values.

        Returns:
            RankReport; full_rank holds iff σ_min > rank_tol·σ_max

        Raises:
            ValueError: If m > n
        """
        if self.m > self.n_states:
            raise ValueError(f"m = {self.m} exceeds n = {self.n_states}; Φ cannot have full column rank")
        sv = linalg.svdvals(self.matrix)
        largest = float(sv[0]) if sv.size else 0.0
        smallest = float(sv[-1]) if sv.size else 0.0
        ratio = smallest / largest if largest > 0 else 0.0
        rank = int(np.sum(sv > self.rank_tol * largest)) if largest > 0 else 0
        return RankReport(
            rank=rank,
            ratio=ratio,
            full_rank=ratio > self.rank_tol,
            singular_values=tuple(float(v) for v in sv),
        )

    def validate(self) -> List[str]:
        problems = []
        if not np.all(np.isfinite(self.matrix)):
            problems.append("feature matrix contains non-finite entries")
            return problems
        if self.m > self.n_states:
            problems.append(f"m = {self.m} exceeds n = {self.n_states}")
        elif not self.check_rank().full_rank:
            problems.append("feature matrix fails the full-column-rank certificate")
        if self.norm_bound:
            norms = np.linalg.norm(self.matrix, axis=1)
            for s in np.nonzero(norms > 1.0 + 1e-12)[0]:
                problems.append(f"‖φ({s})‖ = {norms[s]:.6g} exceeds 1")
        return problems

    def with_column(self, column: np.ndarray) -> "CriticFeatures":
        """Φ augmented by one extra column."""
        column = np.asarray(column, dtype=float).reshape(-1, 1)
        return CriticFeatures(np.hstack([self.matrix, column]), self.rank_tol, False)

    def to_document(self) -> Dict[str, Any]:
        return {
            "schema_version": 1,
            "kind": "critic_features",
            "n_states": self.n_states,
            "dim": self.m,
            "matrix": self.matrix.tolist(),
            "norm_bound": self.norm_bound,
            "rank_tol": self.rank_tol,
        }


def tabular_features(n_states: int) -> CriticFeatures:
    """Φ = I (m = n)."""
    return CriticFeatures(np.eye(n_states), norm_bound=True)


def random_orthonormal_features(n_states: int, m: int, rng: np.random.Generator) -> CriticFeatures:
    """Gaussian columns orthonormalised by QR; orthonormal columns keep every ‖φ(s)‖ <= 1."""
    q, _ = linalg.qr(rng.standard_normal((n_states, m)), mode="economic")
    return CriticFeatures(q, norm_bound=True)


def deficient_features(n_states: int, m: int = 2) -> CriticFeatures:
    """
    Deliberately small span: a constant column followed by polynomial ramps in the
    state index, orthonormalised. With m < n the true value function generally lies
    outside the span, so ε_FA > 0 and b(θ) ≠ 0.
    """
    if not 1 <= m < n_states:
        raise ValueError(f"deficient features need 1 <= m < n, got m = {m}, n = {n_states}")
    grid = np.linspace(-1.0, 1.0, n_states)
    raw = np.vander(grid, m, increasing=True)
    q, _ = linalg.qr(raw, mode="economic")
    return CriticFeatures(q, norm_bound=True)


def features_from_document(document: Dict[str, Any]) -> CriticFeatures:
    unknown = sorted(set(document) - FEATURE_KEYS)
    if unknown:
        raise InvalidConfigError(f"Unknown critic-feature keys: {', '.join(unknown)}", unknown)
    matrix = np.asarray(document["matrix"], dtype=float)
    if "n_states" in document and matrix.shape[0] != int(document["n_states"]):
        raise InvalidConfigError(
            f"feature matrix has {matrix.shape[0]} rows, document declares {document['n_states']}"
        )
    return CriticFeatures(
        matrix,
        rank_tol=float(document["rank_tol"]) if "rank_tol" in document else None,
        norm_bound=bool(document.get("norm_bound", False)),
    )


def load_features(path: Union[str, Path]) -> CriticFeatures:
    features = features_from_document(load_document(path))
    logger.info(f"Loaded critic features {path}: {features.n_states} x {features.m}")
    return features
