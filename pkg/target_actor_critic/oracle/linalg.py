"""Dense linear algebra helpers: conditioned solves, stationary laws, chain structure."""

import logging
import math
import warnings
from dataclasses import dataclass
from functools import reduce
from typing import List, Optional

import numpy as np
from scipy import linalg, sparse
from scipy.sparse.csgraph import connected_components

from target_actor_critic.errors import NonUniqueStationaryError, NumericalFault

logger = logging.getLogger(__name__)

CONDITION_WARNING = 1e12


def set_condition_warning(limit: float) -> None:
    """Process-wide condition-number threshold for solve_dense warnings."""
    global CONDITION_WARNING
    if not limit > 0:
        raise ValueError(f"condition warning threshold must be positive, got {limit}")
    CONDITION_WARNING = float(limit)


def condition_number(matrix: np.ndarray) -> float:
    return float(np.linalg.cond(matrix))


def solve_dense(
    matrix: np.ndarray,
    rhs: np.ndarray,
    label: str,
    notes: Optional[List[str]] = None,
    condition_limit: Optional[float] = None,
) -> np.ndarray:
    """
    Solve matrix @ x = rhs by LU with partial pivoting.

    Args:
        matrix: Square system matrix
        rhs: Right-hand side (vector or matrix)
        label: Name of the system, used in warnings and errors
        notes: Optional list collecting conditioning warnings
        condition_limit: Condition numbers above this trigger a warning (module default when None)

    Returns:
        Solution array

    Raises:
        NumericalFault: If the factorisation fails or the solution is not finite
    """
    if condition_limit is None:
        condition_limit = CONDITION_WARNING
    cond = condition_number(matrix)
    if not np.isfinite(cond) or cond > condition_limit:
        message = f"{label}: condition number {cond:.3e} exceeds {condition_limit:.0e}"
        logger.warning(message)
        if notes is not None:
            notes.append(message)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", linalg.LinAlgWarning)
            lu = linalg.lu_factor(matrix, check_finite=True)
            solution = linalg.lu_solve(lu, rhs)
    except (linalg.LinAlgError, ValueError) as e:
        raise NumericalFault(f"{label}: solve failed ({e})", cond) from e
    if not np.all(np.isfinite(solution)):
        raise NumericalFault(f"{label}: non-finite solution", cond)
    return solution


def stationary_distribution(K: np.ndarray, rank_tol: float = 1e-10) -> np.ndarray:
    """
    Unique μ with μᵀK = μᵀ and Σμ = 1, from the stacked system [Kᵀ − I; 𝟙ᵀ] μ = [0; 1].

    Args:
        K: Row-stochastic matrix
        rank_tol: Relative singular-value tolerance for the uniqueness certificate

    Returns:
        Probability vector μ

    Raises:
        NonUniqueStationaryError: If the stacked matrix is column-rank-deficient
    """
    n = K.shape[0]
    stacked = np.vstack([K.T - np.eye(n), np.ones((1, n))])
    sv = linalg.svdvals(stacked)
    if sv[-1] <= rank_tol * sv[0]:
        raise NonUniqueStationaryError(
            f"stationary system is rank-deficient (σ_min/σ_max = {sv[-1] / sv[0]:.3e}); "
            "the chain has more than one closed class",
            float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf"),
        )
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    mu, *_ = linalg.lstsq(stacked, rhs)
    return mu


@dataclass(frozen=True)
class ChainStructure:
    """Communicating-class structure of a finite Markov chain."""

    n_classes: int
    closed_classes: tuple
    periods: tuple

    @property
    def irreducible(self) -> bool:
        return self.n_classes == 1

    @property
    def unichain(self) -> bool:
        return len(self.closed_classes) == 1

    @property
    def period(self) -> int:
        """Period of the closed class when unichain, else 0."""
        return self.periods[0] if self.unichain else 0

    @property
    def ergodic(self) -> bool:
        """One closed class, aperiodic."""
        return self.unichain and self.period == 1


def _class_period(adjacency: np.ndarray, members: np.ndarray) -> int:
    """gcd of level[u] + 1 − level[v] over edges inside one class (BFS levels)."""
    inside = np.zeros(adjacency.shape[0], dtype=bool)
    inside[members] = True
    level = {int(members[0]): 0}
    frontier = [int(members[0])]
    while frontier:
        nxt = []
        for u in frontier:
            for v in np.nonzero(adjacency[u] & inside)[0]:
                v = int(v)
                if v not in level:
                    level[v] = level[u] + 1
                    nxt.append(v)
        frontier = nxt
    gaps = [
        abs(level[int(u)] + 1 - level[int(v)])
        for u in members
        for v in np.nonzero(adjacency[u] & inside)[0]
    ]
    return reduce(math.gcd, gaps, 0)


def chain_structure(K: np.ndarray, tol: float = 0.0) -> ChainStructure:
    """
    Strongly connected components, closed classes and their periods.

    Args:
        K: Row-stochastic matrix
        tol: Entries above tol count as edges
    """
    adjacency = K > tol
    n_classes, labels = connected_components(
        sparse.csr_matrix(adjacency), directed=True, connection="strong"
    )
    closed, periods = [], []
    for c in range(n_classes):
        members = np.nonzero(labels == c)[0]
        leaves = adjacency[members][:, labels != c].any()
        if not leaves:
            closed.append(tuple(int(i) for i in members))
            periods.append(_class_period(adjacency, members))
    return ChainStructure(n_classes=int(n_classes), closed_classes=tuple(closed), periods=tuple(periods))
