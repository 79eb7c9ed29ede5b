"""Spectral certificates for the critic matrices."""

from dataclasses import asdict, dataclass
from typing import Dict, List, Optional

import numpy as np
from scipy import linalg

from target_actor_critic.features import CriticFeatures
from target_actor_critic.mdp import FiniteMdp, make_rng
from target_actor_critic.oracle.linalg import solve_dense
from target_actor_critic.oracle.quantities import CriticMatrices, critic_matrices
from target_actor_critic.policy import SoftmaxPolicy

CHAIN_SLACK = 1e-10
POSDEF2_SLACK = 1e-12


def sym(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)


@dataclass(frozen=True)
class SpectralReport:
    """
    Eigenvalue constants at one θ and the checks they feed.

    Attributes:
        eps_min: λ_min(Ḡ)
        kappa_min: λ_min(sym G)
        zeta_min: λ_min(sym(Ḡ⁻¹G))
        hurwitz_margin: max Re λ(−Ḡ⁻¹G), negative when −Ḡ⁻¹G is Hurwitz
        kappa_chain_margin: κ − (1 − √γ)ε, nonnegative up to 1e-10
        posdef2_margin: smallest slack of ‖P_θV‖²_D <= (1/γ)‖V‖²_D − ((1−γ)/γ)‖V‖²_ρ
        posdef2_samples: number of random V tried
    """

    eps_min: float
    kappa_min: float
    zeta_min: float
    hurwitz_margin: float
    kappa_chain_margin: float
    posdef2_margin: float
    posdef2_samples: int

    @property
    def G_bar_posdef(self) -> bool:
        return self.eps_min > 0.0

    @property
    def kappa_chain_holds(self) -> bool:
        return self.kappa_chain_margin >= -CHAIN_SLACK

    @property
    def hurwitz(self) -> bool:
        return self.hurwitz_margin < 0.0

    @property
    def zeta_positive(self) -> bool:
        return self.zeta_min > 0.0

    @property
    def posdef2_holds(self) -> bool:
        return self.posdef2_margin >= -POSDEF2_SLACK

    def checks(self) -> Dict[str, bool]:
        """Bound checks; ζ > 0 is an input hypothesis and is left out."""
        return {
            "G_bar_positive_definite": self.G_bar_posdef,
            "G_posdef_chain": self.kappa_chain_holds,
            "hurwitz_critic": self.hurwitz,
            "G_posdef2_inequality": self.posdef2_holds,
        }

    def to_dict(self) -> Dict[str, float]:
        out = asdict(self)
        out.update(self.checks())
        out["zeta_positive"] = self.zeta_positive
        return out


def posdef2_margins(
    P: np.ndarray, d: np.ndarray, rho: np.ndarray, gamma: float, samples: np.ndarray
) -> np.ndarray:
    """
    Slack (1/γ)‖V‖²_D − ((1−γ)/γ)‖V‖²_ρ − ‖PV‖²_D for each row V of `samples`.
    """
    PV = samples @ P.T
    lhs = (PV**2) @ d
    rhs = (samples**2) @ d / gamma - (1.0 - gamma) / gamma * (samples**2) @ rho
    return rhs - lhs


def spectral_report(
    mdp: FiniteMdp,
    policy: SoftmaxPolicy,
    features: CriticFeatures,
    n_random_v: int = 100,
    seed: int = 0,
    notes: Optional[List[str]] = None,
    matrices: Optional[CriticMatrices] = None,
) -> SpectralReport:
    """
    Eigenvalues of Ḡ, sym(G), sym(Ḡ⁻¹G), the spectrum of −Ḡ⁻¹G and a randomised check
    of the D-norm contraction inequality for P_θ.

    Args:
        n_random_v: Number of Gaussian test vectors V (at least 100 recommended)
        seed: Seed of the test-vector stream
    """
    cm = matrices if matrices is not None else critic_matrices(mdp, policy, features, notes)
    gamma = mdp.discount

    eps_min = float(linalg.eigvalsh(sym(cm.G_bar))[0])
    kappa_min = float(linalg.eigvalsh(sym(cm.G))[0])
    A = solve_dense(cm.G_bar, cm.G, "Ḡ⁻¹G", notes)
    zeta_min = float(linalg.eigvalsh(sym(A))[0])
    hurwitz_margin = float(np.max(np.real(linalg.eigvals(-A))))

    rng = make_rng(seed)
    samples = rng.standard_normal((n_random_v, mdp.n_states))
    margins = posdef2_margins(cm.P, cm.d, mdp.init_dist, gamma, samples)

    return SpectralReport(
        eps_min=eps_min,
        kappa_min=kappa_min,
        zeta_min=zeta_min,
        hurwitz_margin=hurwitz_margin,
        kappa_chain_margin=kappa_min - (1.0 - np.sqrt(gamma)) * eps_min,
        posdef2_margin=float(np.min(margins)),
        posdef2_samples=int(n_random_v),
    )
