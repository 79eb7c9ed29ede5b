"""
Closed-form quantities of the target-based actor-critic at a fixed θ.

State-action pairs are flattened s-major: index s·|A| + a.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from target_actor_critic.features import CriticFeatures
from target_actor_critic.mdp import FiniteMdp, artificial_kernel
from target_actor_critic.oracle.linalg import solve_dense, stationary_distribution
from target_actor_critic.policy import SoftmaxPolicy

logger = logging.getLogger(__name__)


def transition_matrix(mdp: FiniteMdp, policy: SoftmaxPolicy) -> np.ndarray:
    """P_θ(s'|s) = Σ_a p(s'|s, a) π_θ(a|s)."""
    return np.einsum("sa,sat->st", policy.all_probs(), mdp.kernel)


def reward_vector(mdp: FiniteMdp, policy: SoftmaxPolicy) -> np.ndarray:
    """R_θ(s) = Σ_a π_θ(a|s) R(s, a)."""
    return np.sum(policy.all_probs() * mdp.reward, axis=1)


def artificial_state_matrix(mdp: FiniteMdp, policy: SoftmaxPolicy) -> np.ndarray:
    """P̃_θ = γP_θ + (1 − γ)𝟙ρᵀ."""
    n = mdp.n_states
    gamma = mdp.discount
    return gamma * transition_matrix(mdp, policy) + (1.0 - gamma) * np.outer(np.ones(n), mdp.init_dist)


def discounted_occupancy(
    mdp: FiniteMdp, policy: SoftmaxPolicy, notes: Optional[List[str]] = None
) -> np.ndarray:
    """d_ρ,θᵀ = (1 − γ) ρᵀ(I − γP_θ)⁻¹, by one transposed linear solve."""
    gamma = mdp.discount
    system = np.eye(mdp.n_states) - gamma * transition_matrix(mdp, policy)
    return (1.0 - gamma) * solve_dense(system.T, mdp.init_dist, "occupancy (I - γP)ᵀ", notes)


def occupancy_series(mdp: FiniteMdp, policy: SoftmaxPolicy, tail: float = 1e-10) -> np.ndarray:
    """(1 − γ) Σ_{t ≤ T'} γᵗ ρᵀP_θᵗ with T' = ⌈ln(tail)/ln γ⌉."""
    gamma = mdp.discount
    horizon = int(np.ceil(np.log(tail) / np.log(gamma)))
    P = transition_matrix(mdp, policy)
    row = mdp.init_dist.copy()
    total = np.zeros_like(row)
    weight = 1.0
    for _ in range(horizon + 1):
        total += weight * row
        row = row @ P
        weight *= gamma
    return (1.0 - gamma) * total


def occupancy_from_stationary(mdp: FiniteMdp, policy: SoftmaxPolicy) -> np.ndarray:
    """d_ρ,θ as the stationary law of P̃_θ (cross-validation path)."""
    return stationary_distribution(artificial_state_matrix(mdp, policy))


def state_action_occupancy(
    mdp: FiniteMdp, policy: SoftmaxPolicy, d: Optional[np.ndarray] = None
) -> np.ndarray:
    """μ_ρ,θ(s, a) = d_ρ,θ(s) π_θ(a|s), flattened s-major."""
    if d is None:
        d = discounted_occupancy(mdp, policy)
    return (d[:, None] * policy.all_probs()).reshape(-1)


def state_action_kernel(mdp: FiniteMdp, policy: SoftmaxPolicy, artificial: bool = True) -> np.ndarray:
    """
    K(s', a'|s, a) = q(s'|s, a) π_θ(a'|s') over flattened pairs.

    Args:
        artificial: q = p̃ (K̃_θ) when True, q = p (true-kernel chain) otherwise
    """
    q = artificial_kernel(mdp) if artificial else mdp.kernel
    n, n_actions = mdp.n_states, mdp.n_actions
    K = np.einsum("sat,tb->satb", q, policy.all_probs())
    return K.reshape(n * n_actions, n * n_actions)


def bellman_apply(mdp: FiniteMdp, policy: SoftmaxPolicy, V: np.ndarray) -> np.ndarray:
    """T_θV = R_θ + γP_θV."""
    return reward_vector(mdp, policy) + mdp.discount * transition_matrix(mdp, policy) @ V


def true_value(mdp: FiniteMdp, policy: SoftmaxPolicy, notes: Optional[List[str]] = None) -> np.ndarray:
    """V_π = (I − γP_θ)⁻¹R_θ."""
    system = np.eye(mdp.n_states) - mdp.discount * transition_matrix(mdp, policy)
    return solve_dense(system, reward_vector(mdp, policy), "value (I - γP)", notes)


def true_q(mdp: FiniteMdp, policy: SoftmaxPolicy, V: Optional[np.ndarray] = None) -> np.ndarray:
    """Q_π(s, a) = R(s, a) + γ Σ_{s'} p(s'|s, a) V_π(s'), as an (n_states, n_actions) array."""
    if V is None:
        V = true_value(mdp, policy)
    return mdp.reward + mdp.discount * mdp.kernel @ V


def advantage(mdp: FiniteMdp, policy: SoftmaxPolicy) -> np.ndarray:
    """Δ_π = Q_π − V_π, shape (n_states, n_actions)."""
    V = true_value(mdp, policy)
    return true_q(mdp, policy, V) - V[:, None]


def expected_return(mdp: FiniteMdp, policy: SoftmaxPolicy) -> float:
    """J(θ) = Σ_s ρ(s) V_π(s)."""
    return float(mdp.init_dist @ true_value(mdp, policy))


@dataclass(frozen=True, eq=False)
class CriticMatrices:
    """G(θ), Ḡ(θ), h(θ) plus what h̄(θ, ω̄) needs."""

    G: np.ndarray
    G_bar: np.ndarray
    h: np.ndarray
    d: np.ndarray
    P: np.ndarray
    R: np.ndarray
    Phi: np.ndarray
    discount: float

    def h_bar(self, omega_bar: np.ndarray) -> np.ndarray:
        """h̄(θ, ω̄) = ΦᵀD(R_θ + γP_θΦω̄)."""
        target = self.R + self.discount * self.P @ (self.Phi @ omega_bar)
        return self.Phi.T @ (self.d * target)


def critic_matrices(
    mdp: FiniteMdp,
    policy: SoftmaxPolicy,
    features: CriticFeatures,
    notes: Optional[List[str]] = None,
) -> CriticMatrices:
    """
    G = ΦᵀD(I − γP_θ)Φ, Ḡ = ΦᵀDΦ, h = ΦᵀDR_θ with D = diag(d_ρ,θ).
    """
    P = transition_matrix(mdp, policy)
    R = reward_vector(mdp, policy)
    d = discounted_occupancy(mdp, policy, notes)
    Phi = features.matrix
    DPhi = d[:, None] * Phi
    G_bar = Phi.T @ DPhi
    G = DPhi.T @ (Phi - mdp.discount * P @ Phi)
    h = Phi.T @ (d * R)
    return CriticMatrices(G=G, G_bar=G_bar, h=h, d=d, P=P, R=R, Phi=Phi, discount=mdp.discount)


@dataclass(frozen=True, eq=False)
class FixedPoints:
    """Critic fixed points: ω*(θ, ·) as a solver and ω̄*(θ)."""

    omega_star: Callable[[np.ndarray], np.ndarray]
    bar_omega_star: np.ndarray


def fixed_points(
    mdp: FiniteMdp,
    policy: SoftmaxPolicy,
    features: CriticFeatures,
    notes: Optional[List[str]] = None,
    matrices: Optional[CriticMatrices] = None,
) -> FixedPoints:
    """
    ω*(θ, ω̄) = Ḡ⁻¹h̄(θ, ω̄) and ω̄*(θ) = G⁻¹h.

    Raises:
        NumericalFault: If G or Ḡ is singular
    """
    cm = matrices if matrices is not None else critic_matrices(mdp, policy, features, notes)
    bar_star = solve_dense(cm.G, cm.h, "target fixed point G", notes)

    def omega_star(omega_bar: np.ndarray) -> np.ndarray:
        return solve_dense(cm.G_bar, cm.h_bar(np.asarray(omega_bar, dtype=float)), "critic fixed point Ḡ", notes)

    return FixedPoints(omega_star=omega_star, bar_omega_star=bar_star)


def projection(
    mdp: FiniteMdp,
    policy: SoftmaxPolicy,
    features: CriticFeatures,
    notes: Optional[List[str]] = None,
    matrices: Optional[CriticMatrices] = None,
) -> np.ndarray:
    """Π_θ = Φ(ΦᵀDΦ)⁻¹ΦᵀD, the D-orthogonal projection on span(Φ)."""
    cm = matrices if matrices is not None else critic_matrices(mdp, policy, features, notes)
    Phi = cm.Phi
    return Phi @ solve_dense(cm.G_bar, Phi.T * cm.d[None, :], "projection Ḡ", notes)


def exact_gradient(mdp: FiniteMdp, policy: SoftmaxPolicy, use_q: bool = False) -> np.ndarray:
    """
    ∇J(θ) = (1/(1 − γ)) Σ_{s,a} μ_ρ,θ(s, a) Δ_π(s, a) ψ_θ(s, a).

    Args:
        use_q: Weight by Q_π instead of Δ_π (equal, since Σ_a π ψ = 0 at each s)
    """
    V = true_value(mdp, policy)
    Q = true_q(mdp, policy, V)
    weight = Q if use_q else Q - V[:, None]
    mu = state_action_occupancy(mdp, policy).reshape(mdp.n_states, mdp.n_actions)
    return np.einsum("sa,sa,sad->d", mu, weight, policy.score_matrix()) / (1.0 - mdp.discount)


def q_hat(mdp: FiniteMdp, features: CriticFeatures, bar_omega_star: np.ndarray) -> np.ndarray:
    """Q̂_θ(s, a) = R(s, a) + γ Σ_{s'} p(s'|s, a) φ(s')ᵀω̄*(θ)."""
    return mdp.reward + mdp.discount * mdp.kernel @ (features.matrix @ bar_omega_star)


def bias(
    mdp: FiniteMdp,
    policy: SoftmaxPolicy,
    features: CriticFeatures,
    notes: Optional[List[str]] = None,
) -> np.ndarray:
    """
    b(θ) = (γ/(1 − γ)) Σ_{s,a} μ(s, a) ψ_θ(s, a) Σ_{s'} p(s'|s, a)(φ(s')ᵀω̄*(θ) − V_π(s')).
    """
    gamma = mdp.discount
    bar_star = fixed_points(mdp, policy, features, notes).bar_omega_star
    gap = features.matrix @ bar_star - true_value(mdp, policy, notes)
    mu = state_action_occupancy(mdp, policy).reshape(mdp.n_states, mdp.n_actions)
    return (gamma / (1.0 - gamma)) * np.einsum(
        "sa,sad,sa->d", mu, policy.score_matrix(), mdp.kernel @ gap
    )


def steady_state_drift(
    mdp: FiniteMdp,
    policy: SoftmaxPolicy,
    features: CriticFeatures,
    notes: Optional[List[str]] = None,
) -> np.ndarray:
    """
    f(θ) = (1/(1 − γ))(H̄(θ)ω̄*(θ) + u(θ)), the mean actor increment at stationarity.

    H̄(θ) = E_μ[ψ_θ(s, a)(γΣ_{s'}p(s'|s, a)φ(s') − φ(s))ᵀ], u(θ) = E_μ[R(s, a)ψ_θ(s, a)].
    """
    gamma = mdp.discount
    Phi = features.matrix
    mu = state_action_occupancy(mdp, policy).reshape(mdp.n_states, mdp.n_actions)
    psi = policy.score_matrix()
    td_direction = gamma * (mdp.kernel @ Phi) - Phi[:, None, :]
    H_bar = np.einsum("sa,sad,sam->dm", mu, psi, td_direction)
    u = np.einsum("sa,sa,sad->d", mu, mdp.reward, psi)
    bar_star = fixed_points(mdp, policy, features, notes).bar_omega_star
    return (H_bar @ bar_star + u) / (1.0 - gamma)


def d_norm(vector: np.ndarray, weights: np.ndarray) -> float:
    """‖v‖_D = sqrt(Σ_s w(s) v(s)²)."""
    return float(np.sqrt(np.sum(weights * vector**2)))


def fa_error(
    mdp: FiniteMdp,
    policy: SoftmaxPolicy,
    features: CriticFeatures,
    notes: Optional[List[str]] = None,
) -> float:
    """‖V_π − Φω̄*(θ)‖_{D_ρ,θ}."""
    d = discounted_occupancy(mdp, policy, notes)
    bar_star = fixed_points(mdp, policy, features, notes).bar_omega_star
    return d_norm(true_value(mdp, policy, notes) - features.matrix @ bar_star, d)
