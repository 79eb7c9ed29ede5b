"""TD errors and the Γ scaling of the stabilised actor."""

from typing import Tuple

import numpy as np

from target_actor_critic.features import CriticFeatures


def td_error(
    features: CriticFeatures,
    omega: np.ndarray,
    s_tilde: int,
    s_next: int,
    reward: float,
    discount: float,
) -> float:
    """δ = r + γφ(s')ᵀω − φ(s̃)ᵀω."""
    return float(reward + discount * features.value_of(omega, s_next) - features.value_of(omega, s_tilde))


def target_td_error(
    features: CriticFeatures,
    omega: np.ndarray,
    omega_bar: np.ndarray,
    s_tilde: int,
    s_next: int,
    reward: float,
    discount: float,
) -> float:
    """δ̄ = r + γφ(s')ᵀω̄ − φ(s̃)ᵀω; the bootstrap term reads the target ω̄."""
    return float(reward + discount * features.value_of(omega_bar, s_next) - features.value_of(omega, s_tilde))


def gamma_scale(omega: np.ndarray, c0: float) -> float:
    """
    Γ(ω) = 1 when ‖ω‖ <= C₀, (1 + C₀)/(1 + ‖ω‖) otherwise.

    Both branches agree at ‖ω‖ = C₀, so Γ is continuous.
    """
    norm = float(np.linalg.norm(omega))
    if norm <= c0:
        return 1.0
    return (1.0 + c0) / (1.0 + norm)


def stabilizer_bounds(c0: float) -> Tuple[float, float]:
    """
    (C₁, C₂) with C₁ <= ‖ω‖Γ(ω) < C₂ whenever ‖ω‖ >= C₀.

    r ↦ r(1 + C₀)/(1 + r) increases from C₀ at r = C₀ towards 1 + C₀. Below C₀ the product
    is ‖ω‖ itself.
    """
    if not c0 > 0:
        raise ValueError(f"C0 must be positive, got {c0}")
    return c0, 1.0 + c0


def row_dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Σ_j a[..., j] b[..., j] over the last axis.

    Summed left to right, so a row's value does not depend on how many rows share the call.
    """
    return np.cumsum(a * b, axis=-1)[..., -1]


def gamma_scale_rows(omega: np.ndarray, c0: float) -> np.ndarray:
    """Γ(ω_r) for each row of an (R, m) array."""
    norms = np.sqrt(row_dot(omega, omega))
    return np.where(norms <= c0, 1.0, (1.0 + c0) / (1.0 + norms))
