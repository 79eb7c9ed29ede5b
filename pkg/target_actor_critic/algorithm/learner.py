"""
One iteration of the three-timescale target-based actor-critic.

Per step, in order:
1. Ã_t ~ π_θt(·|S̃_t), then S_{t+1} ~ p(·|S̃_t, Ã_t), R_{t+1}, B_{t+1}, S^ρ_{t+1}
2. δ_{t+1} (bootstrap on ω_t) and δ̄_{t+1} (bootstrap on ω̄_t)
3. θ_{t+1} = θ_t + α_t (1/(1−γ)) Γ δ_{t+1} ψ_θt(S̃_t, Ã_t)
4. ω_{t+1} = ω_t + β_t δ̄_{t+1} φ(S̃_t)
5. ω̄_{t+1} = ω̄_t + ξ_t (ω_{t+1} − ω̄_t)

The Learner advances R replicates in lockstep, one row each. Step 1 consumes five
uniforms per row in the order action, S_{t+1}, reward noise, B_{t+1}, S^ρ_{t+1}, the same
stream layout as sample_categorical followed by sample_env_step.
"""

import logging
from dataclasses import dataclass, replace
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy.special import softmax

from target_actor_critic.algorithm.updates import gamma_scale_rows, row_dot
from target_actor_critic.errors import DivergenceError
from target_actor_critic.features import CriticFeatures
from target_actor_critic.mdp import ChainState, FiniteMdp, initial_chain, inverse_cdf, make_rng
from target_actor_critic.schedules import PowerSchedule, Rates

logger = logging.getLogger(__name__)

UNIFORMS_PER_STEP = 5


@dataclass(frozen=True, eq=False)
class LearnerState:
    """(θ_t, ω_t, ω̄_t) with the sampler's chain state at step t."""

    theta: np.ndarray
    omega: np.ndarray
    omega_bar: np.ndarray
    chain: ChainState
    t: int = 0

    def snapshot(self) -> Dict[str, object]:
        return {
            "t": self.t,
            "theta": self.theta.copy(),
            "omega": self.omega.copy(),
            "omega_bar": self.omega_bar.copy(),
            "tilde_state": self.chain.tilde_state,
        }


class StepRecord(NamedTuple):
    t: int
    delta: float
    delta_bar: float
    s_tilde: int
    a_tilde: int
    s_next: int
    reward: float
    bernoulli: int


class Transition(NamedTuple):
    """One lockstep iteration; every array has one row per replicate."""

    theta: np.ndarray
    omega: np.ndarray
    omega_bar: np.ndarray
    next_tilde: np.ndarray
    s_tilde: np.ndarray
    a_tilde: np.ndarray
    s_next: np.ndarray
    reward: np.ndarray
    bernoulli: np.ndarray
    delta: np.ndarray
    delta_bar: np.ndarray

    def records(self, t: int) -> List[StepRecord]:
        columns = (
            self.delta.tolist(),
            self.delta_bar.tolist(),
            self.s_tilde.tolist(),
            self.a_tilde.tolist(),
            self.s_next.tolist(),
            self.reward.tolist(),
            self.bernoulli.astype(int).tolist(),
        )
        return [StepRecord(t, *row) for row in zip(*columns)]


@dataclass(frozen=True)
class LearnerOptions:
    """
    Variants of the update.

    Attributes:
        actor_td: "classic" drives the actor with δ, "target" with δ̄ (a simplification,
            not trajectory-equivalent)
        stabilizer_c0: When set, the actor increment is scaled by Γ(ω_t) with this C₀
        hard_sync_every: When set, ω̄ is frozen and overwritten by ω every K steps instead
            of Polyak averaging (comparison mode outside the analysed algorithm)
    """

    actor_td: str = "classic"
    stabilizer_c0: Optional[float] = None
    hard_sync_every: Optional[int] = None

    def __post_init__(self):
        if self.actor_td not in ("classic", "target"):
            raise ValueError(f"actor_td must be 'classic' or 'target', got {self.actor_td!r}")
        if self.stabilizer_c0 is not None and not self.stabilizer_c0 > 0:
            raise ValueError(f"stabilizer_c0 must be positive, got {self.stabilizer_c0}")
        if self.hard_sync_every is not None and self.hard_sync_every < 1:
            raise ValueError(f"hard_sync_every must be at least 1, got {self.hard_sync_every}")

    @property
    def target_mode(self) -> str:
        if self.hard_sync_every is None:
            return "polyak"
        return f"hard-sync every {self.hard_sync_every} (comparison mode)"


def initial_state(
    mdp: FiniteMdp,
    policy_features: np.ndarray,
    features: CriticFeatures,
    seed: int,
    replicate: int = 0,
    theta0: Optional[np.ndarray] = None,
    omega0: Optional[np.ndarray] = None,
    omega_bar0: Optional[np.ndarray] = None,
) -> LearnerState:
    """
    θ₀ = 0 and ω₀ = 0 unless given; ω̄₀ defaults to ω₀; S̃₀ ~ ρ on the replicate's stream.
    """
    d = np.asarray(policy_features).shape[2]
    theta = np.zeros(d) if theta0 is None else np.array(theta0, dtype=float)
    omega = np.zeros(features.m) if omega0 is None else np.array(omega0, dtype=float)
    omega_bar = omega.copy() if omega_bar0 is None else np.array(omega_bar0, dtype=float)
    rng = make_rng(seed, replicate)
    return LearnerState(theta=theta, omega=omega, omega_bar=omega_bar, chain=initial_chain(mdp, rng), t=0)


class Learner:
    """
    Applies the update rule for one environment and feature set.

    Lookup tables (Φ, the kernel and ρ cumulative rows, the reward table) are built once
    here; advance() only gathers from them.

    Attributes:
        mdp: Environment
        policy_features: Array (n_states, n_actions, d)
        features: Critic features Φ
        schedule: Step sizes (α_t, β_t, ξ_t)
        options: Update variants
    """

    def __init__(
        self,
        mdp: FiniteMdp,
        policy_features: np.ndarray,
        features: CriticFeatures,
        schedule: PowerSchedule,
        options: Optional[LearnerOptions] = None,
    ):
        self.mdp = mdp
        self.policy_features = np.asarray(policy_features, dtype=float)
        self.features = features
        self.schedule = schedule
        self.options = options or LearnerOptions()
        self._actor_factor = 1.0 / (1.0 - mdp.discount)
        self._phi = np.asarray(features.matrix, dtype=float)
        self._reward = np.asarray(mdp.reward, dtype=float)
        self._kernel_cdf = np.cumsum(mdp.kernel, axis=2)
        self._init_cdf = np.cumsum(mdp.init_dist)
        if self.options.hard_sync_every is not None:
            logger.warning(f"Target update mode: {self.options.target_mode}")

    def policy_rows(self, theta: np.ndarray, tilde: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(x(S̃_r, ·), π_θr(·|S̃_r)) per row, shapes (R, A, d) and (R, A)."""
        x = self.policy_features[tilde]
        return x, softmax(row_dot(x, theta[:, None, :]), axis=1)

    def action_cdf_table(self, theta: np.ndarray) -> np.ndarray:
        """Cumulative π_θr(·|s) for every state, shape (R, n_states, A); for a frozen actor."""
        logits = row_dot(self.policy_features[None, :, :, :], theta[:, None, None, :])
        return np.cumsum(softmax(logits, axis=2), axis=2)

    def advance(
        self,
        theta: np.ndarray,
        omega: np.ndarray,
        omega_bar: np.ndarray,
        tilde: np.ndarray,
        rates: Rates,
        t: int,
        u: np.ndarray,
        action_cdf: Optional[np.ndarray] = None,
    ) -> Transition:
        """
        One iteration for R replicates at the shared step t.

        Inputs are never written to; unchanged iterates come back as the same arrays.

        Args:
            theta, omega, omega_bar: Arrays (R, d), (R, m), (R, m)
            tilde: S̃_t per row, shape (R,)
            rates: (α_t, β_t, ξ_t)
            t: Step index (drives hard-sync)
            u: Array (R, 5) of uniforms in draw order
            action_cdf: Cumulative π_θ(·|S̃_t) rows (R, A); computed from θ when omitted

        Returns:
            Transition
        """
        options = self.options
        gamma = self.mdp.discount
        actor_active = rates.alpha != 0.0

        x = probs = None
        if action_cdf is None or actor_active:
            x, probs = self.policy_rows(theta, tilde)
            action_cdf = np.cumsum(probs, axis=1)
        a = inverse_cdf(action_cdf, u[:, 0])
        s_next = inverse_cdf(self._kernel_cdf[tilde, a], u[:, 1])
        reward = self._reward[tilde, a] + (-1.0 + 2.0 * u[:, 2]) * self.mdp.reward_noise_halfwidth
        bernoulli = u[:, 3] < gamma
        next_tilde = np.where(bernoulli, s_next, inverse_cdf(self._init_cdf, u[:, 4]))

        phi_s = self._phi[tilde]
        phi_next = self._phi[s_next]
        v_s = row_dot(phi_s, omega)
        delta = reward + gamma * row_dot(phi_next, omega) - v_s
        delta_bar = reward + gamma * row_dot(phi_next, omega_bar) - v_s

        if actor_active:
            actor_delta = delta if options.actor_td == "classic" else delta_bar
            scale = 1.0 if options.stabilizer_c0 is None else gamma_scale_rows(omega, options.stabilizer_c0)
            rows = np.arange(len(tilde))
            psi = x[rows, a] - row_dot(probs[:, None, :], np.swapaxes(x, 1, 2))
            coef = rates.alpha * self._actor_factor * scale * actor_delta
            theta = theta + coef[:, None] * psi

        omega_next = omega + (rates.beta * delta_bar)[:, None] * phi_s

        if options.hard_sync_every is None:
            # ξ = 1 gives ω̄_{t+1} = ω_{t+1} bit for bit
            omega_bar = (1.0 - rates.xi) * omega_bar + rates.xi * omega_next
        elif (t + 1) % options.hard_sync_every == 0:
            omega_bar = omega_next.copy()

        return Transition(
            theta=theta,
            omega=omega_next,
            omega_bar=omega_bar,
            next_tilde=next_tilde,
            s_tilde=tilde,
            a_tilde=a,
            s_next=s_next,
            reward=reward,
            bernoulli=bernoulli,
            delta=delta,
            delta_bar=delta_bar,
        )

    @staticmethod
    def nonfinite_rows(step: Transition) -> List[Tuple[int, str]]:
        """(row, iterate name) for each row whose θ, ω or ω̄ left the reals; first name wins."""
        iterates = (("theta", step.theta), ("omega", step.omega), ("omega_bar", step.omega_bar))
        if all(np.isfinite(value).all() for _, value in iterates):
            return []
        found: Dict[int, str] = {}
        for name, value in iterates:
            for row in np.nonzero(~np.isfinite(value).all(axis=1))[0].tolist():
                found.setdefault(row, name)
        return sorted(found.items())

    def step(self, state: LearnerState) -> Tuple[LearnerState, StepRecord]:
        """
        Perform one iteration.

        Returns:
            Tuple of (next LearnerState, StepRecord of this transition)

        Raises:
            DivergenceError: If θ, ω or ω̄ becomes non-finite
        """
        u = state.chain.rng.random(UNIFORMS_PER_STEP)[None, :]
        out = self.advance(
            state.theta[None, :],
            state.omega[None, :],
            state.omega_bar[None, :],
            np.array([state.chain.tilde_state]),
            self.schedule.rates_at(state.t),
            state.t,
            u,
        )
        bad = self.nonfinite_rows(out)
        if bad:
            raise DivergenceError(state.t, bad[0][1])

        chain = replace(state.chain, tilde_state=int(out.next_tilde[0]), step=state.chain.step + 1)
        next_state = replace(
            state,
            theta=out.theta[0].copy(),
            omega=out.omega[0].copy(),
            omega_bar=out.omega_bar[0].copy(),
            chain=chain,
            t=state.t + 1,
        )
        return next_state, out.records(state.t)[0]


def step(
    state: LearnerState,
    mdp: FiniteMdp,
    policy_features: np.ndarray,
    features: CriticFeatures,
    schedule: PowerSchedule,
    options: Optional[LearnerOptions] = None,
) -> Tuple[LearnerState, StepRecord]:
    """One iteration with a throwaway Learner."""
    return Learner(mdp, policy_features, features, schedule, options).step(state)


def stabilized_actor_step(
    state: LearnerState,
    mdp: FiniteMdp,
    policy_features: np.ndarray,
    features: CriticFeatures,
    schedule: PowerSchedule,
    c0: float,
    options: Optional[LearnerOptions] = None,
) -> Tuple[LearnerState, StepRecord]:
    """One iteration with the actor increment scaled by Γ(ω_t)."""
    base = options or LearnerOptions()
    stabilised = LearnerOptions(base.actor_td, c0, base.hard_sync_every)
    return Learner(mdp, policy_features, features, schedule, stabilised).step(state)
