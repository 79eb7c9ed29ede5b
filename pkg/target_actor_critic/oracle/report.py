"""OracleReport: every closed-form quantity at one θ, with an md5-keyed cache."""

import hashlib
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional

import numpy as np

from target_actor_critic.features import CriticFeatures
from target_actor_critic.mdp import FiniteMdp
from target_actor_critic.oracle import quantities as q
from target_actor_critic.oracle.spectral import SpectralReport, spectral_report
from target_actor_critic.policy import SoftmaxPolicy

logger = logging.getLogger(__name__)

PROB_SUM_TOL = 1e-10
IDEMPOTENCE_TOL = 1e-9
SELF_ADJOINT_TOL = 1e-10
FIXED_POINT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class OracleReport:
    """Closed-form theory quantities at a fixed θ."""

    theta: np.ndarray
    P_theta: np.ndarray
    R_theta: np.ndarray
    d_rho_theta: np.ndarray
    mu_rho_theta: np.ndarray
    D_rho_theta: np.ndarray
    G: np.ndarray
    G_bar: np.ndarray
    h: np.ndarray
    Pi_theta: np.ndarray
    bar_omega_star: np.ndarray
    V_pi: np.ndarray
    Q_pi: np.ndarray
    J: float
    grad_J: np.ndarray
    bias: np.ndarray
    drift: np.ndarray
    q_hat: np.ndarray
    eps_fa: float
    projected_bellman_residual: float
    fixed_point_consistency: float
    spectral: SpectralReport
    warnings: List[str] = field(default_factory=list)

    @property
    def eps_min(self) -> float:
        return self.spectral.eps_min

    @property
    def kappa_min(self) -> float:
        return self.spectral.kappa_min

    @property
    def zeta_min(self) -> float:
        return self.spectral.zeta_min

    @property
    def hurwitz_margin(self) -> float:
        return self.spectral.hurwitz_margin

    @property
    def advantage(self) -> np.ndarray:
        n = self.V_pi.shape[0]
        return self.Q_pi.reshape(n, -1) - self.V_pi[:, None]

    def checks(self) -> Dict[str, bool]:
        """Report invariants and spectral checks; all True on a healthy instance."""
        Pi, d = self.Pi_theta, self.d_rho_theta
        D = self.D_rho_theta
        out = {
            "occupancy_is_distribution": bool(
                abs(d.sum() - 1.0) <= PROB_SUM_TOL and np.all(d >= -PROB_SUM_TOL)
            ),
            "state_action_occupancy_is_distribution": bool(
                abs(self.mu_rho_theta.sum() - 1.0) <= PROB_SUM_TOL
                and np.all(self.mu_rho_theta >= -PROB_SUM_TOL)
            ),
            "projection_idempotent": bool(np.linalg.norm(Pi @ Pi - Pi) <= IDEMPOTENCE_TOL),
            "projection_D_self_adjoint": bool(np.linalg.norm(D @ Pi - Pi.T @ D) <= SELF_ADJOINT_TOL),
            "projected_bellman_fixed_point": bool(self.projected_bellman_residual <= FIXED_POINT_TOL),
            "fixed_point_consistency": bool(self.fixed_point_consistency <= FIXED_POINT_TOL),
        }
        out.update(self.spectral.checks())
        return out

    def passed(self) -> bool:
        return all(self.checks().values())

    def to_document(self) -> Dict[str, Any]:
        """Plain mapping for YAML/JSON output (arrays as nested lists)."""
        doc: Dict[str, Any] = {}
        for name in (
            "theta", "P_theta", "R_theta", "d_rho_theta", "mu_rho_theta", "G", "G_bar", "h",
            "Pi_theta", "bar_omega_star", "V_pi", "Q_pi", "grad_J", "bias", "drift", "q_hat",
        ):
            doc[name] = np.asarray(getattr(self, name)).tolist()
        doc["J"] = float(self.J)
        doc["eps_fa"] = float(self.eps_fa)
        doc["projected_bellman_residual"] = float(self.projected_bellman_residual)
        doc["fixed_point_consistency"] = float(self.fixed_point_consistency)
        doc["spectral"] = {k: (bool(v) if isinstance(v, (bool, np.bool_)) else float(v))
                           for k, v in self.spectral.to_dict().items()}
        doc["checks"] = {k: bool(v) for k, v in self.checks().items()}
        doc["warnings"] = list(self.warnings)
        return doc


def oracle_report(
    mdp: FiniteMdp,
    policy: SoftmaxPolicy,
    features: CriticFeatures,
    n_random_v: int = 100,
    seed: int = 0,
) -> OracleReport:
    """
    Compute every closed-form quantity at policy.theta.

    Args:
        mdp: Environment
        policy: Softmax policy at the θ of interest
        features: Critic features Φ
        n_random_v: Test vectors for the randomised contraction check
        seed: Seed of those test vectors

    Returns:
        OracleReport

    Raises:
        NumericalFault: If a required linear solve fails
    """
    notes: List[str] = []
    cm = q.critic_matrices(mdp, policy, features, notes)
    fp = q.fixed_points(mdp, policy, features, notes, matrices=cm)
    bar_star = fp.bar_omega_star
    Pi = q.projection(mdp, policy, features, notes, matrices=cm)
    V = q.true_value(mdp, policy, notes)
    Q = q.true_q(mdp, policy, V)
    mu = q.state_action_occupancy(mdp, policy, cm.d)
    Phi = features.matrix

    approx = Phi @ bar_star
    residual = float(np.linalg.norm(Pi @ q.bellman_apply(mdp, policy, approx) - approx))
    consistency = float(np.linalg.norm(fp.omega_star(bar_star) - bar_star))

    report = OracleReport(
        theta=policy.theta.copy(),
        P_theta=cm.P,
        R_theta=cm.R,
        d_rho_theta=cm.d,
        mu_rho_theta=mu,
        D_rho_theta=np.diag(cm.d),
        G=cm.G,
        G_bar=cm.G_bar,
        h=cm.h,
        Pi_theta=Pi,
        bar_omega_star=bar_star,
        V_pi=V,
        Q_pi=Q.reshape(-1),
        J=float(mdp.init_dist @ V),
        grad_J=q.exact_gradient(mdp, policy),
        bias=q.bias(mdp, policy, features, notes),
        drift=q.steady_state_drift(mdp, policy, features, notes),
        q_hat=q.q_hat(mdp, features, bar_star).reshape(-1),
        eps_fa=q.d_norm(V - approx, cm.d),
        projected_bellman_residual=residual,
        fixed_point_consistency=consistency,
        spectral=spectral_report(mdp, policy, features, n_random_v, seed, notes, matrices=cm),
        warnings=notes,
    )
    return report


def instance_digest(mdp: FiniteMdp, policy_features: np.ndarray, features: CriticFeatures) -> str:
    """md5 over the arrays that define an instance."""
    digest = hashlib.md5()
    for array in (mdp.kernel, mdp.reward, mdp.init_dist, np.array([mdp.discount]), policy_features, features.matrix):
        digest.update(np.ascontiguousarray(array, dtype=float).tobytes())
    return digest.hexdigest()


class Tracking(NamedTuple):
    """The two oracle quantities the running averages follow between metric rows."""

    bar_omega_star: np.ndarray
    grad_norm_sq: float


class OracleCache:
    """
    Caches oracle reports keyed by md5(instance digest, θ bytes).

    Repeated θ (frozen actor, revisited snapshots) hit the cache instead of re-solving.
    """

    def __init__(self, mdp: FiniteMdp, policy_features: np.ndarray, features: CriticFeatures,
                 n_random_v: int = 100, max_entries: int = 4096):
        self.mdp = mdp
        self.policy_features = np.asarray(policy_features, dtype=float)
        self.features = features
        self.n_random_v = n_random_v
        self.max_entries = max_entries
        self._instance = instance_digest(mdp, self.policy_features, features)
        self._reports: Dict[str, OracleReport] = {}
        self._tracking: Dict[str, Tracking] = {}
        self.hits = 0

    def key(self, theta: np.ndarray) -> str:
        digest = hashlib.md5(self._instance.encode("utf-8"))
        digest.update(np.ascontiguousarray(theta, dtype=float).tobytes())
        return digest.hexdigest()

    def report(self, theta: np.ndarray) -> OracleReport:
        key = self.key(theta)
        if key in self._reports:
            self.hits += 1
            logger.debug(f"Oracle cache hit for θ {key[:8]}...")
            return self._reports[key]
        policy = SoftmaxPolicy(self.policy_features, np.array(theta, dtype=float))
        report = oracle_report(self.mdp, policy, self.features, self.n_random_v)
        if len(self._reports) >= self.max_entries:
            self._reports.pop(next(iter(self._reports)))
        self._reports[key] = report
        return report

    def tracking(self, theta: np.ndarray) -> Tracking:
        """
        ω̄*(θ) and ‖∇J(θ)‖² without the rest of the report.

        Values are the same as report(theta) would give; a cached full report is reused.
        """
        key = self.key(theta)
        if key in self._tracking:
            self.hits += 1
            return self._tracking[key]
        if key in self._reports:
            full = self._reports[key]
            result = Tracking(full.bar_omega_star, float(np.sum(full.grad_J**2)))
        else:
            policy = SoftmaxPolicy(self.policy_features, np.array(theta, dtype=float))
            star = q.fixed_points(self.mdp, policy, self.features).bar_omega_star
            result = Tracking(star, float(np.sum(q.exact_gradient(self.mdp, policy) ** 2)))
        if len(self._tracking) >= self.max_entries:
            self._tracking.pop(next(iter(self._tracking)))
        self._tracking[key] = result
        return result

    def __repr__(self) -> str:
        return f"OracleCache(entries={len(self._reports)}, tracked={len(self._tracking)}, hits={self.hits})"
