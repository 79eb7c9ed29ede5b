"""Consolidated audit of the standing hypotheses on one instance over sampled θ."""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from target_actor_critic.errors import NumericalFault
from target_actor_critic.features import CriticFeatures
from target_actor_critic.mdp import FiniteMdp
from target_actor_critic.oracle import chain_structure, fa_error, spectral_report, state_action_kernel
from target_actor_critic.policy import SoftmaxPolicy
from target_actor_critic.schedules import PowerSchedule, check_stepsizes, estimate_mixing_constants, mixing_time

logger = logging.getLogger(__name__)


@dataclass
class AuditItem:
    """
    One audited hypothesis.

    Attributes:
        required: Counted towards the overall verdict; informational items are reported only
        margin: Worst margin over the sampled θ (positive is healthy), NaN when not numeric
    """

    name: str
    passed: bool
    required: bool = True
    margin: float = float("nan")
    detail: str = ""


@dataclass
class AuditReport:
    items: List[AuditItem] = field(default_factory=list)
    n_thetas: int = 0

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.items if item.required)

    def failures(self) -> List[str]:
        return [item.name for item in self.items if item.required and not item.passed]

    def item(self, name: str) -> AuditItem:
        for candidate in self.items:
            if candidate.name == name:
                return candidate
        raise KeyError(name)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([vars(item) for item in self.items], columns=["name", "passed", "required", "margin", "detail"])

    def to_dict(self) -> Dict[str, object]:
        return {
            "passed": self.passed,
            "n_thetas": self.n_thetas,
            "items": [vars(item) for item in self.items],
        }


def _worst(values: List[float]) -> float:
    return float(min(values)) if values else float("nan")


def assumption_audit(
    mdp: FiniteMdp,
    policy_features: np.ndarray,
    features: CriticFeatures,
    schedule: PowerSchedule,
    thetas: Optional[np.ndarray] = None,
    horizon: int = 100_000,
    n_random_v: int = 100,
    seed: int = 0,
) -> AuditReport:
    """
    Check every hypothesis that can be evaluated on a finite instance.

    Ergodicity is decided on the reset-mixture chain K̃_θ (required); the true-kernel chain
    K_θ is reported with its period as an informational item.

    Args:
        mdp: Environment
        policy_features: Array (n_states, n_actions, d)
        features: Critic features
        schedule: Step sizes
        thetas: θ samples, one per row (default: θ = 0 only)
        horizon: T used for the step-size ratios and τ_T
        n_random_v: Test vectors for the D-norm contraction check
        seed: Seed of those test vectors

    Returns:
        AuditReport; never raises for a failing hypothesis
    """
    policy_features = np.asarray(policy_features, dtype=float)
    if thetas is None:
        thetas = np.zeros((1, policy_features.shape[2]))
    thetas = np.atleast_2d(thetas)
    report = AuditReport(n_thetas=len(thetas))
    items = report.items

    rank = features.check_rank()
    items.append(AuditItem(
        "full_column_rank", rank.full_rank, True, rank.ratio - features.rank_tol,
        f"rank {rank.rank} of {features.m}, σ_min/σ_max = {rank.ratio:.3e}",
    ))

    steps = check_stepsizes(schedule, horizon)
    items.append(AuditItem(
        "stepsize_conditions", steps.regimes != ["none"] and not schedule.validate(), True, float("nan"),
        f"regimes {', '.join(steps.regimes)}; failed conditions: {', '.join(steps.failed()) or 'none'}",
    ))
    monotone = steps.conditions["nonincreasing"].passed and steps.conditions["xi_at_most_one"].passed
    items.append(AuditItem("stepsizes_nonincreasing_xi_at_most_one", monotone, True))

    policy_problems: List[str] = []
    score_margins, artificial_periods, true_periods = [], [], []
    artificial_ok, true_ok = True, True
    spectral = {"eps_min": [], "kappa_chain_margin": [], "hurwitz_margin": [], "posdef2_margin": [], "zeta_min": []}
    mixing_sigmas, mixing_taus, mixing_ok = [], [], True
    fa_errors = []
    numeric_faults: List[str] = []

    for i, theta in enumerate(thetas):
        policy = SoftmaxPolicy(policy_features, theta)
        policy_problems += [f"θ #{i}: {p}" for p in policy.validate()]
        score_norm = float(np.max(np.linalg.norm(policy.score_matrix(), axis=2)))
        score_margins.append(policy.score_bound() - score_norm)

        tilde = chain_structure(state_action_kernel(mdp, policy, artificial=True))
        true = chain_structure(state_action_kernel(mdp, policy, artificial=False))
        artificial_ok &= tilde.ergodic
        true_ok &= true.ergodic
        artificial_periods.append(tilde.period)
        true_periods.append(true.period)

        try:
            sr = spectral_report(mdp, policy, features, n_random_v, seed)
            spectral["eps_min"].append(sr.eps_min)
            spectral["kappa_chain_margin"].append(sr.kappa_chain_margin)
            spectral["hurwitz_margin"].append(-sr.hurwitz_margin)
            spectral["posdef2_margin"].append(sr.posdef2_margin)
            spectral["zeta_min"].append(sr.zeta_min)
            fa_errors.append(fa_error(mdp, policy, features))
        except NumericalFault as e:
            numeric_faults.append(f"θ #{i}: {e}")

        if tilde.ergodic:
            fit = estimate_mixing_constants(mdp, policy)
            mixing_ok &= fit.holds and fit.sigma < 1.0
            mixing_sigmas.append(fit.sigma)
            mixing_taus.append(mixing_time(schedule, horizon, fit.c, fit.sigma))
        else:
            mixing_ok = False

    items.append(AuditItem(
        "policy_positive_and_bounded_score", not policy_problems and min(score_margins) >= -1e-12, True,
        _worst(score_margins), "; ".join(policy_problems) or "π_θ > 1e-300 and ‖ψ‖ <= 2 max‖x‖",
    ))
    items.append(AuditItem(
        "ergodic_artificial_chain", artificial_ok, True, float("nan"),
        f"K̃_θ periods {sorted(set(artificial_periods))}",
    ))
    items.append(AuditItem(
        "ergodic_true_kernel_chain", true_ok, False, float("nan"),
        f"K_θ period {max(true_periods)}" + ("" if true_ok else " (not ergodic)"),
    ))
    items.append(AuditItem(
        "geometric_mixing", mixing_ok and bool(mixing_sigmas), True,
        1.0 - max(mixing_sigmas) if mixing_sigmas else float("nan"),
        f"σ max {max(mixing_sigmas):.4g}, τ_T max {max(mixing_taus)} at T = {horizon}" if mixing_sigmas else "no ergodic θ",
    ))
    if numeric_faults:
        items.append(AuditItem("oracle_solves", False, True, float("nan"), "; ".join(numeric_faults)))
    items.append(AuditItem(
        "G_bar_positive_definite", bool(spectral["eps_min"]) and _worst(spectral["eps_min"]) > 0, True,
        _worst(spectral["eps_min"]), "min over θ of λ_min(Ḡ)",
    ))
    items.append(AuditItem(
        "G_posdef_chain", bool(spectral["kappa_chain_margin"]) and _worst(spectral["kappa_chain_margin"]) >= -1e-10,
        True, _worst(spectral["kappa_chain_margin"]), "κ − (1 − √γ)ε",
    ))
    items.append(AuditItem(
        "hurwitz_critic", bool(spectral["hurwitz_margin"]) and _worst(spectral["hurwitz_margin"]) > 0, True,
        _worst(spectral["hurwitz_margin"]), "−max Re λ(−Ḡ⁻¹G)",
    ))
    items.append(AuditItem(
        "G_posdef2_inequality", bool(spectral["posdef2_margin"]) and _worst(spectral["posdef2_margin"]) >= -1e-12,
        True, _worst(spectral["posdef2_margin"]), f"{n_random_v} random V per θ",
    ))
    items.append(AuditItem(
        "zeta_positive", bool(spectral["zeta_min"]) and _worst(spectral["zeta_min"]) > 0, False,
        _worst(spectral["zeta_min"]), "min over θ of λ_min(sym(Ḡ⁻¹G))",
    ))
    items.append(AuditItem(
        "fa_error", True, False, -max(fa_errors) if fa_errors else float("nan"),
        f"ε_FA = {max(fa_errors):.4g} (max over θ)" if fa_errors else "not computed",
    ))

    for item in items:
        if item.required and not item.passed:
            logger.warning(f"Audit item failed: {item.name} ({item.detail})")
    logger.info(f"Audit over {len(thetas)} θ: {'pass' if report.passed else 'FAIL'}")
    return report
