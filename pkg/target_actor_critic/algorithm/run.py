"""Full runs of the learner with oracle-backed metrics at snapshot strides."""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from target_actor_critic.algorithm.learner import (
    UNIFORMS_PER_STEP,
    Learner,
    LearnerOptions,
    LearnerState,
    StepRecord,
    Transition,
    initial_state,
)
from target_actor_critic.algorithm.updates import row_dot
from target_actor_critic.config.documents import METRIC_NAMES
from target_actor_critic.errors import DivergenceError
from target_actor_critic.features import CriticFeatures
from target_actor_critic.mdp import ChainState, FiniteMdp
from target_actor_critic.oracle import OracleCache, OracleReport
from target_actor_critic.schedules import PowerSchedule, Rates

logger = logging.getLogger(__name__)

AVERAGE_COLUMNS = ("avg_critic_error", "avg_grad_norm_sq")
METRIC_COLUMNS = ("t",) + METRIC_NAMES + AVERAGE_COLUMNS

# Steps of uniforms drawn per replicate at a time
BLOCK_STEPS = 4096


@dataclass
class RunConfig:
    """
    One replicate of the algorithm.

    Attributes:
        horizon: Number of steps T (0 returns the initial state only)
        snapshot_stride: Steps between recorded metric rows; T is always recorded
        oracle_stride: Steps between fresh ω̄*(θ_t) solves feeding the running averages
        checkpoints: Extra steps recorded in addition to the stride grid
        warm_start: Start ω₀ = ω̄₀ = ω̄*(θ₀)
        record_trajectory: Keep every StepRecord
    """

    mdp: FiniteMdp
    policy_features: np.ndarray
    features: CriticFeatures
    schedule: PowerSchedule
    horizon: int
    seed: int = 0
    replicate: int = 0
    snapshot_stride: int = 100
    oracle_stride: int = 100
    options: LearnerOptions = field(default_factory=LearnerOptions)
    checkpoints: Sequence[int] = ()
    theta0: Optional[np.ndarray] = None
    omega0: Optional[np.ndarray] = None
    omega_bar0: Optional[np.ndarray] = None
    warm_start: bool = False
    record_trajectory: bool = False
    n_random_v: int = 100

    def validate(self) -> List[str]:
        problems = [f"schedule: {p}" for p in self.schedule.validate()]
        if self.horizon < 0:
            problems.append("horizon must be nonnegative")
        if self.snapshot_stride < 1 or self.oracle_stride < 1:
            problems.append("strides must be at least 1")
        return problems

    def record_steps(self) -> List[int]:
        steps = set(range(0, self.horizon + 1, self.snapshot_stride))
        steps.add(self.horizon)
        steps.update(c for c in self.checkpoints if 0 <= c <= self.horizon)
        return sorted(steps)


@dataclass
class RunResult:
    """Metrics, snapshots and (optionally) the trajectory of one replicate."""

    metrics: pd.DataFrame
    snapshots: List[Dict[str, object]]
    final_state: LearnerState
    trajectory: Optional[pd.DataFrame] = None
    aborted: bool = False
    abort_step: Optional[int] = None
    abort_reason: str = ""
    seed: int = 0
    replicate: int = 0
    target_mode: str = "polyak"

    def snapshot_frame(self) -> pd.DataFrame:
        rows = []
        for snap in self.snapshots:
            row: Dict[str, object] = {"t": snap["t"], "tilde_state": snap["tilde_state"]}
            for name in ("theta", "omega", "omega_bar"):
                for i, value in enumerate(np.asarray(snap[name])):
                    row[f"{name}_{i}"] = float(value)
            rows.append(row)
        return pd.DataFrame(rows)


def bellman_residual(report: OracleReport, features: CriticFeatures, omega: np.ndarray, discount: float) -> float:
    """‖Π_θ T_θ(Φω) − Φω‖ at the report's θ."""
    approx = features.values(omega)
    backed_up = report.R_theta + discount * report.P_theta @ approx
    return float(np.linalg.norm(report.Pi_theta @ backed_up - approx))


def metric_row(
    t: int,
    omega: np.ndarray,
    omega_bar: np.ndarray,
    report: OracleReport,
    features: CriticFeatures,
    discount: float,
    avg_critic: float,
    avg_grad: float,
) -> Dict[str, float]:
    star = report.bar_omega_star
    return {
        "t": t,
        "critic_error_sq": float(np.sum((omega - star) ** 2)),
        "target_error_sq": float(np.sum((omega_bar - star) ** 2)),
        "grad_norm_sq": float(np.sum(report.grad_J**2)),
        "J": float(report.J),
        "bellman_residual": bellman_residual(report, features, omega, discount),
        "eps_fa": float(report.eps_fa),
        "bias_norm": float(np.linalg.norm(report.bias)),
        "avg_critic_error": avg_critic,
        "avg_grad_norm_sq": avg_grad,
    }


def select_metrics(metrics: pd.DataFrame, names: Sequence[str]) -> pd.DataFrame:
    """Keep t, the requested metric columns and the running averages, in canonical order."""
    wanted = {"t", *names, *AVERAGE_COLUMNS}
    return metrics[[c for c in METRIC_COLUMNS if c in wanted]]


def batch_compatible(first: RunConfig, other: RunConfig) -> bool:
    """True when two replicates can share one lockstep batch (they may differ in seed and start)."""
    return (
        other.mdp is first.mdp
        and other.policy_features is first.policy_features
        and other.features is first.features
        and other.schedule == first.schedule
        and other.options == first.options
        and other.horizon == first.horizon
        and other.snapshot_stride == first.snapshot_stride
        and other.oracle_stride == first.oracle_stride
        and tuple(other.checkpoints) == tuple(first.checkpoints)
        and other.warm_start == first.warm_start
        and other.record_trajectory == first.record_trajectory
        and other.n_random_v == first.n_random_v
    )


class _Replicate:
    """Per-replicate output collected while its row is live."""

    def __init__(self, config: RunConfig, state: LearnerState):
        self.config = config
        self.rng = state.chain.rng
        self.rows: List[Dict[str, float]] = []
        self.snapshots: List[Dict[str, object]] = []
        self.records: List[StepRecord] = []
        self.final_state = state
        self.abort_step: Optional[int] = None
        self.abort_reason = ""

    def result(self) -> RunResult:
        config = self.config
        trajectory = None
        if config.record_trajectory:
            trajectory = pd.DataFrame(self.records, columns=list(StepRecord._fields))
        return RunResult(
            metrics=pd.DataFrame(self.rows, columns=list(METRIC_COLUMNS)),
            snapshots=self.snapshots,
            final_state=self.final_state,
            trajectory=trajectory,
            aborted=self.abort_step is not None,
            abort_step=self.abort_step,
            abort_reason=self.abort_reason,
            seed=config.seed,
            replicate=config.replicate,
            target_mode=config.options.target_mode,
        )


def run(config: RunConfig) -> RunResult:
    """
    Execute T steps and record oracle-backed metrics.

    Recorded instantaneous metrics use the exact oracle at θ_t. The running averages
    (1/(t+1))Σ_{k<=t} use the ω̄*(θ) and ∇J(θ) of the latest oracle solve, refreshed every
    oracle_stride steps; with α ≡ 0 they are exact at every step.

    Args:
        config: Run configuration

    Returns:
        RunResult; on divergence the partial result is returned with aborted=True

    Raises:
        ValueError: If the configuration is invalid
    """
    return run_batch([config])[0]


def run_batch(configs: Sequence[RunConfig]) -> List[RunResult]:
    """
    Execute several replicates of one experiment in lockstep, one array row each.

    Each replicate draws its five uniforms per step from its own stream, in blocks of
    BLOCK_STEPS steps, and keeps its own metrics, snapshots and running averages. A
    replicate that diverges leaves the batch with its partial result; the rest continue.

    Args:
        configs: Replicates satisfying batch_compatible with the first one

    Returns:
        One RunResult per config, in input order

    Raises:
        ValueError: If a configuration is invalid or the configs cannot share a batch
    """
    if not configs:
        return []
    base = configs[0]
    for config in configs:
        problems = config.validate()
        if problems:
            raise ValueError("Invalid run configuration: " + "; ".join(problems))
        if not batch_compatible(base, config):
            raise ValueError(f"Replicate {config.replicate} cannot share a batch with replicate {base.replicate}")

    mdp, features, schedule = base.mdp, base.features, base.schedule
    cache = OracleCache(mdp, base.policy_features, features, base.n_random_v)
    learner = Learner(mdp, base.policy_features, features, schedule, base.options)
    starts = [
        initial_state(mdp, c.policy_features, features, c.seed, c.replicate, c.theta0, c.omega0, c.omega_bar0)
        for c in configs
    ]
    replicates = [_Replicate(c, s) for c, s in zip(configs, starts)]

    theta = np.stack([s.theta for s in starts])
    omega = np.stack([s.omega for s in starts])
    omega_bar = np.stack([s.omega_bar for s in starts])
    tilde = np.array([s.chain.tilde_state for s in starts])
    if base.warm_start:
        omega = np.stack([cache.tracking(row).bar_omega_star for row in theta])
        omega_bar = omega.copy()

    live = list(range(len(configs)))
    frozen_actor = schedule.c1 == 0.0
    cdf_table = learner.action_cdf_table(theta) if frozen_actor else None
    row_index = np.arange(len(live))
    record_at = set(base.record_steps())
    horizon = base.horizon
    sum_critic = np.zeros(len(live))
    sum_grad = np.zeros(len(live))
    stars = grad_sq = None
    block_u = None
    alphas: List[float] = []
    betas: List[float] = []
    xis: List[float] = []
    block_start = 0

    logger.info(
        f"Run seed {base.seed} replicates {[c.replicate for c in configs]}: T = {horizon}, "
        f"target mode {base.options.target_mode}"
    )
    t = 0
    while True:
        if t % base.oracle_stride == 0 and (stars is None or not frozen_actor):
            tracked = [cache.tracking(row) for row in theta]
            stars = np.stack([tr.bar_omega_star for tr in tracked])
            grad_sq = np.array([tr.grad_norm_sq for tr in tracked])
        diff = omega - stars
        sum_critic += row_dot(diff, diff)
        sum_grad += grad_sq
        if t in record_at:
            for i, r in enumerate(live):
                exact = cache.report(theta[i])
                replicates[r].rows.append(
                    metric_row(
                        t, omega[i], omega_bar[i], exact, features, mdp.discount,
                        float(sum_critic[i]) / (t + 1), float(sum_grad[i]) / (t + 1),
                    )
                )
                replicates[r].snapshots.append(
                    {
                        "t": t,
                        "theta": theta[i].copy(),
                        "omega": omega[i].copy(),
                        "omega_bar": omega_bar[i].copy(),
                        "tilde_state": int(tilde[i]),
                    }
                )
        if t >= horizon:
            break

        k = t - block_start
        if block_u is None or k >= len(alphas):
            block_start, k = t, 0
            n = min(BLOCK_STEPS, horizon - t)
            block_u = np.stack([replicates[r].rng.random((n, UNIFORMS_PER_STEP)) for r in live], axis=1)
            rates = schedule.rate_arrays(np.arange(t, t + n))
            alphas, betas, xis = rates["alpha"].tolist(), rates["beta"].tolist(), rates["xi"].tolist()

        action_cdf = None if cdf_table is None else cdf_table[row_index, tilde]
        out = learner.advance(theta, omega, omega_bar, tilde, Rates(alphas[k], betas[k], xis[k]), t, block_u[k], action_cdf)
        bad = learner.nonfinite_rows(out)
        if bad:
            for i, name in bad:
                rep = replicates[live[i]]
                rep.abort_step = t
                rep.abort_reason = str(DivergenceError(t, name))
                rep.final_state = _row_state(rep, theta, omega, omega_bar, tilde, i, t)
                logger.error(f"Run seed {rep.config.seed} replicate {rep.config.replicate} aborted: {rep.abort_reason}")
            dead = {i for i, _ in bad}
            keep = np.array([i for i in range(len(live)) if i not in dead], dtype=int)
            live = [live[i] for i in keep]
            if not live:
                break
            out = Transition(*(column[keep] for column in out))
            theta, omega, omega_bar, tilde = theta[keep], omega[keep], omega_bar[keep], tilde[keep]
            stars, grad_sq = stars[keep], grad_sq[keep]
            sum_critic, sum_grad = sum_critic[keep], sum_grad[keep]
            block_u = block_u[:, keep]
            row_index = np.arange(len(live))
            if cdf_table is not None:
                cdf_table = cdf_table[keep]

        if base.record_trajectory:
            for r, record in zip(live, out.records(t)):
                replicates[r].records.append(record)
        theta, omega, omega_bar, tilde = out.theta, out.omega, out.omega_bar, out.next_tilde
        t += 1

    for i, r in enumerate(live):
        replicates[r].final_state = _row_state(replicates[r], theta, omega, omega_bar, tilde, i, t)
    logger.debug(f"Batch finished at t = {t} ({cache})")
    return [rep.result() for rep in replicates]


def _row_state(
    replicate: _Replicate,
    theta: np.ndarray,
    omega: np.ndarray,
    omega_bar: np.ndarray,
    tilde: np.ndarray,
    i: int,
    t: int,
) -> LearnerState:
    chain = ChainState(tilde_state=int(tilde[i]), rng=replicate.rng, step=t)
    return LearnerState(theta=theta[i].copy(), omega=omega[i].copy(), omega_bar=omega_bar[i].copy(), chain=chain, t=t)
