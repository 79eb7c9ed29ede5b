"""Monte-Carlo studies: critic tracking, rate sweeps with slope fits, actor stationarity."""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from target_actor_critic.algorithm import RunResult
from target_actor_critic.errors import NoisyEstimateError
from target_actor_critic.experiments.harness import ExperimentConfig, failed_seed_count, run_seeds, seed_mean
from target_actor_critic.oracle import OracleCache
from target_actor_critic.schedules import (
    RateExponents,
    actor_rate_exponents,
    critic_rate_exponents,
    sample_complexity,
)

logger = logging.getLogger(__name__)

MIN_FIT_HORIZONS = 3
MIN_FIT_DECADES = 2.0


def dyadic_checkpoints(horizon: int) -> List[int]:
    """Powers of two up to the horizon."""
    out, t = [], 1
    while t <= horizon:
        out.append(t)
        t *= 2
    return out


@dataclass
class RateFit:
    """
    Least-squares slope of log y(T) against log T.

    Attributes:
        theoretical_exponent: Dominant (least negative) exponent of the bound for the
            schedule, reported next to the empirical slope
    """

    horizons: List[int]
    values: List[float]
    stderrs: Optional[List[float]]
    slope: float
    slope_stderr: float
    intercept: float
    quantity: str = ""
    theoretical_exponent: Optional[float] = None
    dominant_term: Optional[str] = None

    def within(self, low: float, high: float) -> bool:
        return low <= self.slope <= high

    def to_dict(self) -> Dict[str, object]:
        return {
            "quantity": self.quantity,
            "horizons": list(self.horizons),
            "values": list(self.values),
            "stderrs": None if self.stderrs is None else list(self.stderrs),
            "slope": self.slope,
            "slope_stderr": self.slope_stderr,
            "intercept": self.intercept,
            "theoretical_exponent": self.theoretical_exponent,
            "dominant_term": self.dominant_term,
        }


def fit_rate(
    horizons: Sequence[int],
    values: Sequence[float],
    stderrs: Optional[Sequence[float]] = None,
    quantity: str = "",
    exponents: Optional[RateExponents] = None,
) -> RateFit:
    """
    Fit y(T) ≈ C·T^slope on log-log axes.

    Args:
        horizons: At least 3 strictly increasing horizons spanning 2 decades
        values: Averaged quantity per horizon (positive)
        stderrs: Monte-Carlo standard errors per horizon
        quantity: Label
        exponents: Theoretical bound exponents to report alongside

    Returns:
        RateFit

    Raises:
        ValueError: On too few, unordered or too narrow horizons, or nonpositive values
        NoisyEstimateError: When some standard error exceeds half its value
    """
    h = np.asarray(horizons, dtype=float)
    y = np.asarray(values, dtype=float)
    if len(h) < MIN_FIT_HORIZONS or len(h) != len(y):
        raise ValueError(f"need at least {MIN_FIT_HORIZONS} (horizon, value) pairs, got {len(h)}")
    if np.any(np.diff(h) <= 0):
        raise ValueError("horizons must be strictly increasing")
    if np.log10(h[-1] / h[0]) < MIN_FIT_DECADES:
        raise ValueError(f"horizons span {np.log10(h[-1] / h[0]):.2f} decades, need {MIN_FIT_DECADES}")
    if np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise ValueError("values must be positive and finite for a log-log fit")
    se = None
    if stderrs is not None:
        se = np.asarray(stderrs, dtype=float)
        noisy = [int(t) for t, v, s in zip(h, y, se) if np.isfinite(s) and s > 0.5 * v]
        if noisy:
            raise NoisyEstimateError(f"{quantity or 'estimate'}: standard error above half the value at T = {noisy}")

    result = stats.linregress(np.log(h), np.log(y))
    fit = RateFit(
        horizons=[int(t) for t in h],
        values=[float(v) for v in y],
        stderrs=None if se is None else [float(s) for s in se],
        slope=float(result.slope),
        slope_stderr=float(result.stderr),
        intercept=float(result.intercept),
        quantity=quantity,
        theoretical_exponent=None if exponents is None else exponents.dominant,
        dominant_term=None if exponents is None else exponents.dominant_term,
    )
    logger.info(
        f"Rate fit {quantity}: slope {fit.slope:.4f} ± {fit.slope_stderr:.4f} "
        f"(dominant theoretical exponent {fit.theoretical_exponent})"
    )
    return fit


@dataclass
class TrackingResult:
    """
    Seed-mean critic and target tracking errors.

    Attributes:
        curves: Per recorded t, mean and stderr of ‖ω_t − ω̄*(θ_t)‖², ‖ω̄_t − ω̄*(θ_t)‖² and the
            running average (1/(t+1))Σ‖ω_k − ω̄*(θ_k)‖²
        terminal_error: Seed-mean of ‖ω_T − ω̄*(θ_T)‖
        mean_iterate_error: ‖mean over seeds of ω_T − ω̄*(θ₀)‖ (frozen actor only)
    """

    curves: pd.DataFrame
    n_seeds: int
    failed_seeds: int
    terminal_error: float
    mean_iterate_error: Optional[float]
    dyadic: pd.DataFrame = field(default_factory=pd.DataFrame)

    @property
    def dyadic_nonincreasing(self) -> bool:
        values = self.dyadic["avg_critic_error_mean"].to_numpy()
        return bool(np.all(np.diff(values) <= 0))


def critic_tracking_experiment(config: ExperimentConfig) -> TrackingResult:
    """
    E‖ω_t − ω̄*(θ_t)‖² and E‖ω̄_t − ω̄*(θ_t)‖² as seed means.

    Dyadic steps 1, 2, 4, ... are always recorded in addition to the stride grid.
    """
    checkpoints = dyadic_checkpoints(config.horizon)
    results = run_seeds([config.run_config(r, checkpoints=checkpoints) for r in range(config.n_seeds)], config.jobs)
    curves = seed_mean(results, ["critic_error_sq", "target_error_sq", "avg_critic_error"])
    kept = [r for r in results if not r.aborted]

    terminal = float(np.mean([np.sqrt(r.metrics["critic_error_sq"].iloc[-1]) for r in kept])) if kept else float("nan")
    mean_iterate_error = None
    if config.schedule.c1 == 0 and kept:
        inst = config.instance
        star = OracleCache(inst.mdp, inst.policy_features, inst.features).report(inst.theta0()).bar_omega_star
        mean_omega = np.mean([r.final_state.omega for r in kept], axis=0)
        mean_iterate_error = float(np.linalg.norm(mean_omega - star))

    dyadic = curves[curves["t"].isin(checkpoints)].reset_index(drop=True)
    logger.info(
        f"Critic tracking: {len(kept)}/{len(results)} seed(s), terminal error {terminal:.4g}, "
        f"mean-iterate error {mean_iterate_error}"
    )
    return TrackingResult(
        curves=curves,
        n_seeds=len(results),
        failed_seeds=failed_seed_count(results),
        terminal_error=terminal,
        mean_iterate_error=mean_iterate_error,
        dyadic=dyadic,
    )


@dataclass
class SweepResult:
    """Averaged quantities per horizon with their slope fits."""

    table: pd.DataFrame
    fits: Dict[str, RateFit]
    refused: Dict[str, str]
    sample_complexity: float
    epsilon: float
    n_seeds: int
    failed_seeds: int

    def to_dict(self) -> Dict[str, object]:
        return {
            "fits": {k: v.to_dict() for k, v in self.fits.items()},
            "refused": dict(self.refused),
            "epsilon": self.epsilon,
            "sample_complexity": self.sample_complexity,
            "n_seeds": self.n_seeds,
            "failed_seeds": self.failed_seeds,
        }


def rate_sweep(config: ExperimentConfig) -> SweepResult:
    """
    Averaged critic error (and gradient norm when the actor moves) at each horizon, then
    log-log slope fits.

    One run per seed reaches the largest horizon; the smaller horizons are checkpoints of
    the same run, since a run truncated at T is a prefix of a longer one.
    """
    horizons = sorted(config.horizons)
    if len(horizons) < MIN_FIT_HORIZONS:
        raise ValueError(f"rate sweep needs at least {MIN_FIT_HORIZONS} horizons")
    configs = [config.run_config(r, horizon=horizons[-1], checkpoints=horizons) for r in range(config.n_seeds)]
    results = run_seeds(configs, config.jobs)
    curves = seed_mean(results, ["avg_critic_error", "avg_grad_norm_sq"])
    table = curves[curves["t"].isin(horizons)].rename(columns={"t": "T"}).reset_index(drop=True)

    fits: Dict[str, RateFit] = {}
    refused: Dict[str, str] = {}
    quantities = {"avg_critic_error": critic_rate_exponents(config.schedule)}
    if config.schedule.c1 > 0:
        quantities["avg_grad_norm_sq"] = actor_rate_exponents(config.schedule)
    n_kept = len(results) - failed_seed_count(results)
    for quantity, exponents in quantities.items():
        stderrs = table[f"{quantity}_stderr"] if n_kept > 1 else None
        try:
            fits[quantity] = fit_rate(table["T"], table[f"{quantity}_mean"], stderrs, quantity, exponents)
        except (NoisyEstimateError, ValueError) as e:
            logger.warning(f"Refused fit for {quantity}: {e}")
            refused[quantity] = str(e)

    return SweepResult(
        table=table,
        fits=fits,
        refused=refused,
        sample_complexity=sample_complexity(config.epsilon),
        epsilon=config.epsilon,
        n_seeds=len(results),
        failed_seeds=failed_seed_count(results),
    )


@dataclass
class StationarityResult:
    """
    Gradient-norm curve of the actor.

    Attributes:
        curves: Per t, seed-mean and stderr of ‖∇J(θ_t)‖², ‖b(θ_t)‖, ‖∇J‖ − ‖b‖ and
            ‖∇J‖² − ‖b‖², plus the running minimum of the mean ‖∇J‖²
        crossed: min_t of the mean ‖∇J‖² − ‖b‖² is at most epsilon
    """

    curves: pd.DataFrame
    initial_grad_norm_sq: float
    min_grad_norm_sq: float
    min_gradient_gap: float
    crossed: bool
    epsilon: float
    n_seeds: int
    failed_seeds: int


def _add_gradient_gaps(result: RunResult) -> RunResult:
    grad_norm = np.sqrt(result.metrics["grad_norm_sq"])
    result.metrics["gradient_gap"] = grad_norm - result.metrics["bias_norm"]
    result.metrics["gradient_gap_sq"] = result.metrics["grad_norm_sq"] - result.metrics["bias_norm"] ** 2
    return result


def actor_stationarity_experiment(config: ExperimentConfig) -> StationarityResult:
    """E‖∇J(θ_t)‖² with exact ∇J and b(θ_t) at every recorded t, and its running minimum."""
    results = run_seeds([config.run_config(r) for r in range(config.n_seeds)], config.jobs)
    results = [_add_gradient_gaps(r) for r in results]
    curves = seed_mean(results, ["grad_norm_sq", "bias_norm", "gradient_gap", "gradient_gap_sq", "J"])
    curves["grad_norm_sq_running_min"] = curves["grad_norm_sq_mean"].cummin()

    if curves.empty:
        nan = float("nan")
        return StationarityResult(curves, nan, nan, nan, False, config.epsilon, len(results), failed_seed_count(results))
    min_gap_sq = float(curves["gradient_gap_sq_mean"].min())
    result = StationarityResult(
        curves=curves,
        initial_grad_norm_sq=float(curves["grad_norm_sq_mean"].iloc[0]),
        min_grad_norm_sq=float(curves["grad_norm_sq_mean"].min()),
        min_gradient_gap=float(curves["gradient_gap_mean"].min()),
        crossed=min_gap_sq <= config.epsilon,
        epsilon=config.epsilon,
        n_seeds=len(results),
        failed_seeds=failed_seed_count(results),
    )
    logger.info(
        f"Actor stationarity: ‖∇J‖² from {result.initial_grad_norm_sq:.4g} to min {result.min_grad_norm_sq:.4g}; "
        f"min ‖∇J‖ − ‖b‖ = {result.min_gradient_gap:.4g}"
    )
    return result
