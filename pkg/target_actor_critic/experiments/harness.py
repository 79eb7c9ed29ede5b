"""Seed fan-out over a worker pool and the seed-mean reduction."""

import logging
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from target_actor_critic.algorithm import LearnerOptions, RunConfig, RunResult, batch_compatible, run_batch
from target_actor_critic.config import RunDocument
from target_actor_critic.experiments.instances import Instance, resolve_instance
from target_actor_critic.schedules import PowerSchedule, zero_actor

logger = logging.getLogger(__name__)

# Replicates advanced together in one process
REPLICATES_PER_BATCH = 32


@dataclass
class ExperimentConfig:
    """
    A Monte-Carlo study over n_seeds independent replicates.

    Attributes:
        instance: Environment and features
        kind: critic-eval | full-actor-critic | rate-sweep | assumption-audit
        seed: Base seed; replicate r uses the stream of seed + r
        oracle_stride: Steps between fresh ω̄*(θ_t) solves
        jobs: Worker processes (1 runs in-process)
    """

    instance: Instance
    schedule: PowerSchedule
    horizon: int
    n_seeds: int = 1
    seed: int = 0
    snapshot_stride: int = 100
    oracle_stride: int = 100
    kind: str = "full-actor-critic"
    options: LearnerOptions = field(default_factory=LearnerOptions)
    horizons: List[int] = field(default_factory=list)
    epsilon: float = 0.01
    theta_samples: int = 20
    warm_start: bool = False
    jobs: int = 1

    def __post_init__(self):
        if self.n_seeds < 1:
            raise ValueError(f"n_seeds must be at least 1, got {self.n_seeds}")
        if self.snapshot_stride < 1 or self.oracle_stride < 1:
            raise ValueError("strides must be at least 1")

    def run_config(self, replicate: int, horizon: Optional[int] = None, checkpoints: Sequence[int] = ()) -> RunConfig:
        inst = self.instance
        return RunConfig(
            mdp=inst.mdp,
            policy_features=inst.policy_features,
            features=inst.features,
            schedule=self.schedule,
            horizon=self.horizon if horizon is None else horizon,
            seed=self.seed,
            replicate=replicate,
            snapshot_stride=self.snapshot_stride,
            oracle_stride=self.oracle_stride,
            options=self.options,
            checkpoints=tuple(checkpoints),
            warm_start=self.warm_start,
        )


def experiment_config(document: RunDocument, jobs: Optional[int] = None) -> ExperimentConfig:
    """Resolve a run document's sources and build the study configuration."""
    instance = resolve_instance(
        document.mdp, document.policy_features, document.critic_features, document.base_dir
    )
    # critic-eval freezes the actor at θ₀
    schedule = zero_actor(document.schedule) if document.kind == "critic-eval" else document.schedule
    return ExperimentConfig(
        instance=instance,
        schedule=schedule,
        horizon=document.horizon,
        n_seeds=document.seeds,
        seed=document.seed,
        snapshot_stride=document.snapshot_stride,
        oracle_stride=document.oracle_stride,
        kind=document.kind,
        options=LearnerOptions(document.actor_td, document.stabilizer_c0, document.hard_sync_every),
        horizons=list(document.horizons),
        epsilon=document.epsilon,
        theta_samples=document.theta_samples,
        warm_start=document.warm_start,
        jobs=resolve_jobs(jobs if jobs is not None else document.jobs),
    )


def resolve_jobs(jobs: Optional[int]) -> int:
    """None or 0 means the available parallelism."""
    if not jobs:
        return os.cpu_count() or 1
    return int(jobs)


def seed_batches(configs: Sequence[RunConfig], size: int = REPLICATES_PER_BATCH) -> List[List[RunConfig]]:
    """
    Group replicates, in replicate order, into lockstep batches of at most `size`.

    Batches depend only on the configs, never on the worker count.
    """
    batches: List[List[RunConfig]] = []
    for config in sorted(configs, key=lambda c: c.replicate):
        if batches and len(batches[-1]) < size and batch_compatible(batches[-1][0], config):
            batches[-1].append(config)
        else:
            batches.append([config])
    return batches


def run_seeds(configs: Sequence[RunConfig], jobs: int = 1) -> List[RunResult]:
    """
    Run independent replicates as lockstep batches, batches in parallel when jobs > 1.

    Args:
        configs: One RunConfig per replicate
        jobs: Maximum worker processes

    Returns:
        List of RunResult sorted by replicate
    """
    batches = seed_batches(configs)
    results: List[RunResult] = []
    if jobs <= 1 or len(batches) <= 1:
        for batch in batches:
            results.extend(run_batch(batch))
    else:
        workers = min(jobs, len(batches))
        logger.info(f"Fanning out {len(configs)} replicate(s) in {len(batches)} batch(es) over {workers} worker(s)")
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(run_batch, batch) for batch in batches]
            for future in as_completed(futures):
                results.extend(future.result())
    failed = sum(r.aborted for r in results)
    if failed:
        logger.warning(f"{failed} of {len(results)} replicate(s) aborted")
    return sorted(results, key=lambda r: r.replicate)


def seed_mean(results: Sequence[RunResult], columns: Sequence[str]) -> pd.DataFrame:
    """
    Seed-mean and standard error per recorded step.

    Aborted replicates are left out. Replicates are reduced in replicate order, so the
    output does not depend on the order of `results`. Only steps recorded by every
    kept replicate appear.

    Returns:
        DataFrame with t, n_seeds and <column>_mean, <column>_stderr per column
    """
    kept = sorted((r for r in results if not r.aborted), key=lambda r: r.replicate)
    if not kept:
        return pd.DataFrame(columns=["t", "n_seeds"] + [f"{c}_{s}" for c in columns for s in ("mean", "stderr")])
    common = set(kept[0].metrics["t"])
    for r in kept[1:]:
        common &= set(r.metrics["t"])
    steps = sorted(common)

    out: Dict[str, object] = {"t": steps, "n_seeds": [len(kept)] * len(steps)}
    for column in columns:
        stacked = np.vstack([r.metrics.set_index("t").loc[steps, column].to_numpy(dtype=float) for r in kept])
        out[f"{column}_mean"] = stacked.mean(axis=0)
        if len(kept) > 1:
            out[f"{column}_stderr"] = stats.sem(stacked, axis=0)
        else:
            out[f"{column}_stderr"] = np.full(len(steps), np.nan)
    return pd.DataFrame(out)


def failed_seed_count(results: Sequence[RunResult]) -> int:
    return int(sum(r.aborted for r in results))
