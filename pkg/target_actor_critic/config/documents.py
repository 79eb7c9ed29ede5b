"""
Run-configuration documents.

A run document is a YAML (or JSON) mapping with a mandatory `schema_version: 1`.
Unknown keys are rejected so that a manifest always describes exactly what ran.

Example:
    schema_version: 1
    kind: critic-eval
    mdp: default-garnet
    policy_features: tabular
    critic_features: tabular
    schedule: {c1: 0.0, c2: 0.5, c3: 0.5, a_exp: 0.6667, xi_exp: 0.5, b_exp: 0.3333}
    horizon: 200000
    seeds: 20
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from target_actor_critic.errors import InvalidConfigError
from target_actor_critic.schedules import PowerSchedule, schedule_from_document
from target_actor_critic.storage import load_document

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

EXPERIMENT_KINDS = ("critic-eval", "full-actor-critic", "rate-sweep", "assumption-audit")
ACTOR_TD_MODES = ("classic", "target")

METRIC_NAMES = (
    "critic_error_sq",
    "target_error_sq",
    "grad_norm_sq",
    "J",
    "bellman_residual",
    "eps_fa",
    "bias_norm",
)

BUILTIN_MDPS = ("default-garnet", "two-cycle", "two-state")

RUN_KEYS = {
    "schema_version",
    "kind",
    "mdp",
    "policy_features",
    "critic_features",
    "schedule",
    "horizon",
    "horizons",
    "seed",
    "seeds",
    "snapshot_stride",
    "oracle_stride",
    "actor_td",
    "stabilizer_c0",
    "hard_sync_every",
    "metrics",
    "epsilon",
    "theta_samples",
    "warm_start",
    "jobs",
}


@dataclass
class RunDocument:
    """
    Parsed run configuration.

    Sources (`mdp`, `policy_features`, `critic_features`) stay symbolic here: a built-in
    name, a generator mapping or a path resolved against `base_dir`.
    """

    mdp: Union[str, Dict[str, Any]] = "default-garnet"
    policy_features: Union[str, Dict[str, Any]] = "tabular"
    critic_features: Union[str, Dict[str, Any]] = "tabular"
    schedule: PowerSchedule = field(default_factory=PowerSchedule)
    kind: str = "full-actor-critic"
    horizon: int = 10_000
    horizons: List[int] = field(default_factory=list)
    seed: int = 0
    seeds: int = 1
    snapshot_stride: int = 100
    oracle_stride: int = 100
    actor_td: str = "classic"
    stabilizer_c0: Optional[float] = None
    hard_sync_every: Optional[int] = None
    metrics: List[str] = field(default_factory=lambda: list(METRIC_NAMES))
    epsilon: float = 0.01
    theta_samples: int = 20
    warm_start: bool = False
    jobs: Optional[int] = None
    base_dir: Path = field(default_factory=Path.cwd)
    raw: Dict[str, Any] = field(default_factory=dict)

    def resolve_path(self, source: str) -> Path:
        path = Path(source)
        return path if path.is_absolute() else self.base_dir / path

    def validate(self) -> List[str]:
        """Return the list of problems; empty when the document is usable."""
        problems = [f"schedule: {p}" for p in self.schedule.validate()]
        if self.kind not in EXPERIMENT_KINDS:
            problems.append(f"kind {self.kind!r} is not one of {', '.join(EXPERIMENT_KINDS)}")
        if self.actor_td not in ACTOR_TD_MODES:
            problems.append(f"actor_td {self.actor_td!r} is not one of {', '.join(ACTOR_TD_MODES)}")
        if self.horizon < 0:
            problems.append("horizon must be nonnegative")
        if self.seeds < 1:
            problems.append("seeds must be at least 1")
        for name in ("snapshot_stride", "oracle_stride", "theta_samples"):
            if getattr(self, name) < 1:
                problems.append(f"{name} must be at least 1")
        if self.stabilizer_c0 is not None and not self.stabilizer_c0 > 0:
            problems.append("stabilizer_c0 must be positive")
        if self.hard_sync_every is not None and self.hard_sync_every < 1:
            problems.append("hard_sync_every must be at least 1")
        if not 0.0 < self.epsilon < 1.0:
            problems.append("epsilon must lie in (0, 1)")
        unknown_metrics = [m for m in self.metrics if m not in METRIC_NAMES]
        if unknown_metrics:
            problems.append(f"unknown metrics: {', '.join(unknown_metrics)}")
        if self.horizons:
            if any(b <= a for a, b in zip(self.horizons, self.horizons[1:])):
                problems.append("horizons must be strictly increasing")
            if self.horizons[0] < 1:
                problems.append("horizons must be positive")
        if self.kind == "rate-sweep" and len(self.horizons) < 3:
            problems.append("rate-sweep needs at least 3 horizons")
        if self.jobs is not None and self.jobs < 0:
            problems.append("jobs must be nonnegative")
        return problems

    def to_document(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "mdp": self.mdp,
            "policy_features": self.policy_features,
            "critic_features": self.critic_features,
            "schedule": self.schedule.to_document(),
            "horizon": self.horizon,
            "seed": self.seed,
            "seeds": self.seeds,
            "snapshot_stride": self.snapshot_stride,
            "oracle_stride": self.oracle_stride,
            "actor_td": self.actor_td,
            "metrics": list(self.metrics),
            "epsilon": self.epsilon,
            "theta_samples": self.theta_samples,
            "warm_start": self.warm_start,
        }
        if self.horizons:
            doc["horizons"] = list(self.horizons)
        if self.stabilizer_c0 is not None:
            doc["stabilizer_c0"] = self.stabilizer_c0
        if self.hard_sync_every is not None:
            doc["hard_sync_every"] = self.hard_sync_every
        return doc


def _source(value: Any, key: str) -> Union[str, Dict[str, Any]]:
    if isinstance(value, (str, dict)):
        return value
    raise InvalidConfigError(f"{key} must be a name, a path or a mapping, got {type(value).__name__}", [key])


def parse_run_document(document: Dict[str, Any], base_dir: Optional[Path] = None) -> RunDocument:
    """
    Build a RunDocument from a mapping.

    Args:
        document: Parsed YAML/JSON mapping
        base_dir: Directory relative source paths are resolved against

    Returns:
        RunDocument

    Raises:
        InvalidConfigError: On a missing or wrong schema_version, unknown keys or invalid values
    """
    version = document.get("schema_version")
    if version is None:
        raise InvalidConfigError("run document is missing schema_version", ["schema_version"])
    if int(version) != SCHEMA_VERSION:
        raise InvalidConfigError(f"unsupported schema_version {version}", ["schema_version"])
    unknown = sorted(set(document) - RUN_KEYS)
    if unknown:
        raise InvalidConfigError(f"Unknown run-document keys: {', '.join(unknown)}", unknown)

    values: Dict[str, Any] = {}
    for key in ("mdp", "policy_features", "critic_features"):
        if key in document:
            values[key] = _source(document[key], key)
    if "schedule" in document:
        values["schedule"] = schedule_from_document(document["schedule"])
    for key in ("horizon", "seed", "seeds", "snapshot_stride", "oracle_stride", "theta_samples"):
        if key in document:
            values[key] = int(document[key])
    for key in ("kind", "actor_td"):
        if key in document:
            values[key] = str(document[key])
    if "horizons" in document:
        values["horizons"] = [int(h) for h in document["horizons"]]
    if "metrics" in document:
        values["metrics"] = [str(m) for m in document["metrics"]]
    if document.get("stabilizer_c0") is not None:
        values["stabilizer_c0"] = float(document["stabilizer_c0"])
    if document.get("hard_sync_every") is not None:
        values["hard_sync_every"] = int(document["hard_sync_every"])
    if document.get("jobs") is not None:
        values["jobs"] = int(document["jobs"])
    if "epsilon" in document:
        values["epsilon"] = float(document["epsilon"])
    if "warm_start" in document:
        values["warm_start"] = bool(document["warm_start"])

    run = RunDocument(**values, base_dir=base_dir or Path.cwd(), raw=dict(document))
    problems = run.validate()
    if problems:
        raise InvalidConfigError("Invalid run document: " + "; ".join(problems))
    return run


def load_run_document(path: Union[str, Path]) -> RunDocument:
    """Read and parse a run document; relative sources resolve against its directory."""
    path = Path(path)
    run = parse_run_document(load_document(path), base_dir=path.parent.resolve())
    logger.info(f"Loaded run document {path} ({run.kind}, T = {run.horizon}, {run.seeds} seed(s))")
    return run
