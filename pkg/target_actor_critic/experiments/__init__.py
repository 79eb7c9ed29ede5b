"""Monte-Carlo harness: tracking curves, rate fits, stationarity and hypothesis audits."""

from target_actor_critic.experiments.audit import AuditItem, AuditReport, assumption_audit
from target_actor_critic.experiments.harness import (
    ExperimentConfig,
    experiment_config,
    failed_seed_count,
    resolve_jobs,
    run_seeds,
    seed_batches,
    seed_mean,
)
from target_actor_critic.experiments.instances import (
    Instance,
    build_critic_features,
    build_mdp,
    build_policy_features,
    default_instance,
    deficient_instance,
    resolve_instance,
)
from target_actor_critic.experiments.plotting import figure_to_svg, rate_figure
from target_actor_critic.experiments.studies import (
    RateFit,
    StationarityResult,
    SweepResult,
    TrackingResult,
    actor_stationarity_experiment,
    critic_tracking_experiment,
    dyadic_checkpoints,
    fit_rate,
    rate_sweep,
)

__all__ = [
    "AuditItem",
    "AuditReport",
    "assumption_audit",
    "ExperimentConfig",
    "experiment_config",
    "failed_seed_count",
    "resolve_jobs",
    "run_seeds",
    "seed_batches",
    "seed_mean",
    "Instance",
    "build_critic_features",
    "build_mdp",
    "build_policy_features",
    "default_instance",
    "deficient_instance",
    "resolve_instance",
    "figure_to_svg",
    "rate_figure",
    "RateFit",
    "StationarityResult",
    "SweepResult",
    "TrackingResult",
    "actor_stationarity_experiment",
    "critic_tracking_experiment",
    "dyadic_checkpoints",
    "fit_rate",
    "rate_sweep",
]
