"""The online three-timescale target-based actor-critic and its run driver."""

from target_actor_critic.algorithm.learner import (
    Learner,
    LearnerOptions,
    LearnerState,
    StepRecord,
    Transition,
    initial_state,
    stabilized_actor_step,
    step,
)
from target_actor_critic.algorithm.run import (
    AVERAGE_COLUMNS,
    METRIC_COLUMNS,
    RunConfig,
    RunResult,
    batch_compatible,
    bellman_residual,
    run,
    run_batch,
    select_metrics,
)
from target_actor_critic.algorithm.updates import (
    gamma_scale,
    stabilizer_bounds,
    target_td_error,
    td_error,
)

__all__ = [
    "Learner",
    "LearnerOptions",
    "LearnerState",
    "StepRecord",
    "Transition",
    "initial_state",
    "stabilized_actor_step",
    "step",
    "AVERAGE_COLUMNS",
    "METRIC_COLUMNS",
    "RunConfig",
    "RunResult",
    "batch_compatible",
    "bellman_residual",
    "run",
    "run_batch",
    "select_metrics",
    "gamma_scale",
    "stabilizer_bounds",
    "target_td_error",
    "td_error",
]
