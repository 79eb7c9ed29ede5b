"""Step-size schedules, step-size condition checks and the mixing-time diagnostic."""

from target_actor_critic.schedules.assumptions import (
    Condition,
    RateExponents,
    StepsizeReport,
    actor_rate_exponents,
    check_stepsizes,
    critic_rate_exponents,
    sample_complexity,
)
from target_actor_critic.schedules.mixing import (
    MixingFit,
    estimate_mixing_constants,
    mixing_time,
    second_eigenvalue_modulus,
    tv_decay,
)
from target_actor_critic.schedules.power import (
    PowerSchedule,
    Rates,
    finite_time_schedule,
    schedule_from_document,
    zero_actor,
)

__all__ = [
    "Condition",
    "RateExponents",
    "StepsizeReport",
    "actor_rate_exponents",
    "check_stepsizes",
    "critic_rate_exponents",
    "sample_complexity",
    "MixingFit",
    "estimate_mixing_constants",
    "mixing_time",
    "second_eigenvalue_modulus",
    "tv_decay",
    "PowerSchedule",
    "Rates",
    "finite_time_schedule",
    "schedule_from_document",
    "zero_actor",
]
