"""Analytic checks of a power schedule against the step-size hypotheses, and rate exponents."""

import math
from dataclasses import dataclass, field
from typing import Dict, List

from target_actor_critic.schedules.power import PowerSchedule

ASYMPTOTIC_PREFIXES = ("divergent_sum_", "square_summable_", "ratio_")


@dataclass(frozen=True)
class Condition:
    passed: bool
    detail: str


@dataclass
class StepsizeReport:
    """
    Verdicts for one schedule.

    The asymptotic regime needs every summability and ratio condition; the finite-time regime
    needs 0 < β < ξ < α < 1 and does not use square-summability. Both verdicts are
    reported side by side.
    """

    conditions: Dict[str, Condition] = field(default_factory=dict)
    regimes: List[str] = field(default_factory=list)
    horizon: int = 0
    ratios_at_horizon: Dict[str, float] = field(default_factory=dict)

    @property
    def asymptotic(self) -> bool:
        return all(c.passed for name, c in self.conditions.items() if name.startswith(ASYMPTOTIC_PREFIXES))

    @property
    def finite_time(self) -> bool:
        return self.conditions["finite_time_ordering"].passed

    def failed(self) -> List[str]:
        return [name for name, c in self.conditions.items() if not c.passed]

    def to_dict(self) -> Dict[str, object]:
        return {
            "conditions": {k: {"passed": v.passed, "detail": v.detail} for k, v in self.conditions.items()},
            "regimes": list(self.regimes),
            "asymptotic": self.asymptotic,
            "finite_time": self.finite_time,
            "horizon": self.horizon,
            "ratios_at_horizon": dict(self.ratios_at_horizon),
        }


def check_stepsizes(schedule: PowerSchedule, horizon: int = 10**6) -> StepsizeReport:
    """
    Decide each step-size condition from the exponents.

    Σ c/(1+t)^e diverges iff e <= 1; Σ c²/(1+t)^{2e} converges iff e > 1/2; the ratio of two
    power laws vanishes iff the numerator's exponent is larger.

    Args:
        schedule: Power-law schedule
        horizon: T at which the numeric ratios α_T/ξ_T and ξ_T/β_T are illustrated
    """
    report = StepsizeReport(horizon=horizon)
    cond = report.conditions
    steps = {
        "alpha": (schedule.c1, schedule.a_exp),
        "xi": (schedule.c2, schedule.xi_exp),
        "beta": (schedule.c3, schedule.b_exp),
    }
    for name, (scale, exp) in steps.items():
        diverges = scale > 0 and exp <= 1.0
        cond[f"divergent_sum_{name}"] = Condition(
            diverges, f"Σ{name}_t {'= +∞' if diverges else '< ∞'} (exponent {exp:.4g}, scale {scale:.4g})"
        )
        square = scale == 0 or exp > 0.5
        cond[f"square_summable_{name}"] = Condition(
            square, f"Σ{name}_t² {'< ∞' if square else '= +∞'} (exponent {exp:.4g} vs 1/2)"
        )
    actor_ratio = schedule.c1 == 0 or schedule.a_exp > schedule.xi_exp
    cond["ratio_alpha_xi"] = Condition(
        actor_ratio, f"α_t/ξ_t → 0 needs a_exp > xi_exp ({schedule.a_exp:.4g} vs {schedule.xi_exp:.4g})"
    )
    target_ratio = schedule.xi_exp > schedule.b_exp
    cond["ratio_xi_beta"] = Condition(
        target_ratio, f"ξ_t/β_t → 0 needs xi_exp > b_exp ({schedule.xi_exp:.4g} vs {schedule.b_exp:.4g})"
    )
    ordering = 0.0 < schedule.b_exp < schedule.xi_exp < schedule.a_exp < 1.0
    cond["finite_time_ordering"] = Condition(
        ordering, f"0 < β < ξ < α < 1 with (α, ξ, β) = ({schedule.a_exp:.4g}, {schedule.xi_exp:.4g}, {schedule.b_exp:.4g})"
    )
    monotone = min(schedule.a_exp, schedule.xi_exp, schedule.b_exp) >= 0.0
    cond["nonincreasing"] = Condition(monotone, "all exponents nonnegative")
    cond["xi_at_most_one"] = Condition(schedule.c2 <= 1.0, f"ξ_0 = c2 = {schedule.c2:.4g} <= 1")

    if report.asymptotic:
        report.regimes.append("asymptotic")
    if ordering:
        report.regimes.append("finite-time")
    if not report.regimes:
        report.regimes.append("none")

    rates = schedule.rates_at(horizon)
    report.ratios_at_horizon = {
        "alpha_over_xi": rates.alpha / rates.xi,
        "xi_over_beta": rates.xi / rates.beta,
    }
    return report


@dataclass(frozen=True)
class RateExponents:
    """Power-of-T exponents of the bound terms; the dominant one is the least negative."""

    terms: Dict[str, float]

    @property
    def dominant(self) -> float:
        return max(self.terms.values())

    @property
    def dominant_term(self) -> str:
        return max(self.terms, key=self.terms.get)


def critic_rate_exponents(schedule: PowerSchedule) -> RateExponents:
    """Terms 1/T^{1−ξ}, ln T/T^β, 1/T^{2(α−ξ)}, 1/T^{2(ξ−β)} (log factors dropped)."""
    a, x, b = schedule.a_exp, schedule.xi_exp, schedule.b_exp
    return RateExponents(
        {
            "target_averaging": -(1.0 - x),
            "critic_noise": -b,
            "actor_drift": -2.0 * (a - x),
            "target_lag": -2.0 * (x - b),
        }
    )


def actor_rate_exponents(schedule: PowerSchedule) -> RateExponents:
    """Terms 1/T^{1−α}, ln²T/T^α and the critic term; the ε_FA floor is constant in T."""
    critic = critic_rate_exponents(schedule)
    return RateExponents(
        {
            "actor_averaging": -(1.0 - schedule.a_exp),
            "actor_noise": -schedule.a_exp,
            "critic_tracking": critic.dominant,
        }
    )


def sample_complexity(epsilon: float) -> float:
    """ε^{-3} ln³(1/ε), the step count (up to constants) for an ε-stationary point."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    return epsilon**-3 * math.log(1.0 / epsilon) ** 3
