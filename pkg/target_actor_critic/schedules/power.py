"""Power-law step-size schedules α_t, β_t, ξ_t."""

from dataclasses import asdict, dataclass
from typing import Any, Dict, List, NamedTuple

import numpy as np

from target_actor_critic.errors import InvalidConfigError

SCHEDULE_KEYS = {"c1", "c2", "c3", "a_exp", "xi_exp", "b_exp", "finite_time"}


class Rates(NamedTuple):
    alpha: float
    beta: float
    xi: float


@dataclass(frozen=True)
class PowerSchedule:
    """
    α_t = c1/(1+t)^a_exp, ξ_t = c2/(1+t)^xi_exp, β_t = c3/(1+t)^b_exp.

    Attributes:
        c1, c2, c3: Positive scales of the actor, target and critic steps
        a_exp, xi_exp, b_exp: Decay exponents of α, ξ, β
        finite_time: Require 0 < b_exp < xi_exp < a_exp < 1
    """

    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    a_exp: float = 2.0 / 3.0
    xi_exp: float = 0.5
    b_exp: float = 1.0 / 3.0
    finite_time: bool = False

    def rates_at(self, t: int) -> Rates:
        base = 1.0 + t
        return Rates(
            alpha=self.c1 / base**self.a_exp,
            beta=self.c3 / base**self.b_exp,
            xi=self.c2 / base**self.xi_exp,
        )

    def rate_arrays(self, t: np.ndarray) -> Dict[str, np.ndarray]:
        base = 1.0 + np.asarray(t, dtype=float)
        return {
            "alpha": self.c1 / base**self.a_exp,
            "beta": self.c3 / base**self.b_exp,
            "xi": self.c2 / base**self.xi_exp,
        }

    def validate(self) -> List[str]:
        problems = []
        # c1 = 0 is policy-evaluation mode
        if not self.c1 >= 0:
            problems.append("c1 must be nonnegative")
        for name in ("c2", "c3"):
            if not getattr(self, name) > 0:
                problems.append(f"{name} must be positive")
        if self.c2 > 1.0:
            problems.append(f"c2 = {self.c2} > 1 allows ξ_t > 1")
        if self.finite_time and not 0.0 < self.b_exp < self.xi_exp < self.a_exp < 1.0:
            problems.append(
                f"finite-time mode needs 0 < b_exp < xi_exp < a_exp < 1, got "
                f"({self.b_exp}, {self.xi_exp}, {self.a_exp})"
            )
        for name in ("a_exp", "xi_exp", "b_exp"):
            if getattr(self, name) < 0:
                problems.append(f"{name} must be nonnegative for nonincreasing steps")
        return problems

    def scaled(self, c1: float, c2: float, c3: float) -> "PowerSchedule":
        return PowerSchedule(c1, c2, c3, self.a_exp, self.xi_exp, self.b_exp, self.finite_time)

    def to_document(self) -> Dict[str, Any]:
        return asdict(self)


def zero_actor(schedule: PowerSchedule) -> PowerSchedule:
    """Same critic and target steps with α_t ≡ 0 (policy-evaluation mode)."""
    return PowerSchedule(0.0, schedule.c2, schedule.c3, schedule.a_exp, schedule.xi_exp,
                         schedule.b_exp, False)


def finite_time_schedule(c1: float = 1.0, c2: float = 1.0, c3: float = 1.0) -> PowerSchedule:
    """Exponents (α, ξ, β) = (2/3, 1/2, 1/3)."""
    return PowerSchedule(c1, c2, c3, 2.0 / 3.0, 0.5, 1.0 / 3.0, True)


def schedule_from_document(document: Dict[str, Any]) -> PowerSchedule:
    unknown = sorted(set(document) - SCHEDULE_KEYS)
    if unknown:
        raise InvalidConfigError(f"Unknown schedule keys: {', '.join(unknown)}", unknown)
    values = {k: float(v) for k, v in document.items() if k != "finite_time"}
    return PowerSchedule(**values, finite_time=bool(document.get("finite_time", False)))
