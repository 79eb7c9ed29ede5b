"""Exception types shared across the lab."""

from typing import List, Optional


class InvalidMdpError(ValueError):
    """Raised when an MDP document or object fails validation."""

    def __init__(self, violations: List["object"], source: Optional[str] = None):
        self.violations = list(violations)
        self.source = source
        where = f" in {source}" if source else ""
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"Invalid MDP{where}: {lines}")


class InvalidConfigError(ValueError):
    """Raised for malformed configuration documents (unknown or missing keys)."""

    def __init__(self, message: str, keys: Optional[List[str]] = None):
        self.keys = list(keys or [])
        super().__init__(message)


class NumericalFault(ArithmeticError):
    """A linear solve or decomposition failed or produced non-finite values."""

    def __init__(self, message: str, condition: Optional[float] = None):
        self.condition = condition
        if condition is not None:
            message = f"{message} (condition estimate {condition:.3e})"
        super().__init__(message)


class NonUniqueStationaryError(NumericalFault):
    """The stationary system of a stochastic matrix is column-rank-deficient."""


class DivergenceError(RuntimeError):
    """A learner iterate became NaN or infinite."""

    def __init__(self, step: int, iterate: str):
        self.step = step
        self.iterate = iterate
        super().__init__(f"Non-finite {iterate} at step {step}")


class NoisyEstimateError(ValueError):
    """A rate fit was refused because Monte-Carlo noise dominates an estimate."""
