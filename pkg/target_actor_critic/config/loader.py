"""
Settings loader for the target actor-critic lab.

Loads process-level settings from:
1. Packaged defaults (defaults/lab-defaults.yaml)
2. A user YAML file (optional)
3. Runtime environment variables prefixed with TARGET_AC_ (highest priority)

Usage:
    from target_actor_critic.config import load_settings

    settings = load_settings("lab.yaml")
    jobs = settings.get_int("JOBS")
    lab = settings.to_lab_config()
"""

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

logger = logging.getLogger(__name__)

ENV_PREFIX = "TARGET_AC_"


@dataclass
class LabConfig:
    """Resolved process-level settings."""

    jobs: int = 1
    log_level: str = "INFO"
    output_dir: str = "results"
    float_format: str = "%.17g"
    condition_warning: float = 1e12
    rank_tol: float = 1e-9
    oracle_random_v: int = 100


class ConfigLoader:
    """
    Resolve lab settings from packaged defaults, a YAML file and the environment.

    Attributes:
        yaml_path: Optional user settings file
        _values: Settings loaded from YAML (defaults overlaid by the user file)
    """

    # Known settings and the LabConfig field each one feeds
    SETTINGS_MAP = {
        "JOBS": "jobs",
        "LOG_LEVEL": "log_level",
        "OUTPUT_DIR": "output_dir",
        "FLOAT_FORMAT": "float_format",
        "CONDITION_WARNING": "condition_warning",
        "RANK_TOL": "rank_tol",
        "ORACLE_RANDOM_V": "oracle_random_v",
    }

    def __init__(self, yaml_path: Optional[str] = None):
        """
        Initialize ConfigLoader.

        Args:
            yaml_path: Optional user settings file overriding the packaged defaults
        """
        self.yaml_path = Path(yaml_path) if yaml_path else None
        self._values: Dict[str, Any] = {}
        self._defaults_path = Path(__file__).parent / "defaults" / "lab-defaults.yaml"
        self._load_all()

    def _load_all(self) -> None:
        """Load packaged defaults, then the user file on top."""
        self._values.update(self._read_yaml(self._defaults_path))
        if self.yaml_path is not None:
            if not self.yaml_path.exists():
                logger.warning(f"Settings file not found: {self.yaml_path}; using defaults")
                return
            self._values.update(self._read_yaml(self.yaml_path))

    @staticmethod
    def _read_yaml(path: Path) -> Dict[str, Any]:
        """Read a flat YAML mapping, returning {} on a missing file."""
        if not path.exists():
            return {}
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            logger.error(f"Error loading settings YAML {path}: {e}")
            raise
        if not isinstance(data, dict):
            raise ValueError(f"Settings file {path} must hold a mapping")
        return {str(k).upper(): v for k, v in data.items()}

    def get(self, name: str, default: Optional[str] = None) -> Optional[str]:
        """
        Get a setting as a string.

        Priority (highest to lowest):
        1. Runtime environment variable (TARGET_AC_<NAME>)
        2. User YAML file
        3. Packaged defaults
        4. Default value

        Args:
            name: Setting name (case-insensitive)
            default: Value returned when the setting is absent

        Returns:
            Setting value or default
        """
        key = name.upper()
        env_key = f"{ENV_PREFIX}{key}"
        if env_key in os.environ:
            return os.environ[env_key]
        if key in self._values and self._values[key] is not None:
            value = self._values[key]
            return value if isinstance(value, str) else str(value)
        return default

    def get_int(self, name: str, default: Optional[int] = None) -> Optional[int]:
        """Get a setting as an integer; unparsable values fall back to default."""
        value = self.get(name)
        if value is None:
            return default
        try:
            return int(value)
        except ValueError as e:
            logger.warning(f"Failed to parse int for '{name}': {e}")
            return default

    def get_float(self, name: str, default: Optional[float] = None) -> Optional[float]:
        """Get a setting as a float; unparsable values fall back to default."""
        value = self.get(name)
        if value is None:
            return default
        try:
            return float(value)
        except ValueError as e:
            logger.warning(f"Failed to parse float for '{name}': {e}")
            return default

    def validate(self) -> tuple[bool, List[str]]:
        """
        Check for unknown settings and out-of-range values.

        Returns:
            Tuple of (is_valid, problems)
        """
        problems = [
            f"unknown setting {key}" for key in self._values if key not in self.SETTINGS_MAP
        ]
        jobs = self.get_int("JOBS")
        if jobs is None or jobs < 0:
            problems.append("JOBS must be a nonnegative integer (0 = available parallelism)")
        level = (self.get("LOG_LEVEL") or "").upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            problems.append(f"LOG_LEVEL {level!r} is not a logging level")
        rank_tol = self.get_float("RANK_TOL")
        if rank_tol is None or not 0 < rank_tol < 1:
            problems.append("RANK_TOL must lie in (0, 1)")
        return len(problems) == 0, problems

    def to_lab_config(self) -> LabConfig:
        """Build a LabConfig, resolving JOBS=0 to the available parallelism."""
        base = LabConfig()
        jobs = self.get_int("JOBS", base.jobs)
        if not jobs:
            jobs = os.cpu_count() or 1
        return LabConfig(
            jobs=jobs,
            log_level=(self.get("LOG_LEVEL", base.log_level) or base.log_level).upper(),
            output_dir=self.get("OUTPUT_DIR", base.output_dir) or base.output_dir,
            float_format=self.get("FLOAT_FORMAT", base.float_format) or base.float_format,
            condition_warning=self.get_float("CONDITION_WARNING", base.condition_warning),
            rank_tol=self.get_float("RANK_TOL", base.rank_tol),
            oracle_random_v=self.get_int("ORACLE_RANDOM_V", base.oracle_random_v),
        )

    def __repr__(self) -> str:
        """String representation."""
        return f"ConfigLoader(file={self.yaml_path}, settings_loaded={len(self._values)})"


def load_settings(yaml_path: Optional[str] = None) -> ConfigLoader:
    """
    Quick setup for settings loading.

    Args:
        yaml_path: Optional user settings file

    Returns:
        Configured ConfigLoader

    Example:
        from target_actor_critic.config import load_settings

        lab = load_settings().to_lab_config()
    """
    return ConfigLoader(yaml_path)
