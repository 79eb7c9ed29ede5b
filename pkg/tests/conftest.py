"""Shared fixtures: the shipped instances, small hand-checkable MDPs and document writers."""

from pathlib import Path
from typing import Any, Callable, Dict, List

import numpy as np
import pytest
import yaml

from target_actor_critic.experiments import Instance, default_instance, deficient_instance
from target_actor_critic.mdp import FiniteMdp, garnet, make_rng, two_state_example


@pytest.fixture
def default_inst() -> Instance:
    return default_instance()


@pytest.fixture
def deficient_inst() -> Instance:
    return deficient_instance()


@pytest.fixture
def two_state() -> FiniteMdp:
    return two_state_example()


@pytest.fixture
def random_garnets() -> List[FiniteMdp]:
    """Ten random 5-state, 3-action instances with γ = 0.9."""
    return [garnet(5, 3, 2, 0.9, make_rng(100 + k)) for k in range(10)]


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(1234)


@pytest.fixture
def write_document(tmp_path: Path) -> Callable[[str, Dict[str, Any]], Path]:
    """Write a mapping as YAML under tmp_path and return its path."""

    def _write(name: str, document: Dict[str, Any]) -> Path:
        path = tmp_path / name
        path.write_text(yaml.safe_dump(document, sort_keys=False), encoding="utf-8")
        return path

    return _write
