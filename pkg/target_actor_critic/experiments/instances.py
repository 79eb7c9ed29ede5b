"""Built-in desk-scale instances and resolution of document sources into objects."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from target_actor_critic.errors import InvalidConfigError
from target_actor_critic.features import (
    CriticFeatures,
    deficient_features,
    load_features,
    random_orthonormal_features,
    tabular_features,
)
from target_actor_critic.mdp import FiniteMdp, garnet, load_mdp, make_rng, two_cycle, two_state_example
from target_actor_critic.policy import load_policy_features, policy_features_to_document, tabular_policy_features
from target_actor_critic.storage import content_hash, document_hash

logger = logging.getLogger(__name__)

DEFAULT_GARNET = {"n_states": 5, "n_actions": 3, "branching": 2, "discount": 0.9, "seed": 0}
GARNET_KEYS = {"n_states", "n_actions", "branching", "discount", "seed", "reward_noise_halfwidth"}

Source = Union[str, Dict[str, Any]]


@dataclass(eq=False)
class Instance:
    """
    An environment with its policy features and critic features.

    Attributes:
        name: Short label used in logs and manifests
        inputs: sha256 per input (file contents for paths, canonical document otherwise)
    """

    mdp: FiniteMdp
    policy_features: np.ndarray
    features: CriticFeatures
    name: str = "instance"
    inputs: Dict[str, str] = field(default_factory=dict)

    def theta0(self) -> np.ndarray:
        return np.zeros(self.policy_features.shape[2])

    def sample_thetas(self, n_draws: int, seed: int = 0, scale: float = 1.0) -> np.ndarray:
        """θ = 0 followed by n_draws Gaussian draws, one per row."""
        rng = make_rng(seed)
        draws = scale * rng.standard_normal((n_draws, self.policy_features.shape[2]))
        return np.vstack([self.theta0()[None, :], draws])


def garnet_from_spec(spec: Dict[str, Any]) -> FiniteMdp:
    unknown = sorted(set(spec) - GARNET_KEYS)
    if unknown:
        raise InvalidConfigError(f"Unknown garnet keys: {', '.join(unknown)}", unknown)
    values = {**DEFAULT_GARNET, **spec}
    return garnet(
        int(values["n_states"]),
        int(values["n_actions"]),
        int(values["branching"]),
        float(values["discount"]),
        make_rng(int(values["seed"])),
        float(values.get("reward_noise_halfwidth", 0.0)),
    )


def build_mdp(source: Source, base_dir: Optional[Path] = None) -> FiniteMdp:
    """
    Resolve an MDP source.

    Args:
        source: 'default-garnet', 'two-cycle', 'two-state', {'garnet': {...}} or a file path
        base_dir: Directory relative paths resolve against
    """
    if isinstance(source, dict):
        if set(source) != {"garnet"}:
            raise InvalidConfigError(f"MDP mapping must be {{garnet: ...}}, got keys {sorted(source)}")
        return garnet_from_spec(source["garnet"] or {})
    builtins = {
        "default-garnet": lambda: garnet_from_spec({}),
        "two-cycle": two_cycle,
        "two-state": two_state_example,
    }
    if source in builtins:
        return builtins[source]()
    return load_mdp(_path(source, base_dir))


def build_policy_features(source: Source, mdp: FiniteMdp, base_dir: Optional[Path] = None) -> np.ndarray:
    if source == "tabular":
        return tabular_policy_features(mdp.n_states, mdp.n_actions)
    if isinstance(source, dict):
        raise InvalidConfigError(f"policy_features must be 'tabular' or a path, got {source}")
    features = load_policy_features(_path(source, base_dir))
    if features.shape[:2] != (mdp.n_states, mdp.n_actions):
        raise InvalidConfigError(
            f"policy features are for {features.shape[:2]} (states, actions), MDP has "
            f"({mdp.n_states}, {mdp.n_actions})"
        )
    return features


def build_critic_features(source: Source, mdp: FiniteMdp, base_dir: Optional[Path] = None) -> CriticFeatures:
    """
    Resolve a critic-feature source.

    Args:
        source: 'tabular', 'deficient', {'deficient': m}, {'random': {'m': m, 'seed': s}}
            or a file path
    """
    n = mdp.n_states
    if source == "tabular":
        return tabular_features(n)
    if source == "deficient":
        return deficient_features(n)
    if isinstance(source, dict):
        if set(source) == {"deficient"}:
            return deficient_features(n, int(source["deficient"]))
        if set(source) == {"random"}:
            spec = source["random"] or {}
            return random_orthonormal_features(n, int(spec["m"]), make_rng(int(spec.get("seed", 0))))
        raise InvalidConfigError(f"Unknown critic-feature mapping {sorted(source)}")
    features = load_features(_path(source, base_dir))
    if features.n_states != n:
        raise InvalidConfigError(f"critic features have {features.n_states} rows, MDP has {n} states")
    return features


def _path(source: str, base_dir: Optional[Path]) -> Path:
    path = Path(source)
    if not path.is_absolute() and base_dir is not None:
        path = base_dir / path
    if not path.exists():
        raise FileNotFoundError(f"Input file not found: {path}")
    return path


def _input_hash(source: Source, built_document: Dict[str, Any], base_dir: Optional[Path]) -> str:
    if isinstance(source, str) and Path(source).suffix:
        return content_hash(_path(source, base_dir))
    return document_hash(built_document)


def resolve_instance(
    mdp_source: Source,
    policy_source: Source = "tabular",
    critic_source: Source = "tabular",
    base_dir: Optional[Path] = None,
) -> Instance:
    """Build an Instance and hash each of its inputs."""
    mdp = build_mdp(mdp_source, base_dir)
    policy_features = build_policy_features(policy_source, mdp, base_dir)
    features = build_critic_features(critic_source, mdp, base_dir)
    inputs = {
        "mdp": _input_hash(mdp_source, mdp.to_document(), base_dir),
        "policy_features": _input_hash(policy_source, policy_features_to_document(policy_features), base_dir),
        "critic_features": _input_hash(critic_source, features.to_document(), base_dir),
    }
    if isinstance(mdp_source, dict):
        name = "garnet"
    else:
        name = Path(mdp_source).stem if Path(mdp_source).suffix else mdp_source
    logger.info(f"Resolved instance {name}: n = {mdp.n_states}, |A| = {mdp.n_actions}, m = {features.m}")
    return Instance(mdp, policy_features, features, name=name, inputs=inputs)


def default_instance() -> Instance:
    """Garnet with 5 states, 3 actions, branching 2, γ = 0.9; tabular policy and critic."""
    return resolve_instance("default-garnet", "tabular", "tabular")


def deficient_instance(m: int = 2) -> Instance:
    """The default Garnet with an m-column deficient critic span (ε_FA > 0, b(θ) ≠ 0)."""
    inst = resolve_instance("default-garnet", "tabular", {"deficient": m})
    inst.name = f"default-garnet-deficient-{m}"
    return inst
