"""Finite MDPs: representation, validation and the two sampling kernels."""

from target_actor_critic.mdp.finite import (
    FiniteMdp,
    Violation,
    artificial_kernel,
    load_mdp,
    mdp_from_document,
    validate,
)
from target_actor_critic.mdp.instances import garnet, two_cycle, two_state_example
from target_actor_critic.mdp.sampling import (
    ChainState,
    EnvStep,
    initial_chain,
    inverse_cdf,
    make_rng,
    sample_categorical,
    sample_env_step,
)

__all__ = [
    "FiniteMdp",
    "Violation",
    "artificial_kernel",
    "load_mdp",
    "mdp_from_document",
    "validate",
    "garnet",
    "two_cycle",
    "two_state_example",
    "ChainState",
    "EnvStep",
    "initial_chain",
    "inverse_cdf",
    "make_rng",
    "sample_categorical",
    "sample_env_step",
]
