"""Critic features Φ."""

from target_actor_critic.features.critic import (
    CriticFeatures,
    RankReport,
    deficient_features,
    features_from_document,
    load_features,
    random_orthonormal_features,
    set_rank_tol,
    tabular_features,
)

__all__ = [
    "CriticFeatures",
    "RankReport",
    "deficient_features",
    "features_from_document",
    "load_features",
    "random_orthonormal_features",
    "set_rank_tol",
    "tabular_features",
]
