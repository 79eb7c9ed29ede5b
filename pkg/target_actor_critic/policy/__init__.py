"""Softmax policy family with exact score function."""

from target_actor_critic.policy.softmax import (
    SoftmaxPolicy,
    load_policy_features,
    policy_features_from_document,
    policy_features_to_document,
    tabular_policy_features,
)

__all__ = [
    "SoftmaxPolicy",
    "load_policy_features",
    "policy_features_from_document",
    "policy_features_to_document",
    "tabular_policy_features",
]
