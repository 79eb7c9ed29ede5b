"""
Target Actor-Critic Lab
=======================

Three-timescale target-based actor-critic on finite MDPs with linear critic
features, paired with exact closed-form oracles.

Modules:
    - mdp: Finite MDPs, validation, the reset-mixture sampler
    - policy: Softmax policies and their score function
    - features: Critic feature matrices
    - oracle: Closed-form theory quantities at a fixed θ
    - algorithm: The online learner and its run driver
    - schedules: Step sizes, step-size conditions, mixing time
    - experiments: Seeded Monte-Carlo studies, rate fits, audits

Example usage:
    >>> from target_actor_critic.experiments import default_instance
    >>> from target_actor_critic.oracle import oracle_report
    >>> from target_actor_critic.policy import SoftmaxPolicy
    >>> inst = default_instance()
    >>> report = oracle_report(inst.mdp, SoftmaxPolicy(inst.policy_features, inst.theta0()), inst.features)
"""

__version__ = "0.1.0"
__author__ = "Target Actor-Critic Lab"

__all__ = ["__version__"]
