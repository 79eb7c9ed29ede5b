import numpy as np
import pytest
from numpy.testing import assert_allclose

from target_actor_critic.errors import InvalidConfigError
from target_actor_critic.features import (
    CriticFeatures,
    critic,
    deficient_features,
    features_from_document,
    random_orthonormal_features,
    set_rank_tol,
    tabular_features,
)
from target_actor_critic.mdp import make_rng
from target_actor_critic.policy import (
    SoftmaxPolicy,
    policy_features_from_document,
    policy_features_to_document,
    tabular_policy_features,
)


def test_zero_theta_is_uniform():
    policy = SoftmaxPolicy(tabular_policy_features(4, 3), np.zeros(12))
    assert_allclose(policy.all_probs(), 1.0 / 3.0)


def test_large_logit_concentrates_mass():
    theta = np.zeros(12)
    theta[2 * 3 + 1] = 10.0
    policy = SoftmaxPolicy(tabular_policy_features(4, 3), theta)

    assert policy.action_probs(2)[1] >= 0.99
    assert_allclose(policy.action_probs(0), 1.0 / 3.0)


def test_softmax_is_stable_for_huge_logits():
    theta = np.zeros(6)
    theta[0] = 1e4
    policy = SoftmaxPolicy(tabular_policy_features(3, 2), theta)
    probs = policy.action_probs(0)
    assert np.all(np.isfinite(probs))
    assert_allclose(probs, [1.0, 0.0], atol=1e-300)


def test_symmetric_score_at_zero_theta():
    policy = SoftmaxPolicy(tabular_policy_features(2, 2), np.zeros(4))
    expected = np.array([0.5, -0.5, 0.0, 0.0])
    assert_allclose(policy.score(0, 0), expected)


def test_score_has_zero_mean_and_respects_bound(rng):
    features = rng.standard_normal((5, 3, 4))
    policy = SoftmaxPolicy(features, rng.standard_normal(4))
    psi = policy.score_matrix()

    assert_allclose(np.einsum("sa,sad->sd", policy.all_probs(), psi), 0.0, atol=1e-12)
    assert np.max(np.linalg.norm(psi, axis=2)) <= policy.score_bound()
    assert_allclose(psi[3, 2], policy.score(3, 2), atol=1e-14)


def test_log_prob_matches_probabilities(rng):
    policy = SoftmaxPolicy(tabular_policy_features(3, 4), rng.standard_normal(12))
    assert_allclose(np.exp(policy.log_prob(1, 2)), policy.action_probs(1)[2])


def test_sampled_action_frequencies_match_uniform_policy():
    policy = SoftmaxPolicy(tabular_policy_features(1, 3), np.zeros(3))
    draws = 100_000
    stream = make_rng(2024)
    counts = np.bincount([policy.sample_action(0, stream) for _ in range(draws)], minlength=3)

    stderr = np.sqrt(draws * (1 / 3) * (2 / 3))
    assert np.all(np.abs(counts - draws / 3) <= 3 * stderr)


def test_single_action_always_sampled():
    policy = SoftmaxPolicy(tabular_policy_features(2, 1), np.array([3.0, -1.0]))
    stream = make_rng(0)
    assert {policy.sample_action(1, stream) for _ in range(50)} == {0}


def test_theta_dimension_mismatch_is_rejected():
    with pytest.raises(ValueError):
        SoftmaxPolicy(tabular_policy_features(2, 2), np.zeros(3))


def test_policy_feature_document_round_trip():
    features = tabular_policy_features(3, 2)
    assert_allclose(policy_features_from_document(policy_features_to_document(features)), features)


def test_policy_feature_document_with_wrong_rows_is_refused():
    document = policy_features_to_document(tabular_policy_features(3, 2))
    document["features"] = document["features"][:-1]
    with pytest.raises(InvalidConfigError):
        policy_features_from_document(document)


def test_identity_features_have_full_rank():
    report = tabular_features(5).check_rank()
    assert report.full_rank
    assert report.rank == 5
    assert report.ratio == pytest.approx(1.0)


def test_duplicated_column_fails_rank_certificate():
    matrix = np.eye(5)[:, :3]
    features = CriticFeatures(np.hstack([matrix, matrix[:, :1]]))

    report = features.check_rank()

    assert not report.full_rank
    assert report.rank == 3
    assert features.validate() == ["feature matrix fails the full-column-rank certificate"]


def test_process_rank_tolerance_applies_to_features_built_afterwards(monkeypatch):
    monkeypatch.setattr(critic, "RANK_TOL", critic.RANK_TOL)
    narrow = np.diag([1.0, 0.1])

    set_rank_tol(0.5)

    assert tabular_features(2).rank_tol == 0.5
    assert not CriticFeatures(narrow).check_rank().full_rank
    assert CriticFeatures(narrow, rank_tol=1e-9).check_rank().full_rank
    assert features_from_document({"matrix": narrow.tolist()}).rank_tol == 0.5
    with pytest.raises(ValueError):
        set_rank_tol(0.0)


def test_gaussian_features_rank_matches_independent_svd():
    matrix = make_rng(8).standard_normal((8, 3))
    report = CriticFeatures(matrix).check_rank()
    sv = np.linalg.svd(matrix, compute_uv=False)

    assert report.full_rank
    assert report.ratio == pytest.approx(sv[-1] / sv[0], rel=1e-10)


def test_more_columns_than_states_is_refused():
    features = CriticFeatures(np.ones((2, 3)))
    with pytest.raises(ValueError):
        features.check_rank()
    assert features.validate() == ["m = 3 exceeds n = 2"]


def test_value_of():
    features = tabular_features(4)
    V = np.array([1.0, -2.0, 3.5, 0.0])
    assert [features.value_of(np.zeros(4), s) for s in range(4)] == [0.0] * 4
    assert [features.value_of(V, s) for s in range(4)] == list(V)
    with pytest.raises(ValueError):
        features.value_of(np.zeros(3), 0)


def test_shipped_feature_sets_respect_norm_bound():
    for features in (
        tabular_features(6),
        deficient_features(6, 3),
        random_orthonormal_features(6, 4, make_rng(1)),
    ):
        assert features.validate() == []
        assert np.all(np.linalg.norm(features.matrix, axis=1) <= 1.0 + 1e-12)


def test_norm_bound_violation_is_listed():
    features = CriticFeatures(np.array([[2.0], [0.0]]), norm_bound=True)
    assert features.validate() == ["‖φ(0)‖ = 2 exceeds 1"]


def test_feature_document_round_trip():
    features = deficient_features(5, 2)
    loaded = features_from_document(features.to_document())
    assert_allclose(loaded.matrix, features.matrix)
    assert loaded.norm_bound


def test_deficient_features_reject_full_span():
    with pytest.raises(ValueError):
        deficient_features(4, 4)
