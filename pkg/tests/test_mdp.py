import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from target_actor_critic.errors import InvalidConfigError, InvalidMdpError
from target_actor_critic.mdp import (
    FiniteMdp,
    artificial_kernel,
    garnet,
    initial_chain,
    load_mdp,
    make_rng,
    mdp_from_document,
    sample_categorical,
    sample_env_step,
    validate,
)


def test_well_formed_two_state_mdp_has_no_violations(two_state):
    assert validate(two_state) == []


def test_kernel_row_defect_is_reported_with_its_index(two_state):
    kernel = two_state.kernel.copy()
    kernel[0, 0] = [0.5, 0.4]
    broken = FiniteMdp(kernel, two_state.reward, two_state.discount, two_state.init_dist)

    violations = validate(broken)

    assert len(violations) == 1
    assert violations[0].field == "kernel"
    assert violations[0].index == (0, 0)


def test_init_dist_defect_is_reported(two_state):
    broken = FiniteMdp(two_state.kernel, two_state.reward, two_state.discount, np.array([1.0, 0.1]))

    violations = validate(broken)

    assert [v.field for v in violations] == ["init_dist"]


def test_discount_outside_open_interval_is_rejected(two_state):
    broken = FiniteMdp(two_state.kernel, two_state.reward, 1.0, two_state.init_dist)
    assert [v.field for v in validate(broken)] == ["discount"]


def test_artificial_kernel_hand_value():
    mdp = FiniteMdp(
        kernel=np.array([[[1.0, 0.0]], [[1.0, 0.0]]]),
        reward=np.zeros((2, 1)),
        discount=0.5,
        init_dist=np.array([0.0, 1.0]),
    )
    assert_allclose(artificial_kernel(mdp)[0, 0], [0.5, 0.5])


def test_artificial_kernel_rows_are_distributions(random_garnets):
    for mdp in random_garnets:
        assert_allclose(artificial_kernel(mdp).sum(axis=2), 1.0, atol=1e-12)
        assert validate(mdp) == []


def test_garnet_is_reproducible_and_sparse():
    first = garnet(6, 2, 3, 0.8, make_rng(5))
    second = garnet(6, 2, 3, 0.8, make_rng(5))

    assert_array_equal(first.kernel, second.kernel)
    assert_array_equal(first.reward, second.reward)
    assert np.all((first.kernel > 0).sum(axis=2) == 3)


def test_garnet_rejects_impossible_branching():
    with pytest.raises(ValueError):
        garnet(3, 2, 4, 0.9, make_rng(0))


def test_document_round_trip_through_file(two_state, write_document):
    path = write_document("two_state.yaml", two_state.to_document())

    loaded = load_mdp(path)

    assert_array_equal(loaded.kernel, two_state.kernel)
    assert_array_equal(loaded.reward, two_state.reward)
    assert loaded.discount == two_state.discount


def test_document_with_unknown_key_is_refused(two_state):
    document = {**two_state.to_document(), "transition": []}
    with pytest.raises(InvalidConfigError) as info:
        mdp_from_document(document)
    assert info.value.keys == ["transition"]


def test_invalid_document_lists_violations(two_state):
    document = two_state.to_document()
    document["kernel"][0] = [0.5, 0.4]
    with pytest.raises(InvalidMdpError) as info:
        mdp_from_document(document, source="bad.yaml")
    assert "kernel[0, 0]" in str(info.value)
    assert "bad.yaml" in str(info.value)


def test_sample_categorical_uses_inverse_cdf():
    class FixedDraw:
        def __init__(self, u):
            self.u = u

        def random(self):
            return self.u

    probs = np.array([0.2, 0.5, 0.3])
    assert sample_categorical(probs, FixedDraw(0.1)) == 0
    assert sample_categorical(probs, FixedDraw(0.2)) == 1
    assert sample_categorical(probs, FixedDraw(0.69)) == 1
    assert sample_categorical(probs, FixedDraw(0.71)) == 2
    assert sample_categorical(probs, FixedDraw(1.0 - 1e-17)) == 2


def test_env_step_without_noise_returns_mean_reward(two_state):
    chain = initial_chain(two_state, make_rng(3))
    s = chain.tilde_state

    step = sample_env_step(two_state, chain, 1)

    assert step.reward == two_state.reward[s, 1]
    assert step.chain.step == 1
    assert step.next_tilde_state == (step.next_state if step.bernoulli else step.chain.tilde_state)


def test_env_step_draw_order(two_state):
    noisy = FiniteMdp(two_state.kernel, two_state.reward, 0.5, two_state.init_dist, reward_noise_halfwidth=0.25)
    chain = initial_chain(noisy, make_rng(11))
    s = chain.tilde_state

    step = sample_env_step(noisy, chain, 0)

    replay = make_rng(11)
    sample_categorical(noisy.init_dist, replay)
    next_state = sample_categorical(noisy.kernel[s, 0], replay)
    noise = replay.uniform(-1.0, 1.0) * 0.25
    bernoulli = 1 if replay.random() < 0.5 else 0
    reset = sample_categorical(noisy.init_dist, replay)

    assert step.next_state == next_state
    assert step.reward == noisy.reward[s, 0] + noise
    assert step.bernoulli == bernoulli
    assert step.next_tilde_state == (next_state if bernoulli else reset)


def test_env_step_rejects_bad_action(two_state):
    chain = initial_chain(two_state, make_rng(0))
    with pytest.raises(IndexError):
        sample_env_step(two_state, chain, 2)


def test_replicate_streams_differ_and_repeat():
    a = make_rng(7, 0).random(5)
    b = make_rng(7, 1).random(5)
    assert not np.array_equal(a, b)
    assert_array_equal(make_rng(8).random(5), b)
