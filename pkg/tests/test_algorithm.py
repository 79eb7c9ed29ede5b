import math
from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from target_actor_critic.algorithm import (
    METRIC_COLUMNS,
    Learner,
    LearnerOptions,
    LearnerState,
    RunConfig,
    gamma_scale,
    initial_state,
    run,
    run_batch,
    select_metrics,
    stabilized_actor_step,
    stabilizer_bounds,
    step,
    target_td_error,
    td_error,
)
from target_actor_critic.features import CriticFeatures, tabular_features
from target_actor_critic.mdp import (
    ChainState,
    FiniteMdp,
    initial_chain,
    make_rng,
    sample_categorical,
    sample_env_step,
)
from target_actor_critic.oracle import OracleCache
from target_actor_critic.policy import tabular_policy_features
from target_actor_critic.schedules import PowerSchedule, finite_time_schedule, zero_actor


def _config(instance, schedule=None, horizon=200, **kwargs) -> RunConfig:
    return RunConfig(
        mdp=instance.mdp,
        policy_features=instance.policy_features,
        features=instance.features,
        schedule=schedule or finite_time_schedule(0.5, 0.5, 0.5),
        horizon=horizon,
        **kwargs,
    )


def test_td_error_hand_value():
    scalar = CriticFeatures(np.ones((2, 1)))
    assert td_error(scalar, np.array([2.0]), 0, 1, 1.0, 0.5) == 0.0
    assert td_error(scalar, np.zeros(1), 0, 1, 0.7, 0.5) == 0.7


def test_target_td_error_collapses_to_td_error():
    features = CriticFeatures(np.array([[1.0, 0.5], [0.2, -1.0], [0.0, 0.3]]))
    omega = np.array([0.4, -1.2])
    assert target_td_error(features, omega, omega, 2, 1, 0.3, 0.9) == td_error(features, omega, 2, 1, 0.3, 0.9)
    assert target_td_error(features, np.zeros(2), np.zeros(2), 0, 1, 0.3, 0.9) == 0.3


def test_target_td_error_bootstraps_on_target():
    scalar = CriticFeatures(np.ones((2, 1)))
    assert target_td_error(scalar, np.array([1.0]), np.array([3.0]), 0, 1, 0.0, 0.5) == 0.5


def test_gamma_scale_contract_over_ten_decades():
    c0 = 1.0
    c1, c2 = stabilizer_bounds(c0)
    for r in np.logspace(-5, 5, 41):
        omega = np.array([r, 0.0])
        product = r * gamma_scale(omega, c0)
        if r >= c0:
            assert c1 - 1e-12 <= product < c2
        else:
            assert product == r


def test_gamma_scale_is_continuous_at_c0():
    c0 = 2.5
    assert gamma_scale(np.array([c0]), c0) == 1.0
    assert gamma_scale(np.array([c0 * (1 + 1e-12)]), c0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        stabilizer_bounds(0.0)


def test_stabilized_step_scales_actor_increment(default_inst):
    c0 = 1.0
    schedule = finite_time_schedule(0.5, 0.5, 0.5)
    omega = np.zeros(5)
    omega[0] = 2 * c0 + 1

    def start():
        state = initial_state(default_inst.mdp, default_inst.policy_features, default_inst.features, seed=9)
        return replace(state, omega=omega.copy(), omega_bar=omega.copy())

    plain, _ = step(start(), default_inst.mdp, default_inst.policy_features, default_inst.features, schedule)
    scaled, _ = stabilized_actor_step(
        start(), default_inst.mdp, default_inst.policy_features, default_inst.features, schedule, c0
    )

    np.testing.assert_allclose(scaled.theta, plain.theta * (1 + c0) / (2 + 2 * c0), atol=1e-15)
    assert_array_equal(scaled.omega, plain.omega)


def test_stabilized_run_matches_plain_run_inside_c0(default_inst):
    plain = run(_config(default_inst, horizon=300, record_trajectory=True))
    stabilized = run(
        _config(default_inst, horizon=300, record_trajectory=True, options=LearnerOptions(stabilizer_c0=1e6))
    )

    assert_array_equal(plain.final_state.theta, stabilized.final_state.theta)
    assert_array_equal(plain.final_state.omega, stabilized.final_state.omega)
    assert plain.trajectory.equals(stabilized.trajectory)


def test_unit_target_rate_copies_critic_exactly(default_inst):
    schedule = PowerSchedule(0.5, 1.0, 0.5, 2 / 3, 0.0, 1 / 3)
    learner = Learner(default_inst.mdp, default_inst.policy_features, default_inst.features, schedule)
    state = initial_state(default_inst.mdp, default_inst.policy_features, default_inst.features, seed=1)
    for _ in range(50):
        state, _ = learner.step(state)
        assert_array_equal(state.omega_bar, state.omega)


def test_frozen_actor_keeps_theta(default_inst):
    result = run(_config(default_inst, schedule=zero_actor(finite_time_schedule()), horizon=100))
    assert_array_equal(result.final_state.theta, np.zeros(15))
    assert result.metrics["grad_norm_sq"].max() - result.metrics["grad_norm_sq"].min() <= 1e-12


def test_hard_sync_freezes_target_between_copies(default_inst):
    options = LearnerOptions(hard_sync_every=3)
    learner = Learner(
        default_inst.mdp, default_inst.policy_features, default_inst.features, finite_time_schedule(), options
    )
    state = initial_state(default_inst.mdp, default_inst.policy_features, default_inst.features, seed=2)
    start = state.omega_bar.copy()
    for t in range(1, 7):
        state, _ = learner.step(state)
        if t % 3 == 0:
            assert_array_equal(state.omega_bar, state.omega)
            start = state.omega_bar.copy()
        else:
            assert_array_equal(state.omega_bar, start)
    assert options.target_mode.startswith("hard-sync every 3")


def test_learner_options_are_validated():
    with pytest.raises(ValueError):
        LearnerOptions(actor_td="delta")
    with pytest.raises(ValueError):
        LearnerOptions(stabilizer_c0=-1.0)
    with pytest.raises(ValueError):
        LearnerOptions(hard_sync_every=0)


def test_target_driven_actor_differs_from_classic(default_inst):
    classic = run(_config(default_inst, horizon=200))
    simplified = run(_config(default_inst, horizon=200, options=LearnerOptions(actor_td="target")))
    assert not np.array_equal(classic.final_state.theta, simplified.final_state.theta)


def test_identical_seeds_give_identical_runs(default_inst):
    first = run(_config(default_inst, seed=7, record_trajectory=True))
    second = run(_config(default_inst, seed=7, record_trajectory=True))
    other = run(_config(default_inst, seed=8, record_trajectory=True))

    assert first.trajectory.equals(second.trajectory)
    assert first.metrics.equals(second.metrics)
    assert not first.trajectory.equals(other.trajectory)


def test_zero_horizon_returns_initial_state(default_inst):
    result = run(_config(default_inst, horizon=0))
    assert list(result.metrics["t"]) == [0]
    assert result.final_state.t == 0
    assert len(result.snapshots) == 1


def test_records_stride_grid_horizon_and_checkpoints(default_inst):
    result = run(_config(default_inst, horizon=250, snapshot_stride=100, checkpoints=(1, 2, 4)))
    assert list(result.metrics["t"]) == [0, 1, 2, 4, 100, 200, 250]
    assert list(result.metrics.columns) == list(METRIC_COLUMNS)
    assert list(result.snapshot_frame()["t"]) == [0, 1, 2, 4, 100, 200, 250]


def test_running_average_at_zero_is_initial_error(default_inst):
    result = run(_config(default_inst, horizon=10, snapshot_stride=1))
    first = result.metrics.iloc[0]
    assert first["avg_critic_error"] == pytest.approx(first["critic_error_sq"])
    assert first["avg_grad_norm_sq"] == pytest.approx(first["grad_norm_sq"])


def test_warm_start_begins_at_fixed_point(default_inst):
    result = run(_config(default_inst, horizon=0, warm_start=True))
    assert result.metrics["critic_error_sq"].iloc[0] == 0.0
    assert result.metrics["target_error_sq"].iloc[0] == 0.0


def test_divergence_aborts_with_partial_result(default_inst):
    exploding = PowerSchedule(0.0, 1.0, 1e300, 2 / 3, 0.0, 0.0)
    with np.errstate(over="ignore", invalid="ignore"):
        result = run(_config(default_inst, schedule=exploding, horizon=1_000, snapshot_stride=10))

    assert result.aborted
    assert result.abort_step is not None
    assert "Non-finite" in result.abort_reason
    assert result.metrics["t"].max() <= result.abort_step


def test_select_metrics_keeps_averages_in_canonical_order(default_inst):
    result = run(_config(default_inst, horizon=20, snapshot_stride=10))
    selected = select_metrics(result.metrics, ["J", "critic_error_sq"])
    assert list(selected.columns) == ["t", "critic_error_sq", "J", "avg_critic_error", "avg_grad_norm_sq"]


def test_invalid_run_configuration_raises(default_inst):
    with pytest.raises(ValueError):
        run(_config(default_inst, horizon=-1))


def test_single_step_matches_hand_trace(two_state):
    gamma = two_state.discount
    Phi = np.array([[1.0, 0.5], [0.2, 1.0]])
    policy_features = tabular_policy_features(2, 2)
    theta = np.array([0.3, -0.2, 0.1, 0.5])
    omega = np.array([0.4, -0.3])
    omega_bar = np.array([1.0, 0.2])
    # t = 0 makes every (1 + t)^exp equal 1, so the rates are the scales
    alpha, xi, beta = 0.4, 0.3, 0.5
    schedule = PowerSchedule(alpha, xi, beta, 2 / 3, 1 / 2, 1 / 3)
    state = LearnerState(theta, omega, omega_bar, ChainState(0, make_rng(11)))
    u = make_rng(11).random(5)

    weights = [math.exp(theta[0]), math.exp(theta[1])]
    pi = [w / sum(weights) for w in weights]
    a = 0 if u[0] < pi[0] else 1
    s_next = 0 if u[1] < two_state.kernel[0, a, 0] else 1
    r = two_state.reward[0, a]
    reset = 0 if u[4] < two_state.init_dist[0] else 1
    tilde_next = s_next if u[3] < gamma else reset

    def value(w, s):
        return Phi[s, 0] * w[0] + Phi[s, 1] * w[1]

    delta = r + gamma * value(omega, s_next) - value(omega, 0)
    delta_bar = r + gamma * value(omega_bar, s_next) - value(omega, 0)
    psi = np.array([-pi[0], -pi[1], 0.0, 0.0])
    psi[a] += 1.0
    theta_next = theta + alpha / (1 - gamma) * delta * psi
    omega_next = omega + beta * delta_bar * Phi[0]
    omega_bar_next = omega_bar + xi * (omega_next - omega_bar)

    nxt, record = step(state, two_state, policy_features, CriticFeatures(Phi), schedule)

    assert (record.a_tilde, record.s_next, nxt.chain.tilde_state) == (a, s_next, tilde_next)
    assert record.delta == pytest.approx(delta, abs=1e-14)
    assert record.delta_bar == pytest.approx(delta_bar, abs=1e-14)
    assert_allclose(nxt.theta, theta_next, rtol=0, atol=1e-14)
    assert_allclose(nxt.omega, omega_next, rtol=0, atol=1e-14)
    assert_allclose(nxt.omega_bar, omega_bar_next, rtol=0, atol=1e-14)
    # averaging toward the pre-update critic would be visibly off
    assert np.max(np.abs(nxt.omega_bar - (omega_bar + xi * (omega - omega_bar)))) > 1e-3
    assert np.max(np.abs(nxt.omega - (omega + beta * delta * Phi[0]))) > 1e-3


def test_step_draws_match_the_sampling_helpers(two_state):
    noisy = FiniteMdp(two_state.kernel, two_state.reward, two_state.discount, two_state.init_dist,
                      reward_noise_halfwidth=0.25)
    policy_features = tabular_policy_features(2, 2)
    learner = Learner(noisy, policy_features, tabular_features(2), zero_actor(finite_time_schedule()))
    state = initial_state(noisy, policy_features, tabular_features(2), seed=5)
    twin = initial_chain(noisy, make_rng(5))
    assert twin.tilde_state == state.chain.tilde_state

    for _ in range(200):
        state, record = learner.step(state)
        action = sample_categorical(np.full(2, 0.5), twin.rng)
        env = sample_env_step(noisy, twin, action)
        twin = env.chain
        assert (record.a_tilde, record.s_next, record.bernoulli) == (action, env.next_state, env.bernoulli)
        assert record.reward == env.reward
        assert state.chain.tilde_state == env.next_tilde_state


def test_batch_rows_follow_their_own_streams(default_inst):
    configs = [_config(default_inst, horizon=150, seed=3, replicate=r, record_trajectory=True) for r in range(4)]

    batched = run_batch(configs)
    alone = [run(c) for c in configs]

    for together, single in zip(batched, alone):
        assert together.replicate == single.replicate
        assert_array_equal(together.trajectory["a_tilde"], single.trajectory["a_tilde"])
        assert_array_equal(together.trajectory["s_tilde"], single.trajectory["s_tilde"])
        assert_allclose(together.final_state.theta, single.final_state.theta, rtol=1e-12, atol=1e-14)
        assert_allclose(together.final_state.omega, single.final_state.omega, rtol=1e-12, atol=1e-14)
        assert_allclose(together.metrics["avg_critic_error"], single.metrics["avg_critic_error"], rtol=1e-12)


def test_batch_keeps_partial_result_of_diverged_row(default_inst):
    exploding = PowerSchedule(0.0, 1.0, 1e300, 2 / 3, 0.0, 0.0)
    huge = np.full(5, 1e300)
    configs = [
        _config(default_inst, schedule=exploding, horizon=50, replicate=0, omega0=huge),
        _config(default_inst, schedule=exploding, horizon=50, replicate=1),
    ]
    with np.errstate(over="ignore", invalid="ignore"):
        first, second = run_batch(configs)

    assert first.aborted and first.abort_step == 0
    assert "Non-finite omega" in first.abort_reason
    assert list(first.metrics["t"]) == [0]
    assert second.replicate == 1
    assert second.abort_step is None or second.abort_step > 0


def test_batch_rejects_configs_that_cannot_share_a_step(default_inst):
    with pytest.raises(ValueError):
        run_batch([_config(default_inst, horizon=10), _config(default_inst, horizon=20, replicate=1)])


def test_tracking_agrees_with_full_report(default_inst):
    cache = OracleCache(default_inst.mdp, default_inst.policy_features, default_inst.features)
    theta = default_inst.sample_thetas(1, seed=4)[1]

    light = cache.tracking(theta)
    full = cache.report(theta)

    assert_array_equal(light.bar_omega_star, full.bar_omega_star)
    assert light.grad_norm_sq == float(np.sum(full.grad_J**2))
    assert cache.tracking(theta) is light
