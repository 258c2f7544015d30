import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from safepg import oracle
from safepg.core import Trajectory
from safepg.estimators import UnsafeStartError, batch_average, grad_lagrangian, grad_safety_prob, grad_value
from safepg.policy import RbfGaussianPolicy
from safepg.rng import RngStream

POL = RbfGaussianPolicy.default().with_params(np.random.default_rng(0).normal(scale=0.2, size=(1681, 2)))


def nav_traj(flags, rewards=None, seed=0):
    rng = np.random.default_rng(seed)
    n = len(flags) - 1
    rewards = rng.uniform(-100, 0, n) if rewards is None else np.asarray(rewards, float)
    return Trajectory(rng.uniform(0, 10, (n + 1, 2)), rng.normal(size=(n, 2)), rewards, flags)


def test_zero_on_violation():
    tr = nav_traj([1, 1, 1, 0, 1, 1])
    assert np.all(grad_safety_prob(tr, POL) == 0)
    assert grad_safety_prob(tr, POL).shape == POL.param_shape


def test_all_safe_two_steps():
    tr = nav_traj([1, 1, 1])
    expected = POL.score(tr.states[0], tr.actions[0]) + POL.score(tr.states[1], tr.actions[1])
    np.testing.assert_allclose(grad_safety_prob(tr, POL), expected, atol=1e-12)


def test_unsafe_start_rejected():
    with pytest.raises(UnsafeStartError):
        grad_safety_prob(nav_traj([0, 1, 1]), POL)


def test_grad_value_examples():
    tr = nav_traj([1, 1, 1], rewards=[0.0, 0.0])
    assert np.all(grad_value(tr, POL, 0.0) == 0)
    one = nav_traj([1, 0], rewards=[-3.0])
    np.testing.assert_allclose(grad_value(one, POL, 2.0), -1.0 * POL.score(one.states[0], one.actions[0]))


def test_lagrangian_identities():
    tr = nav_traj([1, 1, 1, 1])
    np.testing.assert_array_equal(grad_lagrangian(tr, POL, 0.0), grad_value(tr, POL, 0.0))
    diff = grad_lagrangian(tr, POL, 2.0) - grad_lagrangian(tr, POL, 1.0)
    np.testing.assert_allclose(diff, grad_safety_prob(tr, POL), atol=1e-9)
    bad = nav_traj([1, 1, 0, 1])
    np.testing.assert_allclose(grad_lagrangian(bad, POL, 5.0), grad_value(bad, POL, 0.0))


def test_batch_average():
    g = np.arange(6.0).reshape(3, 2)
    np.testing.assert_array_equal(batch_average([g]), g)
    np.testing.assert_array_equal(batch_average([g, -g]), np.zeros_like(g))
    np.testing.assert_allclose(batch_average([g] * 7), g)
    with pytest.raises(ValueError):
        batch_average([])
    with pytest.raises(ValueError):
        batch_average([g, np.zeros(2)])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=2, max_size=8), st.floats(0, 50), st.integers(0, 1000))
def test_properties(tail, lam, seed):
    flags = [1] + tail
    tr = nav_traj(flags, seed=seed)
    g = grad_safety_prob(tr, POL)
    if 0 in tail:
        assert np.all(g == 0)
    lagr = grad_lagrangian(tr, POL, lam)
    assert np.all(np.isfinite(lagr))
    np.testing.assert_allclose(lagr, grad_value(tr, POL) + lam * g, rtol=1e-9, atol=1e-9)


# unbiasedness against the exact tabular oracle


@pytest.mark.parametrize("i", range(6))
def test_safety_estimator_unbiased(i):
    rng = RngStream(101, i)
    mdp = oracle.random_mdp(rng, 2 + i % 3, 2, 2 + i % 2)
    pol = oracle.random_policy(rng, mdp)
    exact = oracle.exact_estimator_expectation(mdp, pol, "safety")
    fd = oracle.finite_diff_grad(mdp, pol, "safety_prob")
    assert oracle.relative_error(exact, fd) < 1e-6


@pytest.mark.parametrize("mu,bonus", [(0.0, False), (1.5, False), (1.5, True)])
def test_value_estimator_unbiased(mu, bonus):
    rng = RngStream(202, int(mu * 10) + bonus)
    mdp = oracle.random_mdp(rng, 3, 2, 3)
    pol = oracle.random_policy(rng, mdp)
    exact = oracle.exact_estimator_expectation(mdp, pol, "value", mu=mu, terminal_bonus=bonus)
    fd = oracle.finite_diff_grad(mdp, pol, "value", mu=mu, terminal_bonus=bonus)
    assert oracle.relative_error(exact, fd) < 1e-6


def test_two_state_two_step_instance():
    # 2 states, 2 actions, T=2; state 1 unsafe
    trans = np.array([[[0.9, 0.1], [0.3, 0.7]], [[0.5, 0.5], [0.2, 0.8]]])
    mdp = oracle.TabularMdp(trans, np.zeros((2, 2)), [True, False], 2)
    pol = oracle.random_policy(RngStream(5), mdp)
    exact = oracle.exact_estimator_expectation(mdp, pol, "safety")
    assert oracle.relative_error(exact, oracle.finite_diff_grad(mdp, pol, "safety_prob")) < 1e-6
