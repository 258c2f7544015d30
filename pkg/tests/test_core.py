import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from safepg.core import Trajectory, augmented_reward, indicator_tail_product, reward_to_go, rewards_to_go


@pytest.mark.parametrize("flags,t,expected", [
    ([1, 1, 1, 1, 1], 1, 1),
    ([1, 1, 0, 1, 1], 1, 0),
    ([1, 1, 0, 1, 1], 3, 1),
])
def test_tail_product_examples(make_traj, flags, t, expected):
    assert indicator_tail_product(make_traj(flags), t) == expected


def test_tail_product_range(make_traj):
    tr = make_traj([1, 1, 1])
    with pytest.raises(IndexError):
        indicator_tail_product(tr, 3)
    with pytest.raises(IndexError):
        indicator_tail_product(tr, -1)


@pytest.mark.parametrize("r,safe,mu,expected", [(-2, 1, 2, 0), (-2, 0, 2, -2), (-3, 1, 0, -3)])
def test_augmented_reward(r, safe, mu, expected):
    assert augmented_reward(r, safe, mu) == expected


def test_reward_to_go_examples(make_traj):
    tr = make_traj([1, 0, 1, 1], np.array([-1.0, -2.0, -3.0]))
    assert reward_to_go(tr, 0, 2.0) == -2.0
    assert reward_to_go(tr, 2, 2.0) == -1.0
    assert reward_to_go(tr, 0, 0.0) == -6.0
    with pytest.raises(IndexError):
        reward_to_go(tr, 3, 1.0)


def test_terminal_bonus_credits_last_step(make_traj):
    tr = make_traj([1, 0, 1, 1], np.array([-1.0, -2.0, -3.0]))
    assert reward_to_go(tr, 0, 2.0, terminal_bonus=True) == 0.0
    assert reward_to_go(tr, 2, 2.0, terminal_bonus=True) == 1.0
    unsafe_end = make_traj([1, 0, 1, 0], np.array([-1.0, -2.0, -3.0]))
    assert reward_to_go(unsafe_end, 0, 2.0, terminal_bonus=True) == -2.0


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory(np.zeros((3, 2)), np.zeros((2, 2)), np.zeros(2), [1, 2, 1])
    with pytest.raises(ValueError):
        Trajectory(np.zeros((3, 2)), np.zeros((2, 2)), np.zeros(2), [1, 1])
    with pytest.raises(ValueError):
        Trajectory(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros(2), [1, 1, 1])


def test_trajectory_is_immutable(make_traj):
    tr = make_traj([1, 1])
    with pytest.raises(ValueError):
        tr.safe_flags[0] = 0


flag_lists = st.lists(st.integers(0, 1), min_size=2, max_size=12)


@given(flag_lists)
def test_tail_product_monotone_and_recursive(flags):
    tr = Trajectory(np.zeros((len(flags), 2)), np.zeros((len(flags) - 1, 2)), np.zeros(len(flags) - 1), flags)
    T = tr.horizon
    g = [indicator_tail_product(tr, t) for t in range(T + 1)]
    assert g[T] == flags[T]
    for t in range(T):
        assert g[t] <= g[t + 1]
        assert g[t] == flags[t] * g[t + 1]


@given(flag_lists, st.floats(0, 20), st.data())
def test_reward_to_go_difference(flags, mu, data):
    n = len(flags) - 1
    rewards = np.array(data.draw(st.lists(st.floats(-100, 0), min_size=n, max_size=n)))
    tr = Trajectory(np.zeros((n + 1, 2)), np.zeros((n, 2)), rewards, flags)
    for t in range(n - 1):
        diff = reward_to_go(tr, t, mu) - reward_to_go(tr, t + 1, mu)
        assert diff == pytest.approx(rewards[t] + mu * flags[t], abs=1e-9)
    np.testing.assert_allclose(rewards_to_go(tr, mu), [reward_to_go(tr, t, mu) for t in range(n)], atol=1e-9)
