"""Trajectory record and the safety-indicator / return algebra."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Trajectory:
    """One finite-horizon episode.

    ``states`` holds S_0..S_T, ``actions`` and ``rewards`` hold the T
    per-step entries, and ``safe_flags`` holds b_t = 1(S_t is safe) for
    t = 0..T.
    """

    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    safe_flags: np.ndarray

    def __post_init__(self):
        states = np.asarray(self.states)
        actions = np.asarray(self.actions)
        rewards = np.asarray(self.rewards, dtype=float)
        flags = np.asarray(self.safe_flags).astype(np.int8)
        horizon = len(rewards)
        if horizon < 1:
            raise ValueError("trajectory needs at least one step")
        if len(states) != horizon + 1 or len(actions) != horizon:
            raise ValueError(
                f"inconsistent lengths: {len(states)} states, {len(actions)} actions, {horizon} rewards"
            )
        if len(flags) != horizon + 1:
            raise ValueError(f"expected {horizon + 1} safe flags, got {len(flags)}")
        if not np.all((flags == 0) | (flags == 1)):
            raise ValueError("safe flags must be 0 or 1")
        for name, arr in (("states", states), ("actions", actions), ("rewards", rewards), ("safe_flags", flags)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def horizon(self) -> int:
        return len(self.rewards)

    @property
    def joint_safe(self) -> bool:
        return bool(self.safe_flags.all())

    @property
    def total_reward(self) -> float:
        return float(self.rewards.sum())


def indicator_tail_product(traj: Trajectory, t: int) -> int:
    """G_t = prod_{u=t}^{T} b_u."""
    if not 0 <= t <= traj.horizon:
        raise IndexError(f"t={t} outside [0, {traj.horizon}]")
    return int(traj.safe_flags[t:].all())


def augmented_reward(r: float, safe: int, mu: float) -> float:
    return r + mu * safe


def augmented_rewards(traj: Trajectory, mu: float, terminal_bonus: bool = False) -> np.ndarray:
    """Per-step r_t + mu*b_t for t < T; optionally folds mu*b_T into the last step."""
    out = traj.rewards + mu * traj.safe_flags[:-1]
    if terminal_bonus:
        out = out.copy()
        out[-1] += mu * traj.safe_flags[-1]
    return out


def rewards_to_go(traj: Trajectory, mu: float = 0.0, terminal_bonus: bool = False) -> np.ndarray:
    """All suffix sums R_{t,mu} for t = 0..T-1 at once."""
    aug = augmented_rewards(traj, mu, terminal_bonus)
    return np.cumsum(aug[::-1])[::-1]


def reward_to_go(traj: Trajectory, t: int, mu: float = 0.0, terminal_bonus: bool = False) -> float:
    """R_{t,mu} = sum_{u=t}^{T-1} (r_u + mu*b_u).

    With ``terminal_bonus`` the terminal indicator's bonus mu*b_T is
    credited to the last action.
    """
    if not 0 <= t <= traj.horizon - 1:
        raise IndexError(f"t={t} outside [0, {traj.horizon - 1}]")
    return float(augmented_rewards(traj, mu, terminal_bonus)[t:].sum())
