"""Likelihood-ratio gradient estimators computed from single trajectories.

Gradients are plain numpy arrays shaped like the policy's parameter table.
Policies must expose ``score_sum(states, actions, weights)``.
"""

from __future__ import annotations

import numpy as np

from .core import Trajectory, indicator_tail_product, rewards_to_go


class UnsafeStartError(ValueError):
    pass


def grad_safety_prob(traj: Trajectory, policy) -> np.ndarray:
    """G_1 * sum_{t=0}^{T-1} grad log pi(A_t|S_t).

    Unbiased for the gradient of P(all states safe | S_0) when S_0 is
    safe; identically zero on any episode with a later violation.
    """
    if traj.safe_flags[0] != 1:
        raise UnsafeStartError("safety-probability gradient requires a safe initial state")
    if not indicator_tail_product(traj, 1):
        return np.zeros(policy.param_shape)
    return policy.score_sum(traj.states[:-1], traj.actions)


def grad_value(
    traj: Trajectory,
    policy,
    mu: float = 0.0,
    terminal_bonus: bool = False,
    baseline: float | None = None,
) -> np.ndarray:
    """sum_t R_{t,mu} * grad log pi(A_t|S_t) (reward-to-go REINFORCE).

    ``baseline`` is subtracted from every reward-to-go when given.
    """
    weights = rewards_to_go(traj, mu, terminal_bonus)
    if baseline is not None:
        weights = weights - baseline
    return policy.score_sum(traj.states[:-1], traj.actions, weights)


def grad_lagrangian(traj: Trajectory, policy, lam: float) -> np.ndarray:
    """Value gradient plus ``lam`` times the safety-probability gradient."""
    g = grad_value(traj, policy, 0.0)
    if lam != 0.0:
        g = g + lam * grad_safety_prob(traj, policy)
    elif traj.safe_flags[0] != 1:
        raise UnsafeStartError("safety-probability gradient requires a safe initial state")
    return g


def batch_average(grads) -> np.ndarray:
    grads = list(grads)
    if not grads:
        raise ValueError("cannot average an empty batch of gradients")
    shape = np.shape(grads[0])
    for g in grads[1:]:
        if np.shape(g) != shape:
            raise ValueError(f"gradient shape mismatch: {np.shape(g)} vs {shape}")
    return np.mean(np.stack(grads), axis=0)
