"""Safety-probability gradient on a small random MDP.

Compares three things on one instance: the exact expectation of the
single-trajectory estimator, finite differences of the exact joint safety
probability, and a Monte Carlo average of the estimator.
"""

import numpy as np

from safepg import oracle
from safepg.estimators import grad_safety_prob
from safepg.rng import RngStream

rng = RngStream(7)
mdp = oracle.random_mdp(rng, n_states=3, n_actions=2, horizon=3)
policy = oracle.random_policy(rng, mdp)

print("safe states:", np.flatnonzero(mdp.safe))
print("P(all safe) =", round(oracle.exact_safety_prob(mdp, policy), 6))

exact = oracle.exact_estimator_expectation(mdp, policy, "safety")
fd = oracle.finite_diff_grad(mdp, policy, "safety_prob")
print("exact E[estimator] vs finite differences, rel err:", oracle.relative_error(exact, fd))

# sample trajectories straight from the enumeration
trajs = oracle.enumerate_trajectories(mdp, policy)
probs = np.array([p for _, p in trajs])
draws = np.random.default_rng(0).choice(len(trajs), size=20_000, p=probs / probs.sum())
mc = np.mean([grad_safety_prob(trajs[i][0], policy) for i in draws], axis=0)
print("Monte Carlo (20k episodes) rel err:", round(oracle.relative_error(mc, fd), 3))

for t in range(1, mdp.horizon):
    _, _, diff = oracle.verify_recursion(mdp, policy, t)
    print(f"recursion at t={t}: max |lhs - rhs| = {diff:.1e}")
