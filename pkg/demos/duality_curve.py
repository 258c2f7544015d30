"""Optimal value under an averaged-safety constraint, as a function of the level.

For each level xi the primal optimum over mixtures of deterministic
policies is compared with the dual minimum. The curve is nonincreasing
and concave; the multiplier at xi0 gives a linear upper bound on it.
"""

import numpy as np

from safepg import oracle
from safepg.rng import RngStream

mdp = oracle.random_mdp(RngStream(3), n_states=3, n_actions=2, horizon=3, safe_action=True)
brute = oracle.all_deterministic_values(mdp)
grid = np.linspace(0, 1, 11)
results = [oracle.dual_optimum(mdp, xi, brute=brute) for xi in grid]

print(f"{'xi':>5} {'P*':>10} {'D*':>10} {'lambda*':>9}")
for xi, r in zip(grid, results):
    print(f"{xi:5.2f} {r.p_tilde_star:10.5f} {r.d_tilde_star:10.5f} {r.lambda_star:9.4f}")

xi0 = 0.5
r0 = results[5]
worst = min(r0.p_tilde_star + r0.lambda_star * (xi0 - xi) - r.p_tilde_star for xi, r in zip(grid, results))
print(f"tangent bound at xi0={xi0}: smallest slack {worst:.2e}")
