"""Train two navigation policies and compare them from uniform safe starts.

Same weight, same seed, the two formulations: the joint-probability
Lagrangian and the per-step safety bonus. A few thousand episodes are
enough to see the policies leave the start corner; the full comparison
lives in ``safepg sweep``.
"""

import sys

from safepg import nav
from safepg.policy import RbfGaussianPolicy
from safepg.rng import RngStream
from safepg.sweep import evaluate
from safepg.trainer import TrainConfig, train

episodes = int(sys.argv[1]) if len(sys.argv) > 1 else 3000
env = nav.NavEnvConfig()
start = RbfGaussianPolicy.default()

safety, ret = evaluate(start, env, 300, RngStream(0, 2))
print(f"untrained: safety {safety:.3f}  return {ret:.1f}")

for form in ("probabilistic", "cumulative"):
    cfg = TrainConfig(form, weight=6.0, episodes=episodes, seed=0, log_every=episodes // 5 or 1)
    policy, log = train(cfg, env, start)
    for row in log:
        print(f"  {form[:4]} iter {row.iter:6d}  return {row.episode_return:8.1f}  safe {row.joint_safe:.0f}")
    safety, ret = evaluate(policy, env, 300, RngStream(0, 2))
    print(f"{form}: safety {safety:.3f}  return {ret:.1f}")
