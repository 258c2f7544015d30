"""Policy gradients under joint probabilistic safety constraints."""

from .core import Trajectory, augmented_reward, indicator_tail_product, reward_to_go, rewards_to_go
from .estimators import batch_average, grad_lagrangian, grad_safety_prob, grad_value
from .nav import NavEnvConfig, is_safe, reward, rollout, sample_safe_uniform, step
from .policy import RbfGaussianPolicy, SoftmaxTabularPolicy
from .rng import RngStream

__all__ = [
    "NavEnvConfig",
    "RbfGaussianPolicy",
    "RngStream",
    "SoftmaxTabularPolicy",
    "Trajectory",
    "augmented_reward",
    "batch_average",
    "grad_lagrangian",
    "grad_safety_prob",
    "grad_value",
    "indicator_tail_product",
    "is_safe",
    "reward",
    "reward_to_go",
    "rewards_to_go",
    "rollout",
    "sample_safe_uniform",
    "step",
]
