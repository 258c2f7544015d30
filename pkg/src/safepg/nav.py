"""Two-dimensional navigation task with circular obstacles."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Trajectory
from .rng import RngStream

DEFAULT_OBSTACLES = (
    (7.0, 7.0, 2.0),
    (3.0, 7.0, 1.0),
    (1.5, 4.0, 0.5),
    (4.5, 3.0, 1.5),
    (8.0, 3.0, 0.75),
)

MAX_REJECTIONS = 10**6


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class NavEnvConfig:
    bounds: tuple = (0.0, 10.0, 0.0, 10.0)  # xmin, xmax, ymin, ymax
    obstacles: tuple = DEFAULT_OBSTACLES  # (cx, cy, radius) triples
    goal: tuple = (9.0, 1.5)
    horizon: int = 20
    step_scale: float = 0.05
    start: tuple = (1.0, 8.5)
    _obs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "bounds", tuple(float(b) for b in self.bounds))
        object.__setattr__(self, "obstacles", tuple(tuple(float(v) for v in o) for o in self.obstacles))
        object.__setattr__(self, "goal", tuple(float(v) for v in self.goal))
        object.__setattr__(self, "start", tuple(float(v) for v in self.start))
        xmin, xmax, ymin, ymax = self.bounds
        if not (xmin < xmax and ymin < ymax):
            raise ConfigurationError(f"empty bounds {self.bounds}")
        if self.horizon < 1:
            raise ConfigurationError("horizon must be >= 1")
        if self.step_scale <= 0:
            raise ConfigurationError("step_scale must be > 0")
        for o in self.obstacles:
            if len(o) != 3 or o[2] <= 0:
                raise ConfigurationError(f"bad obstacle {o}; expected (cx, cy, radius>0)")
        obs = np.array(self.obstacles, dtype=float).reshape(-1, 3)
        obs.setflags(write=False)
        object.__setattr__(self, "_obs", obs)
        for name in ("start", "goal"):
            p = np.asarray(getattr(self, name))
            if not (xmin <= p[0] <= xmax and ymin <= p[1] <= ymax):
                raise ConfigurationError(f"{name} {tuple(p)} outside bounds")

    @property
    def lower(self) -> np.ndarray:
        return np.array([self.bounds[0], self.bounds[2]])

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.bounds[1], self.bounds[3]])

    def validate_safe_endpoints(self):
        for name in ("start", "goal"):
            if not is_safe(self, np.asarray(getattr(self, name))):
                raise ConfigurationError(f"{name} {getattr(self, name)} lies inside an obstacle")


def is_safe(cfg: NavEnvConfig, s) -> int:
    """0 inside any open obstacle disk, 1 otherwise (disk boundary is safe)."""
    obs = cfg._obs
    if obs.shape[0] == 0:
        return 1
    d2 = (s[0] - obs[:, 0]) ** 2 + (s[1] - obs[:, 1]) ** 2
    return int(not np.any(d2 < obs[:, 2] ** 2))


def is_safe_batch(cfg: NavEnvConfig, pts: np.ndarray) -> np.ndarray:
    pts = np.atleast_2d(pts)
    obs = cfg._obs
    if obs.shape[0] == 0:
        return np.ones(len(pts), dtype=np.int8)
    d2 = ((pts[:, None, :] - obs[None, :, :2]) ** 2).sum(axis=-1)
    return (~np.any(d2 < obs[None, :, 2] ** 2, axis=1)).astype(np.int8)


def step(cfg: NavEnvConfig, s, a) -> np.ndarray:
    """Euler step s + a*T_s, clipped to the box."""
    nxt = np.asarray(s, dtype=float) + np.asarray(a, dtype=float) * cfg.step_scale
    return np.clip(nxt, cfg.lower, cfg.upper)


def reward(cfg: NavEnvConfig, s) -> float:
    dx = s[0] - cfg.goal[0]
    dy = s[1] - cfg.goal[1]
    return -(dx * dx + dy * dy)


def sample_safe_uniform(cfg: NavEnvConfig, rng: RngStream, max_tries: int = MAX_REJECTIONS) -> np.ndarray:
    """Rejection-sample a uniform point of the safe set."""
    xmin, xmax, ymin, ymax = cfg.bounds
    for _ in range(max_tries):
        p = np.array([xmin + (xmax - xmin) * rng.uniform(), ymin + (ymax - ymin) * rng.uniform()])
        if is_safe(cfg, p):
            return p
    raise ConfigurationError(f"no safe point found in {max_tries} proposals; safe set is degenerate")


def rollout(cfg: NavEnvConfig, policy, s0, rng: RngStream) -> Trajectory:
    """Run one full-horizon episode (no early stop on violation).

    ``policy`` only needs ``sample_action(s, rng) -> 2-vector``.
    """
    horizon = cfg.horizon
    states = np.empty((horizon + 1, 2))
    actions = np.empty((horizon, 2))
    rewards = np.empty(horizon)
    s = np.asarray(s0, dtype=float)
    states[0] = s
    for t in range(horizon):
        a = policy.sample_action(s, rng)
        actions[t] = a
        rewards[t] = reward(cfg, s)
        s = step(cfg, s, a)
        states[t + 1] = s
    return Trajectory(states, actions, rewards, is_safe_batch(cfg, states))
