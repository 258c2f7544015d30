"""Stochastic gradient ascent for the probabilistic and cumulative formulations."""

from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass

import numpy as np

from . import nav
from .estimators import batch_average, grad_lagrangian, grad_value
from .policy import RbfGaussianPolicy
from .rng import RngStream

log = logging.getLogger(__name__)

FORMULATIONS = ("probabilistic", "cumulative")
LOG_COLUMNS = ("iter", "episode_return", "joint_safe", "grad_norm", "wall_ms")


class TrainingAborted(RuntimeError):
    def __init__(self, message, policy, records):
        super().__init__(message)
        self.policy = policy
        self.records = records


@dataclass(frozen=True)
class TrainConfig:
    formulation: str = "probabilistic"
    weight: float = 6.0  # lambda (probabilistic) or mu (cumulative)
    eta: float = 0.002
    episodes: int = 10_000
    batch_size: int = 1
    seed: int = 0
    start_mode: str = "fixed"  # or "uniform_safe"
    terminal_bonus: bool = True
    log_every: int = 100
    grad_clip: float = 0.0  # 0 disables; otherwise cap on the update's L2 norm
    baseline: bool = False  # running mean-return baseline, cumulative only
    timing: bool = False  # record wall_ms; off keeps logs byte-reproducible
    checkpoint_every: int = 0

    def __post_init__(self):
        if self.formulation not in FORMULATIONS:
            raise ValueError(f"formulation must be one of {FORMULATIONS}, got {self.formulation!r}")
        if not self.eta > 0:
            raise ValueError("eta must be > 0")
        if self.weight < 0:
            raise ValueError("weight must be >= 0")
        if self.episodes < 0:
            raise ValueError("episodes must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.log_every < 1:
            raise ValueError("log_every must be >= 1")
        if self.start_mode not in ("fixed", "uniform_safe"):
            raise ValueError(f"unknown start_mode {self.start_mode!r}")


@dataclass(frozen=True)
class StepRecord:
    iter: int
    episode_return: float
    joint_safe: float
    grad_norm: float
    wall_ms: float = 0.0


def _start_state(env: nav.NavEnvConfig, cfg: TrainConfig, rng: RngStream):
    if cfg.start_mode == "fixed":
        return np.asarray(env.start)
    return nav.sample_safe_uniform(env, rng)


def _apply(policy, grad, cfg: TrainConfig, k: int, returns, safe):
    norm = float(np.linalg.norm(grad))
    if not np.all(np.isfinite(grad)):
        raise FloatingPointError(f"non-finite gradient at iteration {k}")
    if cfg.grad_clip > 0 and norm > cfg.grad_clip:
        grad = grad * (cfg.grad_clip / norm)
    new = policy.with_params(policy.theta + cfg.eta * grad)
    rec = StepRecord(k, float(np.mean(returns)), float(np.mean(safe)), norm)
    return new, rec


def train_step_probabilistic(policy, cfg: TrainConfig, env: nav.NavEnvConfig, rng: RngStream, k: int = 0):
    """theta += eta * mean(grad V + lambda * grad P(all safe)) over a batch."""
    grads, returns, safe = [], [], []
    for _ in range(cfg.batch_size):
        traj = nav.rollout(env, policy, _start_state(env, cfg, rng), rng)
        grads.append(grad_lagrangian(traj, policy, cfg.weight))
        returns.append(traj.total_reward)
        safe.append(traj.joint_safe)
    return _apply(policy, batch_average(grads), cfg, k, returns, safe)


def train_step_cumulative(
    policy, cfg: TrainConfig, env: nav.NavEnvConfig, rng: RngStream, k: int = 0, baseline: float | None = None
):
    """theta += eta * mean(sum_t R_{t,mu} grad log pi(A_t|S_t)) over a batch."""
    grads, returns, safe = [], [], []
    for _ in range(cfg.batch_size):
        traj = nav.rollout(env, policy, _start_state(env, cfg, rng), rng)
        grads.append(grad_value(traj, policy, cfg.weight, cfg.terminal_bonus, baseline))
        returns.append(traj.total_reward)
        safe.append(traj.joint_safe)
    return _apply(policy, batch_average(grads), cfg, k, returns, safe)


def train(cfg: TrainConfig, env: nav.NavEnvConfig, policy0: RbfGaussianPolicy, rng: RngStream | None = None,
          checkpoint_path=None):
    """Run ``cfg.episodes`` updates; returns (final policy, list of log rows).

    A row is kept every ``log_every`` iterations (the first iteration of each
    block). On a non-finite gradient the last good policy is checkpointed
    (when a path is given) and :class:`TrainingAborted` is raised.
    """
    rng = rng if rng is not None else RngStream(cfg.seed, 1)
    policy = policy0
    records: list[StepRecord] = []
    baseline = None
    for k in range(cfg.episodes):
        t0 = time.perf_counter()
        try:
            if cfg.formulation == "probabilistic":
                new, rec = train_step_probabilistic(policy, cfg, env, rng, k)
            else:
                new, rec = train_step_cumulative(policy, cfg, env, rng, k, baseline if cfg.baseline else None)
        except FloatingPointError as exc:
            if checkpoint_path is not None:
                policy.save(checkpoint_path)
            raise TrainingAborted(str(exc), policy, records) from exc
        policy = new
        if cfg.baseline:
            ret = rec.episode_return
            baseline = ret if baseline is None else 0.99 * baseline + 0.01 * ret
        if k % cfg.log_every == 0:
            if cfg.timing:
                rec = StepRecord(rec.iter, rec.episode_return, rec.joint_safe, rec.grad_norm,
                                 1000.0 * (time.perf_counter() - t0))
            records.append(rec)
            log.debug("iter %d return %.2f safe %d |g| %.3g", k, rec.episode_return, rec.joint_safe, rec.grad_norm)
        if checkpoint_path is not None and cfg.checkpoint_every and (k + 1) % cfg.checkpoint_every == 0:
            policy.save(checkpoint_path)
    if checkpoint_path is not None:
        policy.save(checkpoint_path)
    return policy, records


def write_log(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LOG_COLUMNS)
        for r in records:
            w.writerow([r.iter, repr(r.episode_return), repr(r.joint_safe), repr(r.grad_norm), repr(r.wall_ms)])


def n_log_rows(episodes: int, log_every: int) -> int:
    return math.ceil(episodes / log_every)
