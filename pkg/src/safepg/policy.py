"""Stochastic policies with analytic score functions.

``RbfGaussianPolicy`` drives the navigation task: a Gaussian with fixed
diagonal covariance whose mean is a linear combination of Gaussian radial
basis functions on a square lattice. ``SoftmaxTabularPolicy`` is the
time-indexed softmax used by the exact tabular oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .rng import RngStream

LOG_2PI = math.log(2.0 * math.pi)


def lattice_centers(spacing: float = 0.25, lo: float = 0.0, hi: float = 10.0) -> np.ndarray:
    n = int(round((hi - lo) / spacing)) + 1
    grid = lo + spacing * np.arange(n)
    xx, yy = np.meshgrid(grid, grid, indexing="ij")
    return np.column_stack([xx.ravel(), yy.ravel()])


@dataclass(frozen=True)
class RbfGaussianPolicy:
    """pi_theta(a|s) = N(a; theta^T phi(s), diag(cov)).

    ``theta`` has shape (d, 2): one RBF weight vector per action axis.
    ``cutoff`` zeroes features below the given value (0 disables).
    """

    centers: np.ndarray
    theta: np.ndarray
    sigma: float = 0.5
    cov: tuple = (0.5, 0.5)
    spacing: float = 0.25
    cutoff: float = 0.0
    _inv_cov: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0")
        if len(self.cov) != 2 or min(self.cov) <= 0:
            raise ValueError(f"covariance diagonal must be positive, got {self.cov}")
        centers = np.asarray(self.centers, dtype=float)
        theta = np.asarray(self.theta, dtype=float)
        if theta.shape != (len(centers), 2):
            raise ValueError(f"theta shape {theta.shape} does not match {len(centers)} centers")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "cov", (float(self.cov[0]), float(self.cov[1])))
        object.__setattr__(self, "_inv_cov", 1.0 / np.array(self.cov))

    @classmethod
    def default(cls, sigma: float = 0.5, cov=(0.5, 0.5), spacing: float = 0.25, cutoff: float = 0.0):
        centers = lattice_centers(spacing)
        return cls(centers, np.zeros((len(centers), 2)), sigma, tuple(cov), spacing, cutoff)

    @property
    def d(self) -> int:
        return len(self.centers)

    @property
    def param_shape(self) -> tuple:
        return self.theta.shape

    def with_params(self, theta: np.ndarray) -> "RbfGaussianPolicy":
        return replace(self, theta=theta)

    def features(self, s) -> np.ndarray:
        d2 = ((self.centers - np.asarray(s, dtype=float)) ** 2).sum(axis=1)
        phi = np.exp(-d2 / (2.0 * self.sigma**2))
        if self.cutoff > 0:
            phi[phi < self.cutoff] = 0.0
        return phi

    def features_batch(self, states) -> np.ndarray:
        states = np.atleast_2d(np.asarray(states, dtype=float))
        d2 = ((states[:, None, :] - self.centers[None, :, :]) ** 2).sum(axis=-1)
        phi = np.exp(-d2 / (2.0 * self.sigma**2))
        if self.cutoff > 0:
            phi[phi < self.cutoff] = 0.0
        return phi

    def mean(self, s) -> np.ndarray:
        return self.features(s) @ self.theta

    def sample_action(self, s, rng: RngStream) -> np.ndarray:
        mu = self.mean(s)
        z0 = rng.normal()
        z1 = rng.normal()
        return np.array([mu[0] + math.sqrt(self.cov[0]) * z0, mu[1] + math.sqrt(self.cov[1]) * z1])

    def log_prob(self, s, a) -> float:
        diff = np.asarray(a, dtype=float) - self.mean(s)
        quad = float(diff @ (self._inv_cov * diff))
        return -LOG_2PI - 0.5 * math.log(self.cov[0] * self.cov[1]) - 0.5 * quad

    def score(self, s, a) -> np.ndarray:
        """grad_theta log pi(a|s), shape (d, 2)."""
        diff = np.asarray(a, dtype=float) - self.mean(s)
        return np.outer(self.features(s), self._inv_cov * diff)

    def score_sum(self, states, actions, weights=None) -> np.ndarray:
        """sum_t w_t * score(s_t, a_t) with one batched feature evaluation."""
        phi = self.features_batch(states)
        resid = (np.asarray(actions, dtype=float) - phi @ self.theta) * self._inv_cov
        if weights is not None:
            resid = resid * np.asarray(weights, dtype=float)[:, None]
        return phi.T @ resid

    # checkpoint I/O ---------------------------------------------------

    def header(self) -> str:
        return (
            f"rbf d={self.d} sigma={self.sigma!r} cov={self.cov[0]!r},{self.cov[1]!r} "
            f"spacing={self.spacing!r}"
        )

    def dumps(self) -> str:
        lines = [self.header()]
        lines.extend(f"{x:.17g} {y:.17g}" for x, y in self.theta)
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def loads(cls, text: str, cutoff: float = 0.0) -> "RbfGaussianPolicy":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("rbf "):
            raise ValueError("checkpoint must start with an 'rbf' header line")
        meta = dict(tok.split("=", 1) for tok in lines[0].split()[1:])
        try:
            d = int(meta["d"])
            sigma = float(meta["sigma"])
            cov = tuple(float(c) for c in meta["cov"].split(","))
            spacing = float(meta["spacing"])
        except (KeyError, ValueError) as exc:
            raise ValueError(f"malformed checkpoint header: {lines[0]!r}") from exc
        rows = lines[1:]
        if len(rows) != d:
            raise ValueError(f"header declares d={d} but found {len(rows)} weight rows")
        theta = np.array([[float(v) for v in row.split()] for row in rows])
        centers = lattice_centers(spacing)
        if len(centers) != d:
            raise ValueError(f"spacing {spacing} gives {len(centers)} lattice centers, not {d}")
        return cls(centers, theta, sigma, cov, spacing, cutoff)

    @classmethod
    def load(cls, path, cutoff: float = 0.0) -> "RbfGaussianPolicy":
        return cls.loads(Path(path).read_text(), cutoff)


class SoftmaxTabularPolicy:
    """Softmax over per-(state, stage) logits.

    Logits have shape (S, A, T) for a time-indexed policy or (S, A) for a
    stationary one. Complex logits are accepted so the oracle can take
    complex-step derivatives through the policy.
    """

    def __init__(self, logits):
        logits = np.asarray(logits)
        if logits.ndim not in (2, 3):
            raise ValueError(f"logits must have shape (S, A) or (S, A, T), got {logits.shape}")
        self.logits = logits
        self.stationary = logits.ndim == 2

    @property
    def n_states(self) -> int:
        return self.logits.shape[0]

    @property
    def n_actions(self) -> int:
        return self.logits.shape[1]

    @property
    def param_shape(self) -> tuple:
        return self.logits.shape

    def _slice(self, t: int) -> np.ndarray:
        return self.logits if self.stationary else self.logits[:, :, t]

    def probs(self, t: int = 0) -> np.ndarray:
        """(S, A) table of pi(a|s, t)."""
        z = self._slice(t)
        z = z - z.real.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)

    def prob(self, s: int, a: int, t: int = 0):
        self._check(s, a, t)
        return self.probs(t)[s, a]

    def score(self, s: int, a: int, t: int = 0) -> np.ndarray:
        """grad wrt logits of log pi(a|s,t); nonzero only on the (s, :, t) slice."""
        self._check(s, a, t)
        g = np.zeros(self.logits.shape)
        p = self.probs(t)[s].real
        if self.stationary:
            g[s] = -p
            g[s, a] += 1.0
        else:
            g[s, :, t] = -p
            g[s, a, t] += 1.0
        return g

    def score_sum(self, states, actions, weights=None) -> np.ndarray:
        """sum_t w_t * score(s_t, a_t, t) for integer state/action paths."""
        g = np.zeros(self.logits.shape)
        for t, (s, a) in enumerate(zip(states, actions)):
            w = 1.0 if weights is None else weights[t]
            if w == 0.0:
                continue
            p = self.probs(t)[s].real
            idx = (s,) if self.stationary else (s, slice(None), t)
            g[idx] -= w * p
            g[idx][a] += w
        return g

    def _check(self, s, a, t):
        if not 0 <= s < self.n_states or not 0 <= a < self.n_actions:
            raise IndexError(f"(s={s}, a={a}) out of range for {self.logits.shape[:2]}")
        if not self.stationary and not 0 <= t < self.logits.shape[2]:
            raise IndexError(f"stage t={t} out of range for horizon {self.logits.shape[2]}")


def tabular_prob(p: SoftmaxTabularPolicy, s: int, a: int, t: int = 0):
    return p.prob(s, a, t)


def tabular_score(p: SoftmaxTabularPolicy, s: int, a: int, t: int = 0) -> np.ndarray:
    return p.score(s, a, t)
