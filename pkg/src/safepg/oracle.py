"""Exact oracle for small finite-horizon MDPs.

Everything here is computed by exhaustive enumeration or exhaustive search,
so it can serve as ground truth for the Monte Carlo estimators:

* path enumeration and exact expectations of joint safety, returns and the
  averaged safety indicator,
* finite-difference and complex-step gradients of those expectations,
* a check of the one-step recursion for the gradient of E[G_t | S_{t-1}],
* the Lagrangian dual of the averaged-safety constrained problem, solved by
  backward induction plus golden-section search, against a brute-force
  primal over mixtures of deterministic policies,
* feasibility verdicts for the three nested constraint sets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import estimators
from .core import Trajectory
from .policy import SoftmaxTabularPolicy
from .rng import RngStream

MAX_PATHS = 10**7
MAX_DETERMINISTIC_POLICIES = 2**20
ROW_TOL = 1e-12
PARSE_ROW_TOL = 1e-9


class OracleGuardError(ValueError):
    """Instance too large for exhaustive enumeration."""


class InfeasibleError(ValueError):
    pass


@dataclass
class TabularMdp:
    transition: np.ndarray  # (S, A, S')
    reward: np.ndarray  # (S, A)
    safe: np.ndarray  # (S,) bool
    horizon: int
    s0: int = 0

    def __post_init__(self):
        self.transition = np.asarray(self.transition, dtype=float)
        self.reward = np.asarray(self.reward, dtype=float)
        safe = np.asarray(self.safe)
        if safe.dtype != bool:
            safe = safe.astype(bool)
        self.safe = safe
        n_s, n_a, n_s2 = self.transition.shape
        if n_s != n_s2:
            raise ValueError(f"transition must be (S, A, S), got {self.transition.shape}")
        if self.reward.shape != (n_s, n_a):
            raise ValueError(f"reward must be ({n_s}, {n_a}), got {self.reward.shape}")
        if self.safe.shape != (n_s,):
            raise ValueError("safe mask must have one entry per state")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if np.any(self.transition < 0):
            raise ValueError("negative transition probability")
        rows = self.transition.sum(axis=-1)
        if np.any(np.abs(rows - 1.0) > ROW_TOL):
            raise ValueError(f"transition rows must sum to 1 (max deviation {np.abs(rows - 1).max():.3g})")
        if not 0 <= self.s0 < n_s or not self.safe[self.s0]:
            raise ValueError(f"initial state {self.s0} must be a valid safe state")

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]

    @property
    def n_actions(self) -> int:
        return self.transition.shape[1]

    def n_paths_bound(self) -> int:
        return (self.n_states * self.n_actions) ** self.horizon

    def check_guard(self):
        if self.n_paths_bound() > MAX_PATHS:
            raise OracleGuardError(
                f"(S*A)^T = {self.n_paths_bound()} exceeds the enumeration guard {MAX_PATHS}"
            )

    def uniform_policy(self, stationary: bool = False) -> SoftmaxTabularPolicy:
        shape = (self.n_states, self.n_actions) if stationary else (self.n_states, self.n_actions, self.horizon)
        return SoftmaxTabularPolicy(np.zeros(shape))

    # text format ------------------------------------------------------

    def dumps(self) -> str:
        lines = [f"tabular S={self.n_states} A={self.n_actions} T={self.horizon} s0={self.s0}"]
        lines.append("safe " + " ".join(str(i) for i in np.flatnonzero(self.safe)))
        for s in range(self.n_states):
            for a in range(self.n_actions):
                lines.append(f"r {s} {a} {self.reward[s, a]:.17g}")
        for s in range(self.n_states):
            for a in range(self.n_actions):
                for s2 in range(self.n_states):
                    lines.append(f"p {s} {a} {s2} {self.transition[s, a, s2]:.17g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "TabularMdp":
        header = None
        safe_idx: list[int] = []
        rewards: dict = {}
        probs: dict = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.split()
            try:
                if tok[0] == "tabular":
                    header = {k: int(v) for k, v in (t.split("=", 1) for t in tok[1:])}
                elif tok[0] == "safe":
                    safe_idx.extend(int(t) for t in tok[1:])
                elif tok[0] == "r" and len(tok) == 4:
                    rewards[int(tok[1]), int(tok[2])] = float(tok[3])
                elif tok[0] == "p" and len(tok) == 5:
                    probs[int(tok[1]), int(tok[2]), int(tok[3])] = float(tok[4])
                else:
                    raise ValueError(f"unrecognized record {tok[0]!r}")
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from exc
        if header is None or not {"S", "A", "T", "s0"} <= header.keys():
            raise ValueError("missing 'tabular S=.. A=.. T=.. s0=..' header")
        n_s, n_a = header["S"], header["A"]
        trans = np.zeros((n_s, n_a, n_s))
        for (s, a, s2), p in probs.items():
            trans[s, a, s2] = p
        rew = np.zeros((n_s, n_a))
        for (s, a), r in rewards.items():
            rew[s, a] = r
        rows = trans.sum(axis=-1)
        bad = np.argwhere(np.abs(rows - 1.0) > PARSE_ROW_TOL)
        if len(bad):
            s, a = bad[0]
            raise ValueError(f"transition row (s={s}, a={a}) sums to {rows[s, a]!r}, not 1")
        # hand-written files may be rounded; exact dumps are kept bit for bit
        loose = np.abs(rows - 1.0) > ROW_TOL
        trans[loose] /= rows[loose][:, None]
        safe = np.zeros(n_s, dtype=bool)
        safe[safe_idx] = True
        return cls(trans, rew, safe, header["T"], header["s0"])

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> "TabularMdp":
        return cls.loads(Path(path).read_text())


def random_mdp(
    rng: RngStream,
    n_states: int,
    n_actions: int,
    horizon: int,
    safe_action: bool = False,
) -> TabularMdp:
    """Random instance with s0 = 0 safe and at least one unsafe state.

    With ``safe_action`` action 0 keeps every safe state inside the safe
    set, so any averaged-safety level in [0, 1] is attainable.
    """
    if n_states < 2:
        raise ValueError("need at least two states (one safe, one unsafe)")
    safe = np.array([True] + [rng.uniform() < 0.5 for _ in range(n_states - 1)])
    if safe.all():
        safe[1 + int(rng.uniform() * (n_states - 1))] = False
    # Dirichlet(1) rows: normalized exponential draws
    raw = np.array([-math.log(1.0 - rng.uniform()) for _ in range(n_states * n_actions * n_states)])
    raw = raw.reshape(n_states, n_actions, n_states)
    if safe_action:
        for s in np.flatnonzero(safe):
            raw[s, 0, ~safe] = 0.0
    trans = raw / raw.sum(axis=-1, keepdims=True)
    reward = np.array([2.0 * rng.uniform() - 1.0 for _ in range(n_states * n_actions)]).reshape(n_states, n_actions)
    return TabularMdp(trans, reward, safe, horizon, 0)


def random_policy(rng: RngStream, mdp: TabularMdp, scale: float = 1.0) -> SoftmaxTabularPolicy:
    shape = (mdp.n_states, mdp.n_actions, mdp.horizon)
    logits = np.array([scale * rng.normal() for _ in range(int(np.prod(shape)))]).reshape(shape)
    return SoftmaxTabularPolicy(logits)


# enumeration ----------------------------------------------------------


def _stage_probs(logits: np.ndarray, t: int) -> np.ndarray:
    z = logits if logits.ndim == 2 else logits[:, :, t]
    z = z - z.real.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def enumerate_paths(mdp: TabularMdp, logits: np.ndarray, start: int | None = None, t_start: int = 0):
    """Vectorized enumeration of every path from ``start`` at stage ``t_start``.

    Returns ``(states, actions, probs)`` with shapes (N, L+1), (N, L), (N,)
    where L = T - t_start. Zero-probability branches are pruned. ``logits``
    may be complex.
    """
    mdp.check_guard()
    start = mdp.s0 if start is None else start
    n_s, n_a = mdp.n_states, mdp.n_actions
    states = np.array([[start]], dtype=np.int64)
    actions = np.zeros((1, 0), dtype=np.int64)
    probs = np.ones(1, dtype=np.result_type(logits.dtype, float))
    a_idx = np.repeat(np.arange(n_a), n_s)
    s_idx = np.tile(np.arange(n_s), n_a)
    for t in range(t_start, mdp.horizon):
        pi = _stage_probs(logits, t)
        cur = states[:, -1]
        w = probs[:, None, None] * pi[cur][:, :, None] * mdp.transition[cur]  # (N, A, S)
        w = w.reshape(len(cur), -1)
        keep = mdp.transition[cur].reshape(len(cur), -1) > 0
        keep &= (pi[cur].real > 0)[:, a_idx]
        rows, cols = np.nonzero(keep)
        states = np.column_stack([states[rows], s_idx[cols]])
        actions = np.column_stack([actions[rows], a_idx[cols]])
        probs = w[rows, cols]
    return states, actions, probs


def enumerate_trajectories(mdp: TabularMdp, policy: SoftmaxTabularPolicy) -> list[tuple[Trajectory, float]]:
    """Every positive-probability trajectory with its probability."""
    states, actions, probs = enumerate_paths(mdp, policy.logits)
    out = []
    for st, ac, p in zip(states, actions, probs):
        traj = Trajectory(st, ac, mdp.reward[st[:-1], ac], mdp.safe[st].astype(np.int8))
        out.append((traj, float(p.real)))
    return out


def _safety_prob(mdp, logits):
    states, _, probs = enumerate_paths(mdp, logits)
    return (probs * mdp.safe[states].all(axis=1)).sum()


def _value(mdp, logits, mu=0.0, terminal_bonus=False):
    states, actions, probs = enumerate_paths(mdp, logits)
    flags = mdp.safe[states].astype(float)
    ret = mdp.reward[states[:, :-1], actions].sum(axis=1) + mu * flags[:, :-1].sum(axis=1)
    if terminal_bonus:
        ret = ret + mu * flags[:, -1]
    return (probs * ret).sum()


def _vc(mdp, logits, normalized=True):
    states, _, probs = enumerate_paths(mdp, logits)
    count = mdp.safe[states].sum(axis=1)
    if normalized:
        count = count / (mdp.horizon + 1)
    return (probs * count).sum()


def exact_safety_prob(mdp: TabularMdp, policy: SoftmaxTabularPolicy) -> float:
    """P(S_t safe for all t = 0..T)."""
    return float(_safety_prob(mdp, policy.logits).real)


def exact_value(mdp: TabularMdp, policy: SoftmaxTabularPolicy, mu: float = 0.0, terminal_bonus: bool = False) -> float:
    """E[sum_{t<T} r(S_t, A_t) + mu * 1(S_t safe)]."""
    return float(_value(mdp, policy.logits, mu, terminal_bonus).real)


def exact_vc(mdp: TabularMdp, policy: SoftmaxTabularPolicy, normalized: bool = True) -> float:
    """E[(1/(T+1)) sum_{t=0}^{T} 1(S_t safe)] (unnormalized sum if asked)."""
    return float(_vc(mdp, policy.logits, normalized).real)


def exact_estimator_expectation(
    mdp: TabularMdp,
    policy: SoftmaxTabularPolicy,
    which: str = "safety",
    mu: float = 0.0,
    terminal_bonus: bool = False,
    estimator=None,
) -> np.ndarray:
    """Sum over trajectories of Pr(tau) * estimator(tau).

    ``estimator`` overrides the per-trajectory function (used for negative
    controls); by default it is taken from :mod:`safepg.estimators`.
    """
    if estimator is None:
        if which == "safety":
            estimator = estimators.grad_safety_prob
        elif which == "value":
            def estimator(traj, pol):
                return estimators.grad_value(traj, pol, mu, terminal_bonus)
        else:
            raise ValueError(f"unknown estimator {which!r}")
    total = np.zeros(policy.param_shape)
    for traj, p in enumerate_trajectories(mdp, policy):
        total += p * estimator(traj, policy)
    return total


def _target_fn(target: str, mu: float, terminal_bonus: bool):
    if target == "safety_prob":
        return _safety_prob
    if target == "value":
        return lambda m, z: _value(m, z, mu, terminal_bonus)
    if target == "vc":
        return _vc
    raise ValueError(f"unknown target {target!r}")


def finite_diff_grad(
    mdp: TabularMdp,
    policy: SoftmaxTabularPolicy,
    target: str = "safety_prob",
    h: float = 1e-5,
    mu: float = 0.0,
    terminal_bonus: bool = False,
) -> np.ndarray:
    """Central differences of an exact target over every logit."""
    if not 1e-7 <= h <= 1e-3:
        raise ValueError(f"step h={h} outside [1e-7, 1e-3]")
    fn = _target_fn(target, mu, terminal_bonus)
    base = np.asarray(policy.logits, dtype=float)
    grad = np.zeros(base.shape)
    for idx in np.ndindex(base.shape):
        up = base.copy()
        dn = base.copy()
        up[idx] += h
        dn[idx] -= h
        grad[idx] = (fn(mdp, up).real - fn(mdp, dn).real) / (2.0 * h)
    return grad


def complex_step_grad(fn, logits: np.ndarray, h: float = 1e-30) -> np.ndarray:
    """Gradient of a real-analytic ``fn(logits)`` to machine precision."""
    base = np.asarray(logits, dtype=complex)
    grad = np.zeros(base.shape)
    for idx in np.ndindex(base.shape):
        z = base.copy()
        z[idx] += 1j * h
        grad[idx] = np.imag(fn(z)) / h
    return grad


def relative_error(approx: np.ndarray, exact: np.ndarray, floor: float = 1e-8) -> float:
    """max|approx - exact| / max(max|exact|, floor)."""
    scale = max(float(np.max(np.abs(exact))), floor)
    return float(np.max(np.abs(np.asarray(approx) - np.asarray(exact)))) / scale


# gradient recursion ---------------------------------------------------


def _cond_tail(mdp: TabularMdp, logits, s: int, t: int):
    """E[G_t | S_{t-1} = s] with G_t = prod_{u=t}^{T} 1(S_u safe)."""
    states, _, probs = enumerate_paths(mdp, logits, start=s, t_start=t - 1)
    return (probs * mdp.safe[states[:, 1:]].all(axis=1)).sum()


def verify_recursion(mdp: TabularMdp, policy: SoftmaxTabularPolicy, t: int):
    """Both sides of the one-step recursion for grad E[G_t | S_{t-1}].

    lhs  = grad E[G_t | S_{t-1}=s]
    rhs  = E[grad E[G_{t+1} | S_t] 1(S_t safe) | S_{t-1}=s]
           + E[G_t grad log pi(A_{t-1} | S_{t-1}) | S_{t-1}=s]

    Conditional-expectation gradients use complex-step differentiation of
    enumerated expectations; the score term uses the analytic softmax
    score. Returns (lhs, rhs, max_abs_diff) with one row per safe state s.
    """
    T = mdp.horizon
    if not 1 <= t <= T - 1:
        raise ValueError(f"recursion is defined for 1 <= t <= T-1, got t={t} with T={T}")
    logits = np.asarray(policy.logits, dtype=float)
    safe_states = np.flatnonzero(mdp.safe)
    next_grad = {
        s2: complex_step_grad(lambda z, s2=s2: _cond_tail(mdp, z, s2, t + 1), logits)
        for s2 in safe_states
    }
    lhs = []
    rhs = []
    for s in safe_states:
        lhs.append(complex_step_grad(lambda z: _cond_tail(mdp, z, s, t), logits))
        pi = policy.probs(t - 1)[s].real
        first = np.zeros(logits.shape)
        for a in range(mdp.n_actions):
            for s2 in safe_states:
                w = pi[a] * mdp.transition[s, a, s2]
                if w > 0:
                    first += w * next_grad[s2]
        states, actions, probs = enumerate_paths(mdp, logits, start=s, t_start=t - 1)
        g_t = mdp.safe[states[:, 1:]].all(axis=1)
        second = np.zeros(logits.shape)
        for a in range(mdp.n_actions):
            mass = float(probs[g_t & (actions[:, 0] == a)].sum())
            if mass > 0:
                second += mass * policy.score(s, a, t - 1)
        rhs.append(first + second)
    lhs = np.array(lhs)
    rhs = np.array(rhs)
    return lhs, rhs, float(np.max(np.abs(lhs - rhs))) if len(lhs) else 0.0


# duality --------------------------------------------------------------


def _vc_scale(mdp: TabularMdp, normalized: bool) -> float:
    return 1.0 / (mdp.horizon + 1) if normalized else 1.0


def evaluate_deterministic(mdp: TabularMdp, plans: np.ndarray, normalized: bool = True):
    """Exact (V, V_c) of deterministic Markov policies.

    ``plans`` has shape (B, T, S) (or (T, S) for one policy) with the action
    taken in each state at each stage.
    """
    plans = np.asarray(plans)
    single = plans.ndim == 2
    if single:
        plans = plans[None]
    n_b = plans.shape[0]
    n_s = mdp.n_states
    dist = np.zeros((n_b, n_s))
    dist[:, mdp.s0] = 1.0
    safe = mdp.safe.astype(float)
    value = np.zeros(n_b)
    vc = np.zeros(n_b)
    rows = np.arange(n_s)
    for t in range(mdp.horizon):
        acts = plans[:, t, :]  # (B, S)
        value += (dist * mdp.reward[rows, acts]).sum(axis=1)
        vc += dist @ safe
        dist = np.einsum("bs,bsk->bk", dist, mdp.transition[rows, acts])
    vc += dist @ safe
    vc *= _vc_scale(mdp, normalized)
    if single:
        return float(value[0]), float(vc[0])
    return value, vc


def all_deterministic_values(mdp: TabularMdp, normalized: bool = True):
    """Brute-force (plans, V, V_c) over every time-indexed deterministic policy."""
    n_free = mdp.n_states * mdp.horizon
    count = mdp.n_actions**n_free
    if count > MAX_DETERMINISTIC_POLICIES:
        raise OracleGuardError(f"{count} deterministic policies exceed the guard {MAX_DETERMINISTIC_POLICIES}")
    plans = np.array(list(itertools.product(range(mdp.n_actions), repeat=n_free)), dtype=np.int64)
    plans = plans.reshape(count, mdp.horizon, mdp.n_states)
    value, vc = evaluate_deterministic(mdp, plans, normalized)
    return plans, value, vc


def dual_function(mdp: TabularMdp, lam: float, xi: float, normalized: bool = True):
    """max over deterministic Markov policies of V + lam*(V_c - xi).

    Solved by backward induction with stage reward r(s,a) + lam*c*1(s safe)
    (c = 1/(T+1) when normalized) and terminal reward lam*c*1(s_T safe).
    Returns (value, plan) with plan of shape (T, S).
    """
    if lam < 0:
        raise ValueError("multiplier must be nonnegative")
    bonus = lam * _vc_scale(mdp, normalized) * mdp.safe.astype(float)
    w = bonus.copy()
    plan = np.zeros((mdp.horizon, mdp.n_states), dtype=np.int64)
    for t in range(mdp.horizon - 1, -1, -1):
        q = mdp.reward + bonus[:, None] + mdp.transition @ w
        plan[t] = np.argmax(q, axis=1)
        w = q[np.arange(mdp.n_states), plan[t]]
    return float(w[mdp.s0] - lam * xi), plan


@dataclass
class DualResult:
    xi: float
    lambda_star: float
    p_tilde_star: float
    d_tilde_star: float
    feasible: bool = True
    # primal optimum: mix plans[0] with weight alpha, plans[1] with 1 - alpha
    plans: tuple = field(default=(), repr=False)
    alpha: float = 1.0

    @property
    def gap(self) -> float:
        return self.d_tilde_star - self.p_tilde_star


def _pareto_points(value: np.ndarray, vc: np.ndarray):
    """Indices not weakly dominated in (V_c, V), sorted by decreasing V_c."""
    order = np.lexsort((-value, -vc))
    keep = []
    best = -np.inf
    for i in order:
        if value[i] > best:
            keep.append(i)
            best = value[i]
    return np.array(keep, dtype=np.int64)


def primal_mixture_optimum(value, vc, xi: float, tol: float = 1e-12):
    """Best episode-level mixture of two deterministic policies with V_c >= xi.

    Returns (best_value, i, j, alpha) meaning "run i w.p. alpha, else j";
    best_value is -inf if no mixture reaches xi.
    """
    idx = _pareto_points(value, vc)
    v = value[idx]
    c = vc[idx]
    feas = c >= xi - tol
    if not feas.any():
        return -math.inf, -1, -1, 0.0
    fi = np.flatnonzero(feas)
    k = fi[np.argmax(v[fi])]
    best = (float(v[k]), int(idx[k]), int(idx[k]), 1.0)
    for i in fi:
        for j in np.flatnonzero(~feas):
            alpha = (xi - c[j]) / (c[i] - c[j])
            val = alpha * v[i] + (1.0 - alpha) * v[j]
            if val > best[0]:
                best = (float(val), int(idx[i]), int(idx[j]), float(alpha))
    return best


def _golden_min(f, lo: float, hi: float, tol: float):
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return a, b


def dual_optimum(
    mdp: TabularMdp,
    xi: float,
    lambda_max: float = 1e3,
    tol: float = 1e-8,
    normalized: bool = True,
    brute=None,
) -> DualResult:
    """Dual minimizer over lambda in [0, lambda_max] and the brute-force primal.

    The dual is convex and piecewise linear in lambda. Golden-section search
    brackets the minimizer to ``tol``; the bracket's two active policies then
    give the exact kink by intersecting their lines.
    """
    plans, value, vc = brute if brute is not None else all_deterministic_values(mdp, normalized)
    p_star, i, j, alpha = primal_mixture_optimum(value, vc, xi)

    def d(lam):
        return dual_function(mdp, lam, xi, normalized)[0]

    a, b = _golden_min(d, 0.0, lambda_max, tol)
    candidates = [0.0, a, b]
    lines = []
    for lam in (a, b):
        _, plan = dual_function(mdp, lam, xi, normalized)
        lines.append(evaluate_deterministic(mdp, plan, normalized))
    (v1, c1), (v2, c2) = lines
    if abs(c1 - c2) > 1e-15:
        kink = (v2 - v1) / (c1 - c2)
        if 0.0 <= kink <= lambda_max:
            candidates.append(kink)
    vals = [d(lam) for lam in candidates]
    k = int(np.argmin(vals))
    feasible = math.isfinite(p_star)
    mix = (plans[i], plans[j]) if feasible else ()
    return DualResult(xi, candidates[k], p_star, vals[k], feasible, mix, alpha)


def check_dual_bound(mdp: TabularMdp, xi0: float, xi1: float, normalized: bool = True, brute=None):
    """Evaluate P*(xi1) <= P*(xi0) + lambda*(xi0) (xi0 - xi1).

    Returns (holds, slack) with slack = rhs - lhs.
    """
    brute = brute if brute is not None else all_deterministic_values(mdp, normalized)
    r0 = dual_optimum(mdp, xi0, normalized=normalized, brute=brute)
    r1 = dual_optimum(mdp, xi1, normalized=normalized, brute=brute)
    if not (r0.feasible and r1.feasible):
        raise InfeasibleError(f"xi0={xi0} or xi1={xi1} is not attainable")
    slack = r0.p_tilde_star + r0.lambda_star * (xi0 - xi1) - r1.p_tilde_star
    return slack >= -1e-9, float(slack)


# feasible sets --------------------------------------------------------


@dataclass(frozen=True)
class FeasibilityVerdict:
    in_F_hat: bool
    in_F: bool
    in_F_bar: bool
    p_joint: float
    v_c: float
    expected_unsafe: float
    delta: float

    @property
    def chain_holds(self) -> bool:
        return (not self.in_F_hat or self.in_F) and (not self.in_F or self.in_F_bar)


def feasibility_verdict(mdp: TabularMdp, policy: SoftmaxTabularPolicy, delta: float) -> FeasibilityVerdict:
    """Membership in the three constraint sets.

    F     : P(all safe) >= 1 - delta
    F_bar : E[(1/(T+1)) sum 1(S_t safe)] >= 1 - delta
    F_hat : E[sum 1(S_t unsafe)] <= delta, which implies F via Markov's inequality
    """
    states, _, probs = enumerate_paths(mdp, policy.logits)
    flags = mdp.safe[states]
    p_joint = float((probs * flags.all(axis=1)).sum())
    n_safe = flags.sum(axis=1)
    v_c = float((probs * n_safe).sum()) / (mdp.horizon + 1)
    unsafe = float((probs * (mdp.horizon + 1 - n_safe)).sum())
    return FeasibilityVerdict(
        in_F_hat=unsafe <= delta,
        in_F=p_joint >= 1.0 - delta,
        in_F_bar=v_c >= 1.0 - delta,
        p_joint=p_joint,
        v_c=v_c,
        expected_unsafe=unsafe,
        delta=delta,
    )
