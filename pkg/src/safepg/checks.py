"""Batch verification runs over random tabular instances.

``gradient_check`` compares the exact expectation of the safety-probability
estimator with finite differences of the exact probability and checks the
one-step gradient recursion. ``lemma_check`` sweeps the feasible-set
inclusions and the dual bound. Both return plain result objects; the CLI
turns them into tables and exit codes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .rng import RngStream

ESTIMATOR_TOL = 1e-6
RECURSION_TOL = 1e-9
DUAL_SLACK_TOL = 1e-9
DUAL_GAP_TOL = 1e-8
CONCAVITY_TOL = 1e-9
# E[sum 1(safe)] >= P(all safe) * (T+1) is tight when P = 1; allow float rounding
MARKOV_RTOL = 1e-12


def instance_shape(i: int) -> tuple[int, int]:
    """(n_states, horizon) cycling through 2-4 states and T = 2-4."""
    return 2 + i % 3, 2 + (i // 3) % 3


def gradcheck_instance(seed: int, i: int):
    rng = RngStream(seed, i)
    n_states, horizon = instance_shape(i)
    mdp = oracle.random_mdp(rng, n_states, 2, horizon)
    return mdp, oracle.random_policy(rng, mdp)


@dataclass
class GradcheckRow:
    index: int
    n_states: int
    horizon: int
    estimator_rel_err: float
    recursion_abs_err: float
    mdp: oracle.TabularMdp = field(repr=False)
    policy: object = field(repr=False)

    @property
    def ok(self) -> bool:
        return self.estimator_rel_err < ESTIMATOR_TOL and self.recursion_abs_err < RECURSION_TOL


def gradient_check(instances: int = 25, seed: int = 0, estimator=None, h: float = 1e-5) -> list[GradcheckRow]:
    if instances < 1:
        raise ValueError("need at least one instance")
    rows = []
    for i in range(instances):
        mdp, policy = gradcheck_instance(seed, i)
        expect = oracle.exact_estimator_expectation(mdp, policy, "safety", estimator=estimator)
        fd = oracle.finite_diff_grad(mdp, policy, "safety_prob", h)
        rec = max((oracle.verify_recursion(mdp, policy, t)[2] for t in range(1, mdp.horizon)), default=0.0)
        rows.append(GradcheckRow(i, mdp.n_states, mdp.horizon, oracle.relative_error(expect, fd), rec, mdp, policy))
    return rows


@dataclass
class LemmaReport:
    samples: int = 0
    chain_violations: int = 0
    markov_violations: int = 0
    counts: dict = field(default_factory=lambda: {"F_hat": 0, "F": 0, "F_bar": 0})
    dual_instances: int = 0
    xi_grid: tuple = ()
    infeasible_points: int = 0
    min_slack: float = math.inf
    max_gap: float = 0.0
    monotone_violations: int = 0
    concavity_violations: int = 0
    counterexamples: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (
            self.chain_violations == 0
            and self.markov_violations == 0
            and self.min_slack >= -DUAL_SLACK_TOL
            and self.max_gap < DUAL_GAP_TOL
            and self.monotone_violations == 0
            and self.concavity_violations == 0
            and self.infeasible_points == 0
        )


def feasibility_sample(seed: int, i: int):
    """Random (mdp, policy, delta); policy sharpness varies so all three sets get members."""
    rng = RngStream(seed, 2**32 + i)
    n_states = 2 + int(rng.uniform() * 3)
    horizon = 2 + int(rng.uniform() * 3)
    mdp = oracle.random_mdp(rng, n_states, 2, horizon, safe_action=rng.uniform() < 0.5)
    policy = oracle.random_policy(rng, mdp, scale=8.0 * rng.uniform())
    delta = rng.uniform() ** 2
    return mdp, policy, delta


def xi_grid(points: int = 11) -> tuple:
    return tuple(k / (points - 1) for k in range(points))


def lemma_check(samples: int = 10_000, dual_instances: int = 10, points: int = 11, seed: int = 0,
                normalized: bool = True, max_counterexamples: int = 5) -> LemmaReport:
    rep = LemmaReport()
    for i in range(samples):
        mdp, policy, delta = feasibility_sample(seed, i)
        v = oracle.feasibility_verdict(mdp, policy, delta)
        rep.samples += 1
        rep.counts["F_hat"] += v.in_F_hat
        rep.counts["F"] += v.in_F
        rep.counts["F_bar"] += v.in_F_bar
        bad = False
        if not v.chain_holds:
            rep.chain_violations += 1
            bad = True
        t1 = mdp.horizon + 1
        if v.v_c * t1 < v.p_joint * t1 * (1.0 - MARKOV_RTOL):
            rep.markov_violations += 1
            bad = True
        if bad and len(rep.counterexamples) < max_counterexamples:
            rep.counterexamples.append(("feasibility", i, mdp, policy, delta))

    grid = xi_grid(points)
    rep.xi_grid = grid
    for i in range(dual_instances):
        rng = RngStream(seed, 2**33 + i)
        n_states, horizon = instance_shape(i)
        mdp = oracle.random_mdp(rng, n_states, 2, horizon, safe_action=True)
        brute = oracle.all_deterministic_values(mdp, normalized)
        results = [oracle.dual_optimum(mdp, xi, normalized=normalized, brute=brute) for xi in grid]
        rep.dual_instances += 1
        bad = False
        if not all(r.feasible for r in results):
            rep.infeasible_points += sum(not r.feasible for r in results)
            bad = True
        else:
            p = np.array([r.p_tilde_star for r in results])
            rep.max_gap = max(rep.max_gap, max(abs(r.gap) for r in results))
            for a, r0 in enumerate(results):
                slack = p[a] + r0.lambda_star * (grid[a] - np.array(grid)) - p
                rep.min_slack = min(rep.min_slack, float(slack.min()))
            mono = int(np.sum(np.diff(p) > CONCAVITY_TOL))
            conc = int(np.sum(p[1:-1] < 0.5 * (p[:-2] + p[2:]) - CONCAVITY_TOL))
            rep.monotone_violations += mono
            rep.concavity_violations += conc
            bad = mono > 0 or conc > 0 or rep.min_slack < -DUAL_SLACK_TOL or rep.max_gap >= DUAL_GAP_TOL
        if bad and len(rep.counterexamples) < max_counterexamples:
            rep.counterexamples.append(("dual", i, mdp, None, None))
    return rep
