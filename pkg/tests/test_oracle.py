import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from safepg import oracle
from safepg.policy import SoftmaxTabularPolicy
from safepg.rng import RngStream


def chain(p_unsafe=0.5, horizon=1):
    """State 0 safe; action 0 moves to unsafe state 1 w.p. p_unsafe, action 1 stays."""
    trans = np.array([[[1 - p_unsafe, p_unsafe], [1.0, 0.0]], [[0.0, 1.0], [0.0, 1.0]]])
    return oracle.TabularMdp(trans, np.array([[1.0, 0.0], [0.0, 0.0]]), [True, False], horizon)


def instance(seed, i, **kw):
    rng = RngStream(seed, i)
    mdp = oracle.random_mdp(rng, 2 + i % 3, 2, 2 + (i // 3) % 3, **kw)
    return mdp, oracle.random_policy(rng, mdp)


def test_mdp_validation():
    with pytest.raises(ValueError):
        oracle.TabularMdp(np.full((2, 2, 2), 0.6), np.zeros((2, 2)), [True, False], 2)
    with pytest.raises(ValueError):
        oracle.TabularMdp(np.full((2, 2, 2), 0.5), np.zeros((2, 2)), [False, True], 2)


def test_mdp_text_round_trip(tmp_path):
    mdp, _ = instance(1, 4)
    path = tmp_path / "m.mdp.txt"
    mdp.save(path)
    back = oracle.TabularMdp.load(path)
    assert np.array_equal(back.transition, mdp.transition)
    assert np.array_equal(back.reward, mdp.reward) and np.array_equal(back.safe, mdp.safe)
    assert back.horizon == mdp.horizon


def test_mdp_loads_reports_line():
    with pytest.raises(ValueError, match="line 2"):
        oracle.TabularMdp.loads("tabular S=2 A=1 T=1 s0=0\nbogus line\n")


def test_guard():
    big = oracle.TabularMdp(np.full((10, 10, 10), 0.1), np.zeros((10, 10)), [True] + [False] * 9, 8)
    with pytest.raises(oracle.OracleGuardError):
        big.check_guard()


def test_deterministic_chain_single_trajectory():
    trans = np.zeros((2, 1, 2))
    trans[0, 0, 1] = trans[1, 0, 0] = 1.0
    mdp = oracle.TabularMdp(trans, np.zeros((2, 1)), [True, True], 3)
    out = oracle.enumerate_trajectories(mdp, mdp.uniform_policy())
    assert len(out) == 1 and out[0][1] == 1.0
    assert list(out[0][0].states) == [0, 1, 0, 1]


def test_uniform_two_actions_one_step():
    trans = np.zeros((2, 2, 2))
    trans[:, 0, 0] = trans[:, 1, 1] = 1.0
    mdp = oracle.TabularMdp(trans, np.zeros((2, 2)), [True, True], 1)
    out = oracle.enumerate_trajectories(mdp, mdp.uniform_policy())
    assert sorted(p for _, p in out) == [0.5, 0.5]


@pytest.mark.parametrize("i", range(12))
def test_mass_sums_to_one(i):
    mdp, pol = instance(3, i)
    assert sum(p for _, p in oracle.enumerate_trajectories(mdp, pol)) == pytest.approx(1.0, abs=1e-10)


def test_enumeration_matches_product_formula():
    mdp, pol = instance(4, 5)
    T = mdp.horizon
    total = {}
    for acts in itertools.product(range(2), repeat=T):
        for nxt in itertools.product(range(mdp.n_states), repeat=T):
            path = (mdp.s0,) + nxt
            p = 1.0
            for t in range(T):
                p *= pol.prob(path[t], acts[t], t) * mdp.transition[path[t], acts[t], path[t + 1]]
            if p > 0:
                total[(path, acts)] = p
    enum = {(tuple(tr.states), tuple(tr.actions)): p for tr, p in oracle.enumerate_trajectories(mdp, pol)}
    assert enum.keys() == total.keys()
    for k in enum:
        assert enum[k] == pytest.approx(total[k], rel=1e-12)


def test_exact_quantities_simple():
    all_safe = oracle.TabularMdp(np.full((2, 2, 2), 0.5), np.zeros((2, 2)), [True, True], 3)
    pol = all_safe.uniform_policy()
    assert oracle.exact_safety_prob(all_safe, pol) == pytest.approx(1.0)
    assert oracle.exact_vc(all_safe, pol) == pytest.approx(1.0)
    mdp = chain(0.5)
    always_risky = SoftmaxTabularPolicy(np.array([[[50.0], [0.0]], [[0.0], [0.0]]]))
    assert oracle.exact_safety_prob(mdp, always_risky) == pytest.approx(0.5)
    assert oracle.exact_value(mdp, always_risky) == pytest.approx(1.0)


@pytest.mark.parametrize("i", range(100))
def test_vc_dominates_joint_probability(i):
    rng = RngStream(55, i)
    mdp = oracle.random_mdp(rng, 3, 2, 3)
    pol = oracle.random_policy(rng, mdp, scale=3.0)
    assert oracle.exact_vc(mdp, pol) >= oracle.exact_safety_prob(mdp, pol) - 1e-12


def test_single_action_zero_gradient():
    trans = np.array([[[0.6, 0.4]], [[0.5, 0.5]]])
    mdp = oracle.TabularMdp(trans, np.zeros((2, 1)), [True, False], 3)
    pol = mdp.uniform_policy()
    assert np.all(oracle.exact_estimator_expectation(mdp, pol, "safety") == 0)
    for t in (1, 2):
        lhs, rhs, diff = oracle.verify_recursion(mdp, pol, t)
        assert np.all(lhs == 0) and diff == 0


def test_mirror_actions_give_antisymmetric_gradient():
    p = 0.3
    trans = np.zeros((3, 2, 3))
    trans[0, 0] = [0.0, 1 - p, p]
    trans[0, 1] = [0.0, p, 1 - p]
    trans[1, :, 1] = trans[2, :, 2] = 1.0
    mdp = oracle.TabularMdp(trans, np.zeros((3, 2)), [True, True, False], 2)
    mirror = oracle.TabularMdp(trans[:, ::-1], np.zeros((3, 2)), mdp.safe, 2)
    pol = mdp.uniform_policy()
    g = oracle.exact_estimator_expectation(mdp, pol, "safety")
    np.testing.assert_allclose(g[:, 0], -g[:, 1], atol=1e-15)
    assert g[0, 0, 0] > 0
    gm = oracle.exact_estimator_expectation(mirror, pol, "safety")
    np.testing.assert_allclose(gm, g[:, ::-1], atol=1e-15)


@pytest.mark.parametrize("target", ["safety_prob", "value", "vc"])
def test_finite_diff_matches_complex_step(target):
    mdp, pol = instance(6, 7)
    fd = oracle.finite_diff_grad(mdp, pol, target)
    fn = {"safety_prob": oracle._safety_prob, "value": oracle._value, "vc": oracle._vc}[target]
    cs = oracle.complex_step_grad(lambda z: fn(mdp, z), pol.logits)
    assert oracle.relative_error(fd, cs) < 1e-6


def test_relative_error_floor():
    assert oracle.relative_error(np.zeros(3), np.zeros(3)) == 0.0
    assert oracle.relative_error(np.array([1.1]), np.array([1.0])) == pytest.approx(0.1)


@pytest.mark.parametrize("i", range(10))
def test_recursion(i):
    mdp, pol = instance(8, i)
    for t in range(1, mdp.horizon):
        assert oracle.verify_recursion(mdp, pol, t)[2] < 1e-9
    with pytest.raises(ValueError):
        oracle.verify_recursion(mdp, pol, mdp.horizon)


def test_recursion_last_stage_uses_terminal_indicator():
    mdp, pol = instance(9, 3)
    T = mdp.horizon
    lhs, _, _ = oracle.verify_recursion(mdp, pol, T - 1)
    # E[G_{T-1} | S_{T-2}=s] by hand: only the last two indicators matter
    logits = pol.logits.copy()
    h = 1e-6
    s = 0
    def tail(lg):
        p = SoftmaxTabularPolicy(lg).probs(T - 2)[s]
        q = SoftmaxTabularPolicy(lg).probs(T - 1)
        total = 0.0
        for a in range(2):
            for s1 in np.flatnonzero(mdp.safe):
                reach = sum(q[s1, b] * mdp.transition[s1, b, mdp.safe].sum() for b in range(2))
                total += p[a] * mdp.transition[s, a, s1] * reach
        return total
    k = (s, 0, T - 2)
    lp, lm = logits.copy(), logits.copy()
    lp[k] += h
    lm[k] -= h
    assert lhs[0][k] == pytest.approx((tail(lp) - tail(lm)) / (2 * h), abs=1e-8)


# duality


def dual_instance(i):
    rng = RngStream(77, i)
    return oracle.random_mdp(rng, 2 + i % 3, 2, 2 + (i // 3) % 3, safe_action=True)


@pytest.mark.parametrize("i", range(4))
def test_dual_function_basics(i):
    mdp = dual_instance(i)
    plans, value, vc = oracle.all_deterministic_values(mdp)
    v0a, _ = oracle.dual_function(mdp, 0.0, 0.2)
    v0b, _ = oracle.dual_function(mdp, 0.0, 0.9)
    assert v0a == pytest.approx(value.max()) and v0b == pytest.approx(v0a)
    lam = np.array([0.3, 1.7, 5.0, 12.0])
    for xi in (0.3, 0.8):
        d = np.array([oracle.dual_function(mdp, l, xi)[0] for l in lam])
        brute = np.array([(value + l * (vc - xi)).max() for l in lam])
        np.testing.assert_allclose(d, brute, atol=1e-10)
        for a, b in itertools.combinations(range(len(lam)), 2):
            mid = oracle.dual_function(mdp, 0.5 * (lam[a] + lam[b]), xi)[0]
            assert mid <= 0.5 * (d[a] + d[b]) + 1e-12
    _, plan = oracle.dual_function(mdp, 1e6, 0.5)
    assert oracle.evaluate_deterministic(mdp, plan)[1] == pytest.approx(vc.max(), abs=1e-12)


def test_dual_xi_zero_inactive():
    mdp = dual_instance(5)
    _, value, _ = oracle.all_deterministic_values(mdp)
    r = oracle.dual_optimum(mdp, 0.0)
    assert r.lambda_star == pytest.approx(0.0, abs=1e-8)
    assert r.p_tilde_star == pytest.approx(value.max(), abs=1e-12)


@pytest.mark.parametrize("i", range(6))
def test_zero_duality_gap(i):
    mdp = dual_instance(i)
    brute = oracle.all_deterministic_values(mdp)
    for xi in np.linspace(0, 1, 6):
        r = oracle.dual_optimum(mdp, xi, brute=brute)
        assert r.feasible
        assert abs(r.gap) < 1e-8
        assert r.d_tilde_star >= r.p_tilde_star - 1e-12


def test_dual_bound_identity_case():
    mdp = dual_instance(2)
    holds, slack = oracle.check_dual_bound(mdp, 0.4, 0.4)
    assert holds and slack == pytest.approx(0.0, abs=1e-15)


def test_infeasible_level_reported():
    mdp = chain(0.5, 2)
    # action 1 keeps state 0 safe forever so xi=1 is attainable; make it unattainable
    trans = mdp.transition.copy()
    trans[0, 1] = [0.5, 0.5]
    risky = oracle.TabularMdp(trans, mdp.reward, mdp.safe, 2)
    assert not oracle.dual_optimum(risky, 1.0).feasible
    with pytest.raises(oracle.InfeasibleError):
        oracle.check_dual_bound(risky, 0.2, 1.0)


# feasible sets


def test_verdict_always_safe():
    mdp = oracle.TabularMdp(np.full((2, 2, 2), 0.5), np.zeros((2, 2)), [True, True], 3)
    for delta in (0.0, 0.3, 1.0):
        v = oracle.feasibility_verdict(mdp, mdp.uniform_policy(), delta)
        assert v.in_F_hat and v.in_F and v.in_F_bar


def test_verdict_threshold():
    mdp = chain(0.04)
    pol = SoftmaxTabularPolicy(np.array([[[60.0], [0.0]], [[0.0], [0.0]]]))
    v = oracle.feasibility_verdict(mdp, pol, 0.05)
    assert v.p_joint == pytest.approx(0.96)
    assert v.in_F


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**40), st.floats(0, 1), st.floats(0, 6))
def test_inclusion_chain(seed, delta, scale):
    rng = RngStream(seed)
    mdp = oracle.random_mdp(rng, 3, 2, 3)
    pol = oracle.random_policy(rng, mdp, scale)
    v = oracle.feasibility_verdict(mdp, pol, delta)
    assert v.chain_holds
    assert v.v_c >= v.p_joint - 1e-12
