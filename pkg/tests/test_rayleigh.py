import itertools
import math

import numpy as np
import pytest

from nsgap import markov, rayleigh
from nsgap.errors import (
    BadExponentRange,
    ConstantConfiguration,
    DegenerateGap,
    InstanceTooLarge,
    MismatchedStationary,
)
from nsgap.spaces import Configuration, EllipsoidNorm, MetricSpace


def flip_chain():
    return markov.build_reversible_chain(np.array([[0.0, 1.0], [1.0, 0.0]]))


def four_cycle():
    A = np.array([[0, .5, 0, .5], [.5, 0, .5, 0], [0, .5, 0, .5], [.5, 0, .5, 0]])
    return markov.build_reversible_chain(A)


def two_point_metric():
    return MetricSpace.finite(np.array([[0.0, 1.0], [1.0, 0.0]]))


def path_metric_four_cycle():
    return MetricSpace.finite(
        np.array([[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]], dtype=float)
    )


def identity_chain(n):
    return markov.build_reversible_chain(np.eye(n), np.full(n, 1.0 / n))


# --- quotient ----------------------------------------------------------------

def test_quotient_flip_two_point():
    x = Configuration(two_point_metric(), [0, 1])
    assert rayleigh.rayleigh_quotient(x, flip_chain(), 1.0) == pytest.approx(2.0)


def test_quotient_identity_chain_is_zero():
    x = Configuration(MetricSpace.lp(2.0, 1), [[0.0], [1.0], [2.0]])
    assert rayleigh.rayleigh_quotient(x, identity_chain(3), 2.0) == 0.0


def test_quotient_roots_of_unity():
    angles = 2.0 * np.pi * np.arange(4) / 4.0
    pts = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    x = Configuration(MetricSpace.lp(2.0, 2), pts)
    assert rayleigh.rayleigh_quotient(x, four_cycle(), 2.0) == pytest.approx(1.0, abs=1e-12)


def test_quotient_rejects_constant():
    x = Configuration(two_point_metric(), [1, 1])
    with pytest.raises(ConstantConfiguration):
        rayleigh.rayleigh_quotient(x, flip_chain(), 1.0)


# --- exact and brute force -----------------------------------------------------

def test_gamma_hilbert_exact_values():
    assert rayleigh.gamma_hilbert_exact(four_cycle()).value == pytest.approx(1.0)
    k3 = markov.build_reversible_chain((np.ones((3, 3)) - np.eye(3)) / 2.0)
    assert rayleigh.gamma_hilbert_exact(k3).value == pytest.approx(2.0 / 3.0)
    assert rayleigh.gamma_hilbert_exact(identity_chain(3)).value == float("inf")


def test_gamma_hilbert_witness_reproduces_value():
    rng = np.random.default_rng(0)
    chain = markov.random_reversible_chain(5, rng)
    est = rayleigh.gamma_hilbert_exact(chain)
    r = rayleigh.rayleigh_quotient(est.witness, chain, 2.0)
    assert 1.0 / r == pytest.approx(est.value, rel=1e-9)


def test_gamma_bruteforce_flip():
    for p in (1.0, 2.0, 3.0):
        est = rayleigh.gamma_bruteforce(flip_chain(), two_point_metric(), p)
        assert est.value == 0.5
        assert not est.witness.is_constant()


def test_gamma_bruteforce_identity_infinite():
    est = rayleigh.gamma_bruteforce(identity_chain(2), two_point_metric(), 1.0)
    assert est.value == float("inf")


def test_gamma_bruteforce_matches_manual_enumeration():
    """Independent oracle: plain python loops over all 4^4 configurations."""
    chain = four_cycle()
    space = path_metric_four_cycle()
    est = rayleigh.gamma_bruteforce(chain, space, 1.0)
    best = 0.0
    for cfg in itertools.product(range(4), repeat=4):
        num = sum(chain.pi[i] * chain.A[i, j] * space.dist[cfg[i], cfg[j]]
                  for i in range(4) for j in range(4))
        den = sum(chain.pi[i] * chain.pi[j] * space.dist[cfg[i], cfg[j]]
                  for i in range(4) for j in range(4))
        if den > 0:
            best = max(best, den / num)
    assert est.value == pytest.approx(best, rel=1e-12)


def test_gamma_bruteforce_caps():
    big = MetricSpace.finite(1.0 - np.eye(9) + np.eye(9) * 0.0)
    with pytest.raises(InstanceTooLarge):
        rayleigh.gamma_bruteforce(flip_chain(), big, 1.0)


# --- heuristic ----------------------------------------------------------------

def test_heuristic_recovers_hilbert_gap():
    rng = np.random.default_rng(21)
    for _ in range(5):
        n = int(rng.integers(2, 7))
        chain = markov.random_reversible_chain(n, rng)
        exact = rayleigh.gamma_hilbert_exact(chain).value
        est = rayleigh.gamma_heuristic(chain, MetricSpace.lp(2.0, n), 2.0,
                                       restarts=2, iters=50, seed=1)
        assert exact - 1e-6 <= est.value <= exact + 1e-9


def test_heuristic_identity_chain_infinite():
    est = rayleigh.gamma_heuristic(identity_chain(3), MetricSpace.lp(2.0, 3), 2.0,
                                   restarts=1, iters=5, seed=0)
    assert est.value == float("inf")


def test_heuristic_linf_is_a_lower_bound_with_valid_witness():
    """Cross-check against enumeration of cube-corner configurations: the
    heuristic's witness must reproduce its value (so the estimate is a
    certified lower bound), and the estimate should land near the best
    corner configuration; the ascent is not guaranteed to dominate the
    discrete enumeration, so only a coarse fraction is asserted."""
    chain = four_cycle()
    space = MetricSpace.lp(float("inf"), 4)
    est = rayleigh.gamma_heuristic(chain, space, 1.0, restarts=8, iters=150, seed=3)
    assert math.isfinite(est.value) and est.value > 0
    r = rayleigh.rayleigh_quotient(est.witness, chain, 1.0)
    assert 1.0 / r == pytest.approx(est.value, rel=1e-9)
    # corner enumeration oracle (a subset of feasible configurations)
    corners = np.array(list(itertools.product((0.0, 1.0), repeat=4)))
    best = 0.0
    for pick in itertools.product(range(4), repeat=4):
        pts = corners[list(pick)]
        diff = np.max(np.abs(pts[:, None, :] - pts[None, :, :]), axis=2)
        num = float(np.sum(chain.pi[:, None] * chain.A * diff))
        den = float(np.sum(np.outer(chain.pi, chain.pi) * diff))
        if den > 0 and num > 1e-14:
            best = max(best, den / num)
    assert est.value >= best * 0.75


# --- calculus ------------------------------------------------------------------

def test_calculus_endpoint_lambda_one():
    chain = four_cycle()
    x = Configuration(MetricSpace.lp(2.0, 2),
                      np.random.default_rng(1).standard_normal((4, 2)))
    rep = rayleigh.rayleigh_calculus_check(x, chain, markov.lazy_power(chain, 1),
                                           1.0, 2, 2.0)
    assert rep["affinity_slack"] <= 1e-12


def test_calculus_identity_dilution():
    chain = four_cycle()
    ident = identity_chain(4)
    ident = markov.build_reversible_chain(np.eye(4), chain.pi)
    x = Configuration(MetricSpace.lp(2.0, 2),
                      np.random.default_rng(2).standard_normal((4, 2)))
    rep = rayleigh.rayleigh_calculus_check(x, chain, ident, 0.37, 2, 1.0)
    assert rep["dilution_slack"] <= 1e-12


def test_calculus_random_instances():
    rng = np.random.default_rng(3)
    for _ in range(200):
        chain = markov.random_reversible_chain(4, rng)
        other = markov.lazy_power(chain, 1)
        x = Configuration(MetricSpace.lp(2.0, 2), rng.standard_normal((4, 2)))
        rep = rayleigh.rayleigh_calculus_check(x, chain, other,
                                               float(rng.uniform()), 3, 1.0)
        assert rep["affinity_slack"] <= 1e-12
        assert rep["dilution_slack"] <= 1e-12
        assert rep["product_slack"] >= -1e-12
        assert rep["power_slack"] >= -1e-12


def test_calculus_rejects_mismatched_stationary():
    rng = np.random.default_rng(4)
    a = markov.random_reversible_chain(3, rng)
    b = markov.random_reversible_chain(3, rng)
    x = Configuration(MetricSpace.lp(2.0, 2), rng.standard_normal((3, 2)))
    with pytest.raises(MismatchedStationary):
        rayleigh.rayleigh_calculus_check(x, a, b, 0.5, 2, 1.0)


def test_meanzero_square_norm_identity():
    """For pi-mean-zero Hilbert configurations,
    R(x; B^2, sq) = 1 - ||(B (x) Id) x||^2 / ||x||^2."""
    rng = np.random.default_rng(5)
    for _ in range(20):
        chain = markov.random_reversible_chain(5, rng)
        x = rng.standard_normal((5, 3))
        x = x - chain.pi @ x
        b2 = markov.build_reversible_chain(chain.A @ chain.A, chain.pi)
        cfg = Configuration(MetricSpace.lp(2.0, 3), x)
        r = rayleigh.rayleigh_quotient(cfg, b2, 2.0)
        norm_sq = float(np.sum(chain.pi[:, None] * x**2))
        img = chain.A @ x
        img_sq = float(np.sum(chain.pi[:, None] * img**2))
        assert r == pytest.approx(1.0 - img_sq / norm_sq, abs=1e-10)


# --- pointwise estimate --------------------------------------------------------

def test_pointwise_estimate_hilbert_case():
    chain = markov.lazy_power(four_cycle(), 2)
    data = markov.spectral_data(chain)
    v = data.eigenvectors[:, 1] / np.sqrt(chain.pi)
    x = Configuration(MetricSpace.lp(2.0, 1), v.reshape(-1, 1))
    rep = rayleigh.pointwise_estimate_check(x, chain, MetricSpace.lp(2.0, 1),
                                            EllipsoidNorm(np.eye(1)), 1.0, 0.99)
    assert rep["vacuous_or_holds"] == "holds"


def test_pointwise_estimate_vacuous_premise():
    near_identity = markov.build_reversible_chain(
        0.95 * np.eye(2) + 0.05 * np.array([[0.0, 1.0], [1.0, 0.0]]))
    x = Configuration(MetricSpace.lp(2.0, 1), [[1.0], [-1.0]])
    rep = rayleigh.pointwise_estimate_check(x, near_identity, MetricSpace.lp(2.0, 1),
                                            EllipsoidNorm(np.eye(1)), 1.0, 0.05)
    assert rep["vacuous_or_holds"] == "vacuous"


def test_pointwise_estimate_linf_sandwich():
    """l_inf^2 against the scaled Euclidean norm: ||y||_H = ||y||_2 / sqrt(2)
    gives the sandwich with D = sqrt(2); the implication holds on 100 random
    configurations."""
    chain = markov.lazy_power(four_cycle(), 3)
    H = EllipsoidNorm(np.eye(2) / 2.0)
    rng = np.random.default_rng(6)
    d = np.sqrt(2.0)
    for _ in range(100):
        x = Configuration(MetricSpace.lp(float("inf"), 2), rng.standard_normal((4, 2)))
        rep = rayleigh.pointwise_estimate_check(x, chain, MetricSpace.lp(float("inf"), 2),
                                                H, d, 0.5, sandwich_trials=50)
        assert rep["vacuous_or_holds"] in ("vacuous", "holds")


# --- analytic pipeline ---------------------------------------------------------

def test_tstar_values():
    assert rayleigh.tstar(0.5, 2.0) == 5
    assert rayleigh.tstar(0.0, 1.0) == 1
    assert rayleigh.tstar(-1.0, 2.0) == 1
    with pytest.raises(DegenerateGap):
        rayleigh.tstar(1.0, 2.0)


def test_theorem4_bound_value():
    chain = four_cycle()
    assert rayleigh.theorem4_upper_bound(chain, 1.0, 1.0) == pytest.approx(math.log(2.0))
    with pytest.raises(DegenerateGap):
        rayleigh.theorem4_upper_bound(identity_chain(2), 1.0, 1.0)


def test_theorem4_consistency_with_fitted_constant():
    """The heuristic gap over l_inf^d never exceeds the analytic bound once
    the constant is fitted over the family."""
    rng = np.random.default_rng(8)
    rows = []
    for _ in range(10):
        n = int(rng.integers(3, 6))
        d = int(rng.integers(2, 5))
        chain = markov.random_reversible_chain(n, rng)
        est = rayleigh.gamma_heuristic(chain, MetricSpace.lp(float("inf"), d), 1.0,
                                       restarts=4, iters=80, seed=int(rng.integers(2**32)))
        base = rayleigh.theorem4_upper_bound(chain, math.sqrt(d), 1.0)
        rows.append((est.value, base))
    fitted = max(v / b for v, b in rows)
    assert fitted > 0
    assert all(v <= fitted * b * (1 + 1e-9) for v, b in rows)


# --- absolute gap ---------------------------------------------------------------

def test_gamma_plus_uniform_two_state():
    uniform = markov.build_reversible_chain(np.full((2, 2), 0.5))
    est = rayleigh.gamma_plus_bruteforce(uniform, two_point_metric(), 1.0)
    assert est.value == pytest.approx(1.0)


def test_gamma_plus_identity_infinite():
    est = rayleigh.gamma_plus_bruteforce(identity_chain(2), two_point_metric(), 1.0)
    assert est.value == float("inf")


def test_gamma_plus_dominates_gamma_via_sandwich():
    rng = np.random.default_rng(9)
    for _ in range(10):
        chain = markov.random_reversible_chain(3, rng)
        base = 1.0 + rng.uniform(0, 1, size=(3, 3))
        base = (base + base.T) / 2.0
        np.fill_diagonal(base, 0.0)
        space = MetricSpace.finite(base)
        rep = rayleigh.abs_gap_sandwich_check(chain, space, 2.0)
        assert rep["lower_ok"] and rep["upper_ok"]


def test_sandwich_flip_chain_equality_at_lower_end():
    rep = rayleigh.abs_gap_sandwich_check(flip_chain(), two_point_metric(), 1.0)
    assert rep["gamma"] == pytest.approx(0.5)
    assert rep["gamma_plus_lazy"] == pytest.approx(1.0)
    assert rep["lower_ok"] and rep["upper_ok"]


def test_sandwich_identity_vacuous():
    rep = rayleigh.abs_gap_sandwich_check(identity_chain(2), two_point_metric(), 1.0)
    assert rep["vacuous"]


# --- Markov type ----------------------------------------------------------------

def test_markov_type_eigenvector_geometric_series():
    chain = markov.lazy_power(four_cycle(), 1)
    data = markov.spectral_data(chain)
    lam = data.lambda2
    v = data.eigenvectors[:, 1] / np.sqrt(chain.pi)
    x = Configuration(MetricSpace.lp(2.0, 1), v.reshape(-1, 1))
    for t in (1, 2, 5):
        rep = rayleigh.markov_type_ratio(chain, x, t)
        expected = (1.0 - lam**t) / (t * (1.0 - lam))
        assert rep["ratio"] == pytest.approx(expected, abs=1e-10)
        assert rep["bound_holds"]


def test_markov_type_t_one_exact():
    rng = np.random.default_rng(10)
    chain = markov.random_reversible_chain(4, rng)
    x = Configuration(MetricSpace.lp(2.0, 2), rng.standard_normal((4, 2)))
    rep = rayleigh.markov_type_ratio(chain, x, 1)
    assert rep["ratio"] == pytest.approx(1.0, abs=1e-12)


def test_markov_type_random_trials():
    rng = np.random.default_rng(11)
    chain = four_cycle()
    for _ in range(200):
        x = Configuration(MetricSpace.lp(2.0, 2), rng.standard_normal((4, 2)))
        rep = rayleigh.markov_type_ratio(chain, x, 2)
        assert rep["ratio"] <= 1.0 + 1e-9


def test_p_range_guard():
    x = Configuration(two_point_metric(), [0, 1])
    with pytest.raises(BadExponentRange):
        rayleigh.rayleigh_quotient(x, flip_chain(), 9.0)
