from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.integrate as spi
import scipy.optimize as spo
from hypothesis import given, settings
from hypothesis import strategies as st

from hol.config import DEFAULT
from hol.gammamax import (GammaSetup, V_values, compute_V, direct_min_ratio, double_star,
                          estimate_min_constant, evaluate_min_witness, maximal_constants,
                          pav_decreasing, zeta_q_map)
from hol.realfun import GridFunction, PreconditionError, Weight, constant, exponential, indicator, power

GAMMA3 = power(2.0) * exponential()          # u(s) = s^2 e^{-s}
ROOT3 = math.sqrt(3.0)


# ---------------------------------------------------------------------------
# V and the zeta maps
# ---------------------------------------------------------------------------

def test_V_examples():
    assert compute_V(constant(), 2.0, 1.0) == pytest.approx(math.pi / 2, rel=1e-9)
    assert compute_V(constant(), 2.0, 2.0) == pytest.approx(math.pi / 4, rel=1e-9)
    assert compute_V(indicator(0.0, 1.0), 1.0, 1.0) == pytest.approx(math.log(2.0), rel=1e-9)


@pytest.mark.parametrize("v, p", [(constant(), 2.0), (exponential(), 0.5), (indicator(0.0, 1.0), 1.0),
                                  (power(0.3), 3.0)])
def test_V_vectorized_matches_quadrature(v, p):
    z = np.geomspace(1e-3, 1e3, 13)
    fast = V_values(v, p, z)
    slow = np.array([compute_V(v, p, zi) for zi in z])
    np.testing.assert_allclose(fast, slow, rtol=1e-7)


@given(z=st.floats(1e-4, 1e4), p=st.sampled_from([0.5, 1.5, 2.0, 3.0]))
def test_V_doubling_bound(z, p):
    v = exponential()
    Vz, V2z = V_values(v, p, [z, 2 * z])
    assert V2z < Vz
    assert V2z >= 2.0 ** (-p) * Vz * (1 - 1e-9)


def test_zeta_q_examples():
    x = 3.0
    assert zeta_q_map(constant(), 2.0, x, 1) == pytest.approx(2 * x)
    assert zeta_q_map(constant(), 2.0, x, -1) == pytest.approx(x / 2)
    assert zeta_q_map(constant(), 2.0, x, -2) == pytest.approx(x / 4)
    with pytest.raises(PreconditionError):
        zeta_q_map(constant(), 1.0, x, 1)
    # the whole tail of s^{-1} s^2 e^{-s} is 1: below the median level zeta^{-1} is sup(empty) = 0
    assert zeta_q_map(GAMMA3, 1.0, 0.1, -1) == 0.0


@given(x=st.floats(1e-2, 20.0))
def test_zeta_q_tail_identity(x):
    uq = GAMMA3 * power(-1.0)
    z = zeta_q_map(GAMMA3, 1.0, x, 1)
    assert float(uq.tail(z)) == pytest.approx(0.5 * float(uq.tail(x)), rel=1e-9)


# ---------------------------------------------------------------------------
# closed-form constants
# ---------------------------------------------------------------------------

def test_maximal_constants_hand_values():
    res = maximal_constants(GammaSetup(2.0, 2.0, constant(), constant()))
    root = math.sqrt(2 / math.pi)
    assert res["A_cal0"] == pytest.approx(root, abs=1e-6)
    assert res["A_bf0"] == pytest.approx(math.log(4.0) / math.sqrt(2 * math.pi), abs=1e-6)
    assert res["A_cal2"] == pytest.approx(root, abs=1e-6)
    assert res["A_bf2"] == pytest.approx(root, abs=1e-6)
    assert res["total"] == pytest.approx(2.9467, abs=3e-3)
    assert res["branches"]["pq"] == "p<=q" and res["branches"]["p1"] == "p>1"


def test_divergent_V_rejected():
    with pytest.raises(PreconditionError):
        maximal_constants(GammaSetup(1.0, 2.0, constant(), constant()))


def _V(v, p, z):
    return spi.quad(lambda y: float(v(y)) / (y ** p + z ** p), 0, np.inf, limit=400)[0]


def _sup_log(fn, lo=-8.0, hi=8.0):
    grid = np.linspace(lo, hi, 161)
    vals = [fn(math.exp(g)) for g in grid]
    i = int(np.argmax(vals))
    res = spo.minimize_scalar(lambda g: -fn(math.exp(g)), bounds=(grid[max(i - 1, 0)], grid[min(i + 1, 160)]),
                              method="bounded", options={"xatol": 1e-10})
    return max(vals[i], -res.fun)


def test_p_le_q_small_p_against_quadrature():
    p, q, u, v = 0.5, 1.0, GAMMA3, exponential()
    res = maximal_constants(GammaSetup(p, q, u, v))
    assert res["branches"]["pq"] == "p<=q" and res["branches"]["p1"] == "p<=1"
    U = lambda t: float(u.cumulative(t))
    Tq = lambda t: spi.quad(lambda s: s ** (-q) * float(u(s)), t, np.inf)[0]
    a0 = _sup_log(lambda t: U(t) ** (p / q) / (t ** p * _V(v, p, t))) ** (1 / p)
    a2 = _sup_log(lambda t: Tq(t) ** (1 / q) * _V(v, p, t) ** (-1 / p))
    assert res["A_cal0"] == pytest.approx(a0, rel=1e-4)
    assert res["A_cal2"] == pytest.approx(a2, rel=1e-4)


def test_q_lt_p_regression_and_quadrature():
    setup = GammaSetup(2.0, 1.0, GAMMA3, constant())
    res = maximal_constants(setup)
    assert {res["branches"][k] for k in ("A_cal0", "A_cal2", "A_bf0", "A_bf2")} == {
        "clllA0:q<p", "clA221:q<p,p>1", "bfffA0:q<p", "bA221:q<p,p>1"}
    assert all(math.isfinite(res[k]) and res[k] > 0 for k in ("A_cal0", "A_cal2", "A_bf0", "A_bf2"))
    # v = 1, p = 2: t^p V(t) = pi t / 2, so A_cal0^2 = int 2 U(t) u(t) / (pi t) dt
    integrand = lambda t: 2 * float(GAMMA3.cumulative(t)) * float(GAMMA3(t)) / (math.pi * t)
    a0 = math.sqrt(spi.quad(integrand, 0, np.inf, limit=200)[0])
    assert res["A_cal0"] == pytest.approx(a0, rel=1e-4)
    assert res["total"] == pytest.approx(2.2621, rel=0.02)
    fine = maximal_constants(setup, DEFAULT.replace(gamma_per_decade=16))
    assert fine["total"] == pytest.approx(res["total"], rel=0.02)


@pytest.mark.parametrize("p, q", [(0.5, 1.0), (0.5, 0.25), (0.8, 2.0), (3.0, 1.5), (2.0, 2.0)])
def test_branch_dispatch_total_and_exclusive(p, q):
    res = maximal_constants(GammaSetup(p, q, GAMMA3, exponential()))
    assert res["branches"]["pq"] == ("p<=q" if p <= q else "q<p")
    assert res["branches"]["p1"] == ("p<=1" if p <= 1 else "p>1")
    vals = [res[k] for k in ("A_cal0", "A_cal2", "A_bf0", "A_bf2")]
    assert all(math.isfinite(x) and x > 0 for x in vals)
    assert res["total"] == pytest.approx(sum(vals))


# ---------------------------------------------------------------------------
# the decreasing cone
# ---------------------------------------------------------------------------

def test_double_star_examples():
    one = GridFunction.constant(1.0)
    chi = GridFunction([0.0, 1.0], [1.0], decreasing=True)
    assert double_star(one, 5.0) == pytest.approx(1.0)
    assert double_star(chi, 2.0) == pytest.approx(0.5)
    assert double_star(chi, 1e-12) == pytest.approx(1.0)


_dec = st.lists(st.floats(0.0, 10.0), min_size=1, max_size=6).map(lambda v: sorted(v, reverse=True))


@given(vals=_dec, x=st.floats(0.01, 10.0), h=st.floats(0.0, 5.0))
def test_double_star_properties(vals, x, h):
    f = GridFunction(np.arange(len(vals) + 1, dtype=float), np.array(vals), decreasing=True)
    assert double_star(f, x + h) <= double_star(f, x) + 1e-12
    assert double_star(f, x) >= float(f(x)) - 1e-12


def test_direct_min_examples():
    setup = GammaSetup(2.0, 2.0, constant(), constant())
    chi = GridFunction([0.0, 1.0], [1.0], decreasing=True)
    assert direct_min_ratio(chi, setup) == pytest.approx(ROOT3, rel=1e-6)
    assert direct_min_ratio(GridFunction([0.0, 1.0], [0.0]), setup) == 0.0
    assert direct_min_ratio(chi.scaled(2.0), setup) == pytest.approx(direct_min_ratio(chi, setup), rel=1e-12)
    with pytest.raises(PreconditionError):
        direct_min_ratio(GridFunction([0.0, 1.0, 2.0], [1.0, 2.0]), setup)


def test_direct_min_against_quadrature():
    # f = 2 on [0,1), 1 on [1,3): compare with a direct nested quad computation
    f = GridFunction([0.0, 1.0, 3.0], [2.0, 1.0], decreasing=True)
    u, v = exponential(), power(-0.5)
    setup = GammaSetup(2.0, 1.5, u, v)
    fss = lambda x: float(f.cumulative(x)) / x
    inner = lambda x: spi.quad(fss, 0, x, points=[1.0, 3.0] if x > 3 else None, limit=200)[0] / x
    lhs = spi.quad(lambda x: inner(x) ** 1.5 * float(u(x)), 0, np.inf, limit=200)[0] ** (1 / 1.5)
    rhs = spi.quad(lambda t: fss(t) ** 2 * float(v(t)), 0, np.inf, points=None, limit=400)[0] ** 0.5
    assert direct_min_ratio(f, setup) == pytest.approx(lhs / rhs, rel=1e-6)


def test_direct_min_monotone_in_weights():
    f = GridFunction([0.0, 1.0, 2.0], [1.0, 0.5], decreasing=True)
    base = direct_min_ratio(f, GammaSetup(2.0, 2.0, constant(), constant()))
    assert direct_min_ratio(f, GammaSetup(2.0, 2.0, constant(2.0), constant())) > base
    assert direct_min_ratio(f, GammaSetup(2.0, 2.0, constant(), constant(2.0))) < base


@given(y=st.lists(st.floats(-100, 100), min_size=1, max_size=40),
       w=st.lists(st.floats(0.1, 10.0), min_size=40, max_size=40))
def test_pav_matches_isotonic_regression(y, w):
    sk = pytest.importorskip("sklearn.isotonic")
    y = np.array(y)
    w = np.array(w[: len(y)])
    ours = pav_decreasing(y, w)
    ref = sk.IsotonicRegression(increasing=False).fit_transform(np.arange(len(y)), y, sample_weight=w)
    np.testing.assert_allclose(ours, ref, rtol=1e-9, atol=1e-9)
    assert np.all(np.diff(ours) <= 1e-12)


@pytest.fixture(scope="module")
def estimate():
    setup = GammaSetup(2.0, 2.0, constant(), constant())
    return setup, estimate_min_constant(setup)


def test_estimator_bounds(estimate):
    setup, est = estimate
    assert est.value >= ROOT3 - 1e-3
    total = maximal_constants(setup)["total"]
    assert 1 / 16 <= est.value / total <= 4


def test_estimator_witness_and_determinism(estimate):
    setup, est = estimate
    assert est.witness.decreasing
    assert evaluate_min_witness(setup, est.witness) == pytest.approx(est.value, rel=1e-6)
    again = estimate_min_constant(setup)
    assert again.value == est.value
    assert np.array_equal(again.witness.values, est.witness.values)


def test_estimator_zero_u():
    setup = GammaSetup(2.0, 2.0, Weight([]), constant())
    assert estimate_min_constant(setup).value == 0.0
