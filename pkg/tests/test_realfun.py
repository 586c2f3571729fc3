from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hol.realfun import (INF, Exponents, GridFunction, PreconditionError, constant, ess_sup,
                         exponential, indicator, integrate, lebesgue_norm, power, weight_from_json,
                         xdiv, xmul, xpow)


def test_extended_real_conventions():
    assert xmul(0.0, INF) == 0.0
    assert xmul(INF, 0.0) == 0.0
    assert xdiv(INF, INF) == 0.0
    assert xdiv(0.0, 0.0) == 0.0
    assert xdiv(1.0, 0.0) == INF
    assert xpow(0.0, 0.0) == 1.0


@pytest.mark.parametrize("w, a, b, want", [
    (constant(), 0.0, 1.0, 1.0),
    (power(1.0), 0.0, 2.0, 2.0),
    (exponential(), 1.0, INF, math.exp(-1.0)),
])
def test_integrate_examples(w, a, b, want):
    assert integrate(w, a, b) == pytest.approx(want, rel=1e-10)


def test_integrate_empty_and_divergent():
    assert integrate(constant(), 3.0, 3.0) == 0.0
    assert integrate(constant(), 0.0, INF) == INF
    assert integrate(power(-1.0), 0.0, 1.0) == INF


def test_integrate_callable_matches_closed_form():
    got = integrate(lambda x: x * math.exp(-x), 0.0, INF)
    assert got == pytest.approx(1.0, rel=1e-8)


@given(a=st.floats(0.0, 5.0), d1=st.floats(0.0, 5.0), d2=st.floats(0.0, 5.0),
       alpha=st.floats(-0.9, 2.0))
def test_integrate_additive(a, d1, d2, alpha):
    w = power(alpha) * exponential(0.5)
    b, c = a + d1, a + d1 + d2
    whole = integrate(w, a, c)
    parts = integrate(w, a, b) + integrate(w, b, c)
    assert parts == pytest.approx(whole, rel=2e-8, abs=1e-14)


def test_ess_sup_examples():
    assert ess_sup(power(1.0) * exponential(), 0.0, INF) == pytest.approx(math.exp(-1.0), rel=1e-8)
    assert ess_sup(constant(3.5), 1.0, 2.0) == pytest.approx(3.5)
    assert ess_sup(indicator(0.0, 1.0), 2.0, 3.0) == 0.0
    assert ess_sup(constant(), 2.0, 2.0) == 0.0


def test_lebesgue_norm_examples():
    f = GridFunction([0.0, 1.0], [1.0])
    assert lebesgue_norm(f, 2.0, constant()) == pytest.approx(1.0)
    assert lebesgue_norm(f, INF, indicator(0.0, 1.0)) == pytest.approx(1.0)
    bp = np.concatenate([[0.0], np.geomspace(1e-6, 60.0, 4000)])
    g = GridFunction.sample(lambda x: math.exp(-x), bp)
    assert lebesgue_norm(g, 1.0, constant()) == pytest.approx(1.0, rel=1e-6)


_vals = st.lists(st.floats(0.0, 10.0), min_size=1, max_size=8)


@given(vals=_vals, c=st.floats(0.0, 100.0), p=st.sampled_from([0.5, 1.0, 2.0, 3.5, INF]))
def test_lebesgue_norm_homogeneous(vals, c, p):
    bp = np.arange(len(vals) + 1, dtype=float)
    f = GridFunction(bp, np.array(vals))
    v = exponential(0.3)
    assert lebesgue_norm(f.scaled(c), p, v) == pytest.approx(c * lebesgue_norm(f, p, v), rel=1e-9, abs=1e-300)


@given(vals=_vals, bump=st.lists(st.floats(0.0, 5.0), min_size=8, max_size=8),
       p=st.sampled_from([1.0, 2.0, INF]))
def test_lebesgue_norm_monotone(vals, bump, p):
    bp = np.arange(len(vals) + 1, dtype=float)
    f = GridFunction(bp, np.array(vals))
    g = GridFunction(bp, np.array(vals) + np.array(bump[: len(vals)]))
    v = power(0.5)
    assert lebesgue_norm(f, p, v) <= lebesgue_norm(g, p, v) * (1 + 1e-12)


def test_exponents():
    ex = Exponents(2, 2, 1)
    assert ex.s == INF and ex.regime == "p<=r"
    ex = Exponents(3, 1.5, 1)
    assert ex.s == pytest.approx(3.0) and ex.regime == "r<p"
    assert Exponents("inf", 2, 2).s == pytest.approx(2.0)
    with pytest.raises(PreconditionError):
        Exponents(0.5, 1, 1)


def test_grid_function_validation():
    with pytest.raises(PreconditionError):
        GridFunction([0.0, 1.0], [-1.0])
    with pytest.raises(PreconditionError):
        GridFunction([0.0, 1.0, 2.0], [1.0, 2.0], decreasing=True)
    f = GridFunction([0.0, 1.0, 2.0], [2.0, 1.0])
    assert f(1.0) == 1.0 and f(2.0) == 0.0 and f(0.0) == 2.0
    assert float(f.cumulative(1.5)) == pytest.approx(2.5)


def test_weight_json_round_trip():
    spec = {"kind": "product", "factors": [{"kind": "power", "alpha": 2.0}, {"kind": "exp", "beta": 1.0}]}
    w = weight_from_json(spec)
    assert w.integrate(0.0, INF) == pytest.approx(2.0, rel=1e-10)
    w2 = weight_from_json({"kind": "grid", "breakpoints": [0, 1, 2], "values": [1.0, 3.0]})
    assert w2.integrate(0.0, 2.0) == pytest.approx(4.0)
    assert weight_from_json({"kind": "indicator", "a": 0, "b": 1}).total() == pytest.approx(1.0)
