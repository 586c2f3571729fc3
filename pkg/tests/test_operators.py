from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hol.kernels import DifferencePowerKernel, IndicatorKernel
from hol.operators import TAGS, LocalOpSpec, OperatorKind, apply_local, apply_operator, canonical_tag
from hol.realfun import INF, GridFunction, PreconditionError, constant, exponential

ONE = IndicatorKernel()
CHI01 = GridFunction([0.0, 1.0], [1.0])


def test_operator_examples():
    e = exponential()
    T = OperatorKind("T", 1.0, e, ONE)
    assert apply_operator(T, CHI01, 2.0) == pytest.approx(math.exp(-2.0), rel=1e-8)
    assert apply_operator(T, CHI01, 0.0) == pytest.approx(1.0 - math.exp(-1.0), rel=1e-8)
    bT = OperatorKind("boldT", 1.0, e, DifferencePowerKernel(1.0))
    assert apply_operator(bT, CHI01, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-8)
    Tinf = OperatorKind("T", INF, e, ONE)
    assert apply_operator(Tinf, GridFunction.constant(1.0), 2.0) == pytest.approx(2.0 * math.exp(-2.0), rel=1e-6)


@pytest.mark.parametrize("tag", TAGS)
def test_zero_function(tag):
    op = OperatorKind(tag, 2.0, exponential(), ONE)
    assert apply_operator(op, GridFunction([0.0, 1.0], [0.0]), 1.0) == 0.0


def test_aliases_and_validation():
    assert canonical_tag("𝐓") == "boldT"
    with pytest.raises(PreconditionError):
        OperatorKind("X", 1.0, constant(), ONE)
    with pytest.raises(PreconditionError):
        OperatorKind("T", 0.0, constant(), ONE)
    with pytest.raises(PreconditionError):
        apply_operator(OperatorKind("T", 1.0, constant(), ONE), CHI01, -1.0)


_vals = st.lists(st.floats(0.0, 5.0), min_size=1, max_size=5)
_kern = st.sampled_from([ONE, DifferencePowerKernel(1.0)])


def _step(vals):
    return GridFunction(np.linspace(0.0, 3.0, len(vals) + 1), np.array(vals))


@settings(max_examples=15)
@given(tag=st.sampled_from(TAGS), vals=_vals, c=st.floats(0.0, 10.0), x=st.floats(0.1, 4.0),
       q=st.sampled_from([0.5, 1.0, 2.0]), k=_kern)
def test_homogeneous(tag, vals, c, x, q, k):
    op = OperatorKind(tag, q, exponential(), k)
    f = _step(vals)
    assert apply_operator(op, f.scaled(c), x) == pytest.approx(c * apply_operator(op, f, x), rel=1e-6, abs=1e-12)


@settings(max_examples=15)
@given(tag=st.sampled_from(TAGS), vals=_vals, bump=st.lists(st.floats(0.0, 3.0), min_size=5, max_size=5),
       x=st.floats(0.1, 4.0), k=_kern)
def test_monotone_in_f(tag, vals, bump, x, k):
    op = OperatorKind(tag, 2.0, exponential(), k)
    f = _step(vals)
    g = _step(list(np.array(vals) + np.array(bump[: len(vals)])))
    assert apply_operator(op, f, x) <= apply_operator(op, g, x) * (1 + 1e-7) + 1e-12


@pytest.mark.parametrize("tag", TAGS)
@pytest.mark.parametrize("k", [ONE, DifferencePowerKernel(1.0)], ids=["one", "diff"])
def test_shape_in_x(tag, k):
    op = OperatorKind(tag, 1.0, exponential(), k)
    f = GridFunction([0.0, 0.5, 2.0], [2.0, 1.0])
    xs = np.linspace(0.05, 4.0, 12)
    vals = np.array([apply_operator(op, f, x) for x in xs])
    d = np.diff(vals)
    if tag in ("T", "S", "boldT", "boldS"):
        assert np.all(d <= 1e-9)
    else:
        assert np.all(d >= -1e-9)


@pytest.mark.parametrize("x", [0.0, 0.7, 1.5, 3.0])
def test_T_equals_boldT_for_indicator_kernel(x):
    f = GridFunction([0.0, 1.0, 2.0], [1.0, 0.5])
    a = apply_operator(OperatorKind("T", 2.0, exponential(), ONE), f, x)
    b = apply_operator(OperatorKind("boldT", 2.0, exponential(), ONE), f, x)
    assert a == pytest.approx(b, rel=1e-9)


def test_local_examples():
    H = LocalOpSpec("H", c=2.0, d=4.0, u=constant(), kernel=ONE)
    one = GridFunction.constant(1.0)
    assert apply_local(H, one, 3.0) == pytest.approx(2.0)
    assert apply_local(H, one, 5.0) == 0.0
    bH = LocalOpSpec("boldH", t=2.0)
    assert apply_local(bH, CHI01, 3.0) == pytest.approx(1.0)
    assert apply_local(bH, CHI01, 1.0) == 0.0


def test_local_windows():
    u = constant()
    win = LocalOpSpec("Hstar", c=1.0, d=2.0, u=u, kernel=ONE).resolve()
    assert win.side == "right" and win.fixed == pytest.approx(4.0)
    # sigma(d) = inf is a valid upper limit, not an error
    win = LocalOpSpec("Hstar", c=0.5, d=0.9, u=exponential(), kernel=ONE).resolve()
    assert win.fixed == INF
    zwin = LocalOpSpec("calH", c=1.0, d=2.0, u=exponential(), kernel=ONE).resolve()
    assert zwin.fixed == pytest.approx(2.0 + math.log(2.0))
    assert not zwin.contains(1.0) and zwin.contains(2.0)
    with pytest.raises(PreconditionError):
        LocalOpSpec("H", t=1.0).resolve()
    with pytest.raises(PreconditionError):
        LocalOpSpec("nope", t=1.0)
