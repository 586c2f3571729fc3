from __future__ import annotations

import functools
import math

import numpy as np
import pytest

import hol.constants as C
from hol.config import DEFAULT
from hol.constants import (THEOREMS, ProblemData, compute_A0_A1, compute_A2, compute_breakdown,
                           resolve_theorem, t_grid)
from hol.kernels import DifferencePowerKernel, IndicatorKernel
from hol.realfun import INF, PreconditionError, Weight, constant, exponential, indicator, power
from hol.verify import theorem_point

ONE = IndicatorKernel()
E = exponential()
# a lighter configuration for tests that only compare runs with each other
FAST = DEFAULT.replace(local_cells=48, t_per_cell=1, max_levels=24, restarts=8, local_restarts=2)


def preset(p=2, r=2, q=2, u=E, v=None, w=E, k=ONE):
    return ProblemData(u, constant() if v is None else v, w, k, p, r, q)


def test_resolve_theorem():
    assert resolve_theorem("2.1") == ("2.1", "T")
    assert resolve_theorem("frakS") == ("5.2", "frakS")
    assert resolve_theorem("𝒯") == ("3.1", "calT")
    with pytest.raises(PreconditionError):
        resolve_theorem("9.9")


def test_A0_equals_A1_for_unit_kernel():
    a0, a1 = compute_A0_A1("2.1", preset())
    assert a0 == a1


def test_A1_inside_muckenhoupt_bracket():
    _, a1 = compute_A0_A1("2.1", preset())
    assert math.exp(-0.5) / 2 * (1 - 1e-3) <= a1 <= math.exp(-0.5)
    # the auxiliary problem is the Bessel-type Hardy inequality with weight e^{-2x}
    assert a1 == pytest.approx(0.4158, rel=2e-3)


@pytest.mark.parametrize("thm", sorted(THEOREMS))
def test_zero_weights(thm):
    assert compute_A0_A1(thm, preset(w=Weight([]))) == (0.0, 0.0)
    assert compute_A2(thm, preset(u=Weight([]))) == 0.0


@functools.lru_cache(maxsize=None)
def _base_breakdown(thm):
    return compute_breakdown(thm, preset(), FAST)


@pytest.mark.parametrize("thm", ["2.1", "3.2"])
@pytest.mark.parametrize("which, c", [("u", 4.0), ("u", 0.25), ("v", 4.0), ("v", 0.25)])
def test_scaling_covariance(thm, which, c):
    base = _base_breakdown(thm)
    if which == "u":
        scaled = compute_breakdown(thm, preset(u=E * c), FAST)
        factor = c ** 0.5
    else:
        scaled = compute_breakdown(thm, preset(v=constant(c)), FAST)
        factor = c ** -0.5
    for name in ("A0", "A1", "A2"):
        assert getattr(scaled, name) == pytest.approx(factor * getattr(base, name), rel=1e-6)


# (theorem, v) pairs for which the operator is bounded
BOUNDED = [("2.1", constant()), ("4.1", constant()), ("2.2", power(2.0)), ("4.2", power(2.0)),
           ("3.1", power(2.0)), ("5.1", power(2.0)), ("3.2", constant()), ("5.2", constant())]


@pytest.mark.parametrize("thm, v", BOUNDED, ids=[b[0] for b in BOUNDED])
def test_equivalence_band_all_theorems(thm, v):
    pt = theorem_point(thm, preset(v=v), FAST)
    br, est, rep = pt["breakdown"], pt["oracle"], pt["report"]
    assert br.total == pytest.approx(br.A0 + br.A1 + br.A2)
    assert rep.passed, rep.to_json()
    for term in (br.A0, br.A1, br.A2):
        assert est.value >= term / 16.0


def test_regime_dispatch(monkeypatch):
    def boom(*a, **k):
        raise AssertionError("r < p branch evaluated for p <= r")

    monkeypatch.setattr(C, "_A2_integral", boom)
    br = compute_breakdown("2.1", preset(p=2, r=3, q=2), FAST)
    assert br.regime == "p<=r" and br.A2 > 0


def test_r_less_than_p_uses_integral():
    br = compute_breakdown("2.1", preset(p=2, r=1, q=2), FAST)
    assert br.regime == "r<p"
    assert br.method["A2"] == "oracle-local:dyadic integral"


def test_indicator_u_attains_early():
    data = preset(u=indicator(0.0, 1.0), p=2, r=2, q=2)
    _, diag = C._A2("2.1", data, FAST)
    ts, _ = t_grid(data, "T", FAST)
    step = float(np.max(ts[1:] / ts[:-1]))
    assert diag["argmax_t"] <= 1.0 * step


def test_p_infinity_mode():
    br = compute_breakdown("2.1", preset(p=INF, r=1, q=1))
    assert br.mode == "p=inf"
    assert br.total == pytest.approx(0.75, rel=1e-4)


def test_r_infinity_mode_sigma_side():
    br = compute_breakdown("2.1", preset(r=INF), FAST)
    assert br.mode == "r=inf" and br.A0 == 0.0 and br.A1 == 0.0
    # U = 1 for u = e^{-x}, and ||H_t|| decreases in t, so the sup sits at the left end
    norms = [C._local_at("T", preset(r=INF), FAST, t=t) for t in (FAST.x_min, 1.0)]
    assert br.A2 == pytest.approx(max(norms), rel=1e-6)


def test_r_infinity_rejected_on_zeta_side():
    with pytest.raises(PreconditionError):
        compute_breakdown("3.1", preset(r=INF), FAST)


def test_thm41_difference_kernel_regression():
    br = compute_breakdown("4.1", preset(k=DifferencePowerKernel(1.0)))
    assert br.total > 0
    assert br.total == pytest.approx(1.4303, rel=0.02)


def test_A2_stable_under_grid_doubling():
    base = compute_A2("2.1", preset())
    fine = compute_A2("2.1", preset(), DEFAULT.replace(local_cells=2 * DEFAULT.local_cells,
                                                       t_per_cell=2 * DEFAULT.t_per_cell))
    assert fine == pytest.approx(base, rel=0.02)


def test_breakdown_json():
    br = compute_breakdown("2.1", preset(p=INF, r=1, q=1))
    doc = br.to_json()
    assert doc["theorem"] == "2.1" and doc["tag"] == "T"
    assert set(doc["method"]) == {"A0", "A1", "A2"}
