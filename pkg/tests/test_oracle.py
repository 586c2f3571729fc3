from __future__ import annotations

import math

import numpy as np
import pytest

from hol.config import DEFAULT
from hol.constants import ProblemData, compute_breakdown, muckenhoupt_bracket
from hol.gammamax import V_values
from hol.kernels import IndicatorKernel
from hol.operators import LocalOpSpec, OperatorKind
from hol.oracle import (EquivalenceViolation, InequalitySpec, best_constant, equivalence_report,
                        evaluate_witness, local_norm)
from hol.realfun import INF, GridFunction, PreconditionError, Weight, constant, exponential, grid_weight, power
from hol.verify import hardy_spec

ONE = IndicatorKernel()


@pytest.fixture(scope="module")
def hardy():
    spec = hardy_spec()
    return spec, best_constant(spec)


def test_hardy_close_to_two(hardy):
    _, est = hardy
    assert 1.9 <= est.value <= 2.0
    assert est.converged


def test_hardy_inside_muckenhoupt_bracket(hardy):
    _, est = hardy
    B, lo, hi = muckenhoupt_bracket(power(-2.0), constant(), 2.0)
    assert B == pytest.approx(1.0, rel=1e-3)
    assert lo * (1 - 1e-3) <= est.value <= hi * (1 + 1e-3)


def test_witness_reproduces_value(hardy):
    spec, est = hardy
    assert evaluate_witness(spec, est.witness) == pytest.approx(est.value, rel=1e-6)


def test_history_nondecreasing(hardy):
    _, est = hardy
    h = np.array(est.history)
    assert np.all(np.diff(h) >= -1e-12 * np.abs(h[1:]))
    assert est.value >= 0


def test_seed_determinism(hardy):
    _, est = hardy
    again = best_constant(hardy_spec())
    assert again.value == est.value
    assert np.array_equal(again.witness.breakpoints, est.witness.breakpoints)
    assert np.array_equal(again.witness.values, est.witness.values)


def test_grid_refinement_does_not_lose_value():
    coarse = best_constant(hardy_spec(), DEFAULT.replace(grid_points=128)).value
    fine = best_constant(hardy_spec(), DEFAULT.replace(grid_points=256)).value
    assert fine >= coarse * (1 - 1e-5)


def test_p_infinity_three_quarters():
    e = exponential()
    spec = InequalitySpec(OperatorKind("T", 1.0, e, ONE), INF, constant(), r=1.0, u=e)
    est = best_constant(spec)
    assert est.value == pytest.approx(0.75, rel=1e-4)
    assert evaluate_witness(spec, GridFunction.constant(1.0)) == pytest.approx(est.value, rel=1e-12)


def test_zero_operator():
    e = exponential()
    spec = InequalitySpec(OperatorKind("T", 2.0, Weight([]), ONE), 2.0, constant(), r=2.0, u=e)
    assert best_constant(spec).value == 0.0


def test_p_below_one_rejected():
    with pytest.raises(PreconditionError):
        InequalitySpec(hardy_spec().lhs, 0.5, constant())


def test_local_norm_closed_form_family():
    # ||calH_t|| from L^1 with weight z^p V(z) into L^{1/p} equals 1/V(t) for 0 < p <= 1
    p, v = 0.5, exponential()
    bp = np.geomspace(1e-8, 1e8, 1601)
    mid = np.sqrt(bp[:-1] * bp[1:])
    g = grid_weight(bp, mid ** p * V_values(v, p, mid))
    for t in (0.1, 1.0, 10.0):
        est = local_norm(LocalOpSpec("calH", t=t, kernel=ONE), 1.0, g, 1.0 / p, lambda x: np.ones_like(x))
        exact = 1.0 / V_values(v, p, [t])[0]
        assert 0.9 * exact <= est.value <= exact * (1 + 1e-6)


def test_local_norm_empty_window():
    spec = LocalOpSpec("H", c=2.0, d=2.0, u=constant(), kernel=ONE)
    assert local_norm(spec, 2.0, constant(), 2.0, exponential()).value == 0.0


def test_local_bold_H_regression_across_seeds():
    spec = LocalOpSpec("boldH", t=1.0)
    vals = [local_norm(spec, 2.0, constant(), 2.0, exponential(), DEFAULT.replace(seed=s)).value
            for s in (1, 2, 3)]
    assert max(vals) <= min(vals) * 1.01
    assert vals[0] == pytest.approx(0.75637, rel=0.01)
    # Muckenhoupt: B = sup_t (int_max(t,1)^inf e^-x)^(1/2) t^(1/2) = e^(-1/2), attained at t = 1
    B = math.exp(-0.5)
    assert B <= min(vals) and max(vals) <= 2 * B


def test_equivalence_report_examples():
    rep = equivalence_report(1.0, 2.0)
    assert rep.ratio == 0.5 and rep.passed
    rep = equivalence_report(0.0, 0.0)
    assert rep.ratio == 0.0 and rep.passed
    assert not equivalence_report(1.0, 100.0).passed
    with pytest.raises(EquivalenceViolation):
        equivalence_report(1.0, 0.0)


def test_theorem_preset_band():
    e = exponential()
    data = ProblemData(e, constant(), e, ONE, 2, 2, 2)
    br = compute_breakdown("2.1", data)
    est = best_constant(InequalitySpec(OperatorKind("T", 2, e, ONE), 2, constant(), r=2, u=e))
    rep = equivalence_report(est, br)
    assert rep.passed
    assert rep.ratio == pytest.approx(0.5143, rel=0.02)
    # each term bounds the oracle from below up to the band constant
    for term in (br.A0, br.A1, br.A2):
        assert est.value >= term / 16.0
