"""Brute-force lower bounds for best constants of weighted inequalities.

Three shapes of left-hand side are supported:

* `OperatorKind` -- one of the eight quasilinear operators measured in L^r_u;
* `AuxForm`      -- a single-level form (int alpha(x) [int_{lo(x)}^{hi(x)} K f]^r dx)^{1/r},
  covering the auxiliary inequalities of every theorem, the classical Hardy
  inequality, and localized operators measured in L^q of a target weight;
* `NestedForm`   -- (int alpha(x) (int_{lo(x)}^{hi(x)} beta(x,y) [Inner f(y)]^q dy)^{r/q} dx)^{1/r},
  covering the eight operators and the nested auxiliary inequalities.

Each is discretized by `problem.RatioProblem` and maximized over nonnegative
step functions; the returned witness reproduces the value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .config import DEFAULT, Config
from .kernels import Kernel
from .operators import LocalOpSpec, LocalWindow, OperatorKind, apply_operator
from .problem import (OptimizerConfig, RatioProblem, cell_nodes, inner_matrix, make_breakpoints,
                      maximize, range_rule)
from .realfun import (INF, GridFunction, PreconditionError, Weight, ess_sup, parse_exponent,
                      quad_integrate, xdiv, xmul, xpow)


# ---------------------------------------------------------------------------
# forms
# ---------------------------------------------------------------------------

@dataclass
class AuxForm:
    """(int_R alpha(x) [int_{lo(x)}^{hi(x)} K(anchor(x), z) f(z) dz]^r dx)^{1/r}.

    mode 'left' uses K = k(anchor, z) with hi <= anchor, 'right' uses
    K = k(z, anchor) with lo >= anchor, 'plain' uses K = 1.  r = inf gives
    ess sup_x alpha(x) [...].  `rows` restricts x to an interval.
    """

    alpha: Callable[[np.ndarray], np.ndarray]
    lo: Callable[[np.ndarray], np.ndarray]
    hi: Callable[[np.ndarray], np.ndarray]
    mode: str
    r: float
    kernel: Kernel | None = None
    anchor: Callable[[np.ndarray], np.ndarray] | None = None
    rows: tuple[float, float] | None = None
    marks: tuple = ()
    label: str = "aux"


@dataclass
class NestedForm:
    """(int alpha(x) (int_{lo(x)}^{hi(x)} beta(x, y) [Inner f(y)]^q dy)^{r/q} dx)^{1/r}.

    Inner f(y) is int_0^y K f (side 'left') or int_y^inf K f (side 'right') with
    K = k(y, z), k(z, y) or 1 (kernel None).
    """

    alpha: Callable[[np.ndarray], np.ndarray]
    lo: Callable[[np.ndarray], np.ndarray]
    hi: Callable[[np.ndarray], np.ndarray]
    beta: Callable[[np.ndarray, np.ndarray], np.ndarray]
    side: str
    q: float
    r: float
    kernel: Kernel | None = None
    marks: tuple = ()
    label: str = "nested"


def operator_form(op: OperatorKind, u: Weight, r: float) -> NestedForm:
    side, kin, outer, fac = op.pattern
    w, k = op.w, op.k
    if fac == "yx":
        beta = lambda x, y: xmul(w(y), k(y, x))
    elif fac == "xy":
        beta = lambda x, y: xmul(w(y), k(x, y))
    else:
        beta = lambda x, y: np.broadcast_to(w(y), np.broadcast(x, y).shape)
    if outer == "up":
        lo, hi = (lambda x: x), (lambda x: np.full_like(x, INF))
    else:
        lo, hi = (lambda x: np.zeros_like(x)), (lambda x: x)
    return NestedForm(alpha=u, lo=lo, hi=hi, beta=beta, side=side, q=op.q, r=r,
                      kernel=k if kin else None, marks=tuple(w.breakpoints) + tuple(u.breakpoints),
                      label=op.tag)


def local_form(win: LocalWindow, q: float, target: Callable[[np.ndarray], np.ndarray]) -> AuxForm:
    if win.side == "left":
        lo = lambda x: np.full_like(x, win.fixed)
        hi = lambda x: x
    else:
        lo = lambda x: x
        hi = lambda x: np.full_like(x, win.fixed)
    return AuxForm(alpha=target, lo=lo, hi=hi, mode=win.side if win.kernel is not None else "plain",
                   r=q, kernel=win.kernel, rows=(win.row_lo, win.row_hi),
                   marks=(win.row_lo, win.row_hi, win.fixed), label="local")


# ---------------------------------------------------------------------------
# specs and results
# ---------------------------------------------------------------------------

@dataclass
class InequalitySpec:
    """LHS(f) <= C ||f||_{L^p_v}; lhs is an OperatorKind (with target (r, u)),
    an AuxForm, a NestedForm, or a LocalOpSpec/LocalWindow (with target (q, weight))."""

    lhs: object
    p: float
    v: Weight
    r: float | None = None
    u: Weight | None = None
    q: float | None = None
    target: Callable | None = None

    def __post_init__(self):
        self.p = parse_exponent(self.p)
        if not self.p >= 1:
            raise PreconditionError("p must satisfy 1 <= p <= inf; the range 0 < p < 1 is excluded")
        if self.r is not None:
            self.r = parse_exponent(self.r)
        if self.q is not None:
            self.q = parse_exponent(self.q)

    def form(self):
        if isinstance(self.lhs, OperatorKind):
            if self.r is None or self.u is None:
                raise PreconditionError("operator inequalities need the target (r, u)")
            return operator_form(self.lhs, self.u, self.r)
        if isinstance(self.lhs, (LocalOpSpec, LocalWindow)):
            win = self.lhs.resolve() if isinstance(self.lhs, LocalOpSpec) else self.lhs
            if self.q is None or self.target is None:
                raise PreconditionError("local norms need the target (q, weight)")
            return local_form(win, self.q, self.target)
        if isinstance(self.lhs, (AuxForm, NestedForm)):
            return self.lhs
        raise PreconditionError(f"unsupported left-hand side {type(self.lhs).__name__}")


@dataclass
class NormEstimate:
    value: float
    witness: GridFunction
    restarts_used: int
    converged: bool
    history: list = field(default_factory=list)
    method: str = "oracle"

    def to_json(self, witness: bool = False) -> dict:
        out = {"value": _j(self.value), "restarts_used": self.restarts_used,
               "converged": self.converged, "method": self.method,
               "iterations": max(len(self.history) - 1, 0)}
        if witness:
            out["witness"] = self.witness.to_json()
        return out


def _j(x: float):
    return x if math.isfinite(x) else "inf"


# ---------------------------------------------------------------------------
# discretization of forms
# ---------------------------------------------------------------------------

def _call(fn, x):
    with np.errstate(all="ignore"):
        return np.asarray(fn(x), dtype=float) * np.ones_like(x)


def _source_masses(src_bp: np.ndarray, v: Weight, p: float) -> np.ndarray:
    if math.isinf(p):
        return np.array([ess_sup(v, a, b, n=16) for a, b in zip(src_bp[:-1], src_bp[1:])])
    return np.asarray(v.integrate(src_bp[:-1], src_bp[1:]), float)


def _eval_grid(lo: float, hi: float, cfg: Config, src_bp: np.ndarray, extra=()) -> np.ndarray:
    """Outer evaluation grid: the window grid, the finite source breakpoints and
    padding decades on both sides, cut to [lo, hi]."""
    pad = 10.0 ** cfg.pad_decades
    a = src_bp[0] if src_bp[0] > 0 else cfg.x_min
    b = src_bp[-1] if math.isfinite(src_bp[-1]) else cfg.x_max
    a, b = min(a, cfg.x_min), max(b, cfg.x_max)
    head = np.geomspace(a / pad, a, cfg.pad_cells + 1)
    tail = np.geomspace(b, b * pad, cfg.pad_cells + 1)
    body = np.geomspace(a, b, cfg.grid_points + 1)
    fin = src_bp[(src_bp > 0) & np.isfinite(src_bp)]
    bp = np.unique(np.concatenate([head, body, fin, tail]))
    lo = max(lo, bp[0])
    hi = min(hi, bp[-1])
    pts = [e for e in extra if lo < e < hi and math.isfinite(e)]
    bp = bp[(bp > lo) & (bp < hi)]
    bp = np.unique(np.concatenate([[lo], bp, pts, [hi]]))
    keep = np.concatenate([[True], np.diff(np.log(bp)) > 1e-12])
    return bp[keep]


def default_source_grid(cfg: Config, marks=()) -> np.ndarray:
    return make_breakpoints(cfg.x_min, cfg.x_max, cfg.grid_points, extra=marks)


def build_problem(form, p: float, v: Weight, cfg: Config = DEFAULT,
                  src_bp: np.ndarray | None = None) -> RatioProblem:
    """Discretize a form against the source space L^p_v."""
    if src_bp is None:
        src_bp = default_source_grid(cfg, tuple(getattr(form, "marks", ())) + tuple(v.breakpoints))
    V = _source_masses(src_bp, v, p)
    if isinstance(form, AuxForm):
        return _build_aux(form, src_bp, V, p, cfg)
    return _build_nested(form, src_bp, V, p, cfg)


def _build_aux(form: AuxForm, src_bp, V, p, cfg: Config) -> RatioProblem:
    r0, r1 = form.rows if form.rows is not None else (0.0, INF)
    ev = _eval_grid(r0, r1, cfg, src_bp, extra=tuple(form.marks))
    X, W, _ = cell_nodes(ev, cfg.gl_order)
    anchor = X if form.anchor is None else _call(form.anchor, X)
    lo = _call(form.lo, X)
    hi = _call(form.hi, X)
    if form.mode == "left":
        hi = np.minimum(hi, anchor)
    elif form.mode == "right":
        lo = np.maximum(lo, anchor)
    M = inner_matrix(src_bp, form.kernel, anchor, lo, hi, form.mode)
    a = _call(form.alpha, X)
    alpha = a if math.isinf(form.r) else xmul(a, W)
    alpha = np.nan_to_num(alpha, nan=0.0)
    return RatioProblem(src_bp, V, p, M, alpha, form.r, label=form.label,
                        meta={"rows": len(X), "cells": len(src_bp) - 1})


def _build_nested(form: NestedForm, src_bp, V, p, cfg: Config) -> RatioProblem:
    g = cfg.gl_order
    ev = _eval_grid(0.0, INF, cfg, src_bp, extra=tuple(form.marks))
    Y, W, _ = cell_nodes(ev, g)
    X = Y
    lo = np.clip(_call(form.lo, X), 0.0, INF)
    hi = _call(form.hi, X)
    rule = range_rule(ev, Y, W, g, lo, hi)
    ess = math.isinf(form.q)
    sub_y, sub_w = rule.sub_y, rule.sub_w
    if ess:
        # the sup over a range may sit at its end points: add them as nodes
        a = np.clip(lo, ev[0], ev[-1]) * (1 + 1e-12)
        b = np.clip(hi, ev[0], ev[-1]) * (1 - 1e-12)
        ok = (b > a).astype(float)
        sub_y = np.column_stack([sub_y, a, b])
        sub_w = np.column_stack([(sub_w > 0).astype(float), ok, ok])
    # inner rows: main nodes then the per-row sub nodes
    ysub = sub_y.ravel()
    Yall = np.concatenate([Y, ysub])
    if form.side == "left":
        ilo, ihi = np.zeros_like(Yall), Yall
        mode = "left"
    else:
        ilo, ihi = Yall, np.full_like(Yall, INF)
        mode = "right"
    if form.kernel is None:
        mode = "plain"
    M = inner_matrix(src_bp, form.kernel, Yall, ilo, ihi, mode)
    # outer weights on the main-node part
    main = rule.main.tocoo()
    # an ess sup over the outer range needs the bare factor, not quadrature weights
    wmain = (main.data > 0).astype(float) if ess else main.data
    wsub = sub_w
    bvals = _call(lambda yy: form.beta(X[main.row], yy), Y[main.col])
    data_main = np.nan_to_num(xmul(wmain, bvals), nan=0.0)
    n = len(X)
    k2 = sub_y.shape[1]
    rows_sub = np.repeat(np.arange(n), k2)
    cols_sub = n + np.arange(n * k2)
    bsub = _call(lambda yy: form.beta(X[rows_sub], yy), ysub)
    data_sub = np.nan_to_num(xmul(wsub.ravel(), bsub), nan=0.0)
    B = sp.csr_matrix((np.concatenate([data_main, data_sub]),
                       (np.concatenate([main.row, rows_sub]), np.concatenate([main.col, cols_sub]))),
                      shape=(n, len(Yall)))
    B.eliminate_zeros()
    a = _call(form.alpha, X)
    alpha = a if math.isinf(form.r) else xmul(a, W)
    alpha = np.nan_to_num(alpha, nan=0.0)
    return RatioProblem(src_bp, V, p, M, alpha, form.r, B=B, q=form.q, label=form.label,
                        meta={"rows": n, "inner_rows": len(Yall), "cells": len(src_bp) - 1})


# ---------------------------------------------------------------------------
# estimation
# ---------------------------------------------------------------------------

def _opt_cfg(cfg: Config, local: bool = False) -> OptimizerConfig:
    if local:
        return OptimizerConfig(restarts=cfg.local_restarts, max_iter=cfg.local_max_iter,
                               seed=cfg.seed, tol=cfg.tol, patience=cfg.patience)
    return OptimizerConfig(restarts=cfg.restarts, max_iter=cfg.max_iter, seed=cfg.seed,
                           tol=cfg.tol, patience=cfg.patience)


def _reciprocal_step(v: Weight, cfg: Config) -> GridFunction:
    """The function 1/v as a step function (exact for piecewise-constant v)."""
    piecewise_const = all(t.alpha == 0 and t.beta == 0 for t in v.terms)
    marks = sorted(set(v.breakpoints))
    if piecewise_const:
        bp = np.array([0.0] + marks + [INF])
        mids = np.where(np.isinf(bp[1:]), bp[:-1] + 1.0, 0.5 * (bp[:-1] + bp[1:]))
        vals = np.asarray(v(mids), float)
    else:
        inner = make_breakpoints(cfg.x_min, cfg.x_max, cfg.grid_points, extra=marks)
        bp = np.concatenate([[0.0], inner, [INF]])
        vals = np.array([ess_sup(v, a, b, n=32) for a, b in zip(bp[:-1], bp[1:])])
    with np.errstate(divide="ignore"):
        rec = np.where(vals > 0, 1.0 / np.where(vals > 0, vals, 1.0), 0.0)
    if np.any(vals == 0):
        # 1/v = inf on a set of positive measure: no finite witness
        rec = np.where(vals == 0, 1e300, rec)
    return GridFunction(bp, rec)


def operator_target_norm(op: OperatorKind, f: GridFunction, r: float, u: Weight,
                         cfg: Config = DEFAULT) -> float:
    """||Op f||_{L^r_u} for a step function f (inner integrals exact, outer
    integrals by the nested Gauss-Legendre rule on the padded window)."""
    form = operator_form(op, u, parse_exponent(r))
    prob = build_problem(form, 1.0, Weight([]), cfg, src_bp=f.breakpoints)
    L, _ = prob.lhs(f.values)
    return float(L[0])


def best_constant(spec: InequalitySpec, cfg: Config = DEFAULT) -> NormEstimate:
    """Lower bound for the least C in LHS(f) <= C ||f||_{L^p_v}, with witness."""
    local = isinstance(spec.lhs, (LocalOpSpec, LocalWindow))
    if local:
        win = spec.lhs.resolve() if isinstance(spec.lhs, LocalOpSpec) else spec.lhs
        if win.empty:
            return NormEstimate(0.0, GridFunction([0.0, 1.0], [0.0]), 0, True, [0.0], "empty")
    if math.isinf(spec.p) and isinstance(spec.lhs, OperatorKind):
        f = _reciprocal_step(spec.v, cfg)
        val = operator_target_norm(spec.lhs, f, spec.r, spec.u, cfg)
        return NormEstimate(val, f, 1, True, [val], "p=inf:1/v")
    form = spec.form()
    src_bp = None
    if local:
        src_bp = _local_source_grid(win, cfg)
    prob = build_problem(form, spec.p, spec.v, cfg, src_bp=src_bp)
    if math.isinf(spec.p):
        with np.errstate(divide="ignore"):
            c = np.where(prob.V > 0, 1.0 / np.where(prob.V > 0, prob.V, 1.0), 1e300)
        val = float(prob.ratio(c)[0])
        return NormEstimate(val, prob.witness(c), 1, True, [val], "p=inf:1/v")
    res = maximize(prob, _opt_cfg(cfg, local))
    return NormEstimate(res.value, prob.witness(res.c), res.restarts_used, res.converged,
                        res.history, "oracle")


def _local_source_grid(win: LocalWindow, cfg: Config) -> np.ndarray:
    if win.side == "left":
        lo, hi = win.fixed, win.row_hi
    else:
        lo, hi = win.row_lo, win.fixed
    lo = max(lo, cfg.x_min)
    hi = min(hi, cfg.x_max)
    if not hi > lo:
        hi = lo * 1.0001
    marks = tuple(m for m in (win.row_lo, win.row_hi, win.fixed) if lo < m < hi)
    return make_breakpoints(lo, hi, cfg.local_cells, extra=marks)


def evaluate_witness(spec: InequalitySpec, witness: GridFunction, cfg: Config = DEFAULT) -> float:
    """Recompute the ratio of a stored witness from a freshly built problem."""
    if math.isinf(spec.p) and isinstance(spec.lhs, OperatorKind):
        val = operator_target_norm(spec.lhs, witness, spec.r, spec.u, cfg)
        nrm = max(float(ess_sup(spec.v * 1.0, a, b, n=16)) * c
                  for a, b, c in zip(witness.breakpoints[:-1], witness.breakpoints[1:], witness.values))
        return float(xdiv(val, nrm))
    prob = build_problem(spec.form(), spec.p, spec.v, cfg, src_bp=witness.breakpoints)
    return float(prob.ratio(witness.values)[0])


def local_norm(spec: LocalOpSpec | LocalWindow, p: float, v: Weight, q: float,
               target: Callable, cfg: Config = DEFAULT) -> NormEstimate:
    """||H||_{L^p_v -> L^q_target} for a localized operator."""
    return best_constant(InequalitySpec(spec, p, v, q=q, target=target), cfg)


# ---------------------------------------------------------------------------
# equivalence
# ---------------------------------------------------------------------------

@dataclass
class EquivalenceReport:
    oracle: float
    total: float
    ratio: float
    band: tuple[float, float]
    passed: bool
    dominant: str | None
    note: str = ""

    def to_json(self) -> dict:
        return {"oracle": _j(self.oracle), "total": _j(self.total), "ratio": _j(self.ratio),
                "band": list(self.band), "pass": self.passed, "dominant": self.dominant,
                "note": self.note}


class EquivalenceViolation(RuntimeError):
    pass


def equivalence_report(oracle_value, breakdown, band=(1.0 / 16.0, 4.0)) -> EquivalenceReport:
    """Ratio oracle / total with a pass flag for the band (0/0 counts as 0 and passes)."""
    ov = oracle_value.value if isinstance(oracle_value, NormEstimate) else float(oracle_value)
    if hasattr(breakdown, "total"):
        total = float(breakdown.total)
        terms = breakdown.terms() if hasattr(breakdown, "terms") else {}
    else:
        total = float(breakdown)
        terms = {}
    if total == 0 and ov > 0:
        raise EquivalenceViolation(f"characterization total is 0 while the oracle found {ov}")
    ratio = float(xdiv(ov, total))
    if ov == 0 and total == 0:
        passed, note = True, "0/0 taken as 0"
    elif math.isinf(ov) and math.isinf(total):
        passed, note = True, "both infinite"
    else:
        passed = bool(band[0] <= ratio <= band[1])
        note = ""
    dominant = max(terms, key=lambda k: terms[k]) if terms else None
    return EquivalenceReport(ov, total, ratio, tuple(band), passed, dominant, note)
