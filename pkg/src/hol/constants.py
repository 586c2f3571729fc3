"""Characterization constants A0, A1, A2 for the eight operator inequalities.

Every theorem splits its best constant into two auxiliary inequalities
(A0, A1), whose best constants are estimated by the oracle, and a third term
A2 assembled from localized operator norms along the level-doubling maps of u.
Theorems are identified as "2.1" (T), "2.2" (S), "3.1" (calT), "3.2" (calS),
"4.1" (boldT), "4.2" (boldS), "5.1" (frakT), "5.2" (frakS); the operator tags
themselves are accepted too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, Config
from .discretize import dyadic_sequence, sigma_map, tail_dyadic_sequence, zeta_map
from .kernels import IndicatorKernel, Kernel
from .operators import ALIASES, LocalOpSpec, OperatorKind, canonical_tag
from .oracle import AuxForm, InequalitySpec, NestedForm, best_constant, local_norm
from .problem import cell_nodes, make_breakpoints
from .realfun import (INF, Exponents, PreconditionError, Weight, gauss_legendre, xmul, xpow)

THEOREMS = {"2.1": "T", "2.2": "S", "3.1": "calT", "3.2": "calS",
            "4.1": "boldT", "4.2": "boldS", "5.1": "frakT", "5.2": "frakS"}
_BY_TAG = {tag: thm for thm, tag in THEOREMS.items()}
SIGMA_SIDE = ("T", "S", "boldT", "boldS")

# local family of the A2 term per operator, and the kernel-section convention of
# its target weight: None (plain w), 'yt' (w(y) k(y, t)) or 'ty' (w(y) k(t, y))
_LOCAL = {
    "T": ("H", None), "S": ("Hstar", None),
    "calT": ("calH", None), "calS": ("calHstar", None),
    "boldT": ("boldH", "yt"), "boldS": ("boldHstar", "yt"),
    "frakT": ("frakH", "ty"), "frakS": ("frakHstar", "ty"),
}


def resolve_theorem(theorem: str) -> tuple[str, str]:
    """Map a theorem id or operator tag to (theorem id, operator tag)."""
    key = str(theorem).strip()
    if key in THEOREMS:
        return key, THEOREMS[key]
    tag = canonical_tag(ALIASES.get(key, key))
    return _BY_TAG[tag], tag


@dataclass
class ProblemData:
    """Weights, kernel and exponents of one operator inequality."""

    u: Weight
    v: Weight
    w: Weight
    k: Kernel
    p: float
    r: float
    q: float

    def __post_init__(self):
        self.exponents = Exponents(self.p, self.r, self.q)
        self.p, self.r, self.q = self.exponents.p, self.exponents.r, self.exponents.q

    def to_json(self) -> dict:
        return {"u": self.u.to_json(), "v": self.v.to_json(), "w": self.w.to_json(),
                "k": self.k.to_json(), **self.exponents.to_json()}


@dataclass
class ConstantBreakdown:
    theorem: str
    tag: str
    regime: str
    q_mode: str
    A0: float
    A1: float
    A2: float
    method: dict
    diagnostics: dict = field(default_factory=dict)
    mode: str = "standard"

    @property
    def total(self) -> float:
        return float(self.A0 + self.A1 + self.A2)

    def terms(self) -> dict:
        return {"A0": self.A0, "A1": self.A1, "A2": self.A2}

    def to_json(self) -> dict:
        return {"theorem": self.theorem, "tag": self.tag, "regime": self.regime,
                "q_mode": self.q_mode, "mode": self.mode,
                "A0": _j(self.A0), "A1": _j(self.A1), "A2": _j(self.A2), "total": _j(self.total),
                "method": dict(self.method), "diagnostics": _jsonable(self.diagnostics)}


def _j(x):
    x = float(x)
    return x if math.isfinite(x) else "inf"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return _j(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


# ---------------------------------------------------------------------------
# composite weights
# ---------------------------------------------------------------------------

def _row_nodes(lo, hi, cuts, cfg: Config, per_decade: int = 8, order: int = 8):
    """Per-row Gauss-Legendre nodes in log y on [lo, hi], split at `cuts`.

    Infinite or zero limits are cut padding decades beyond the window.
    Returns (Y, W) with one row per entry of lo/hi.
    """
    pad = 10.0 ** (cfg.pad_decades + 2)
    lo = np.maximum(np.asarray(lo, float), cfg.x_min / pad)
    hi = np.minimum(np.asarray(hi, float), cfg.x_max * pad)
    edges = [lo] + [np.clip(np.full_like(lo, c), lo, hi) for c in sorted(cuts)] + [hi]
    s, gw = gauss_legendre(order)
    Ys, Ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        ok = b > a
        la = np.log(np.where(ok, a, 1.0))
        span = np.where(ok, np.log(np.where(ok, b, 1.0)) - la, 0.0)
        panels = max(4, int(math.ceil(per_decade * float(np.max(span, initial=0.0)) / math.log(10))))
        t = (np.arange(panels)[:, None] + s[None, :]).ravel() / panels
        wt = np.tile(gw, panels) / panels
        Y = np.exp(la[:, None] + span[:, None] * t[None, :])
        Ys.append(Y)
        Ws.append(Y * span[:, None] * wt[None, :])
    return np.concatenate(Ys, axis=1), np.concatenate(Ws, axis=1)


def row_integral(fn, x, lo, hi, cuts, cfg: Config, chunk: int = 256) -> np.ndarray:
    """int_{lo_i}^{hi_i} fn(x_i, y) dy for each row i."""
    x = np.atleast_1d(np.asarray(x, float))
    lo = np.broadcast_to(np.asarray(lo, float), x.shape)
    hi = np.broadcast_to(np.asarray(hi, float), x.shape)
    out = np.zeros_like(x)
    for i in range(0, len(x), chunk):
        sl = slice(i, i + chunk)
        Y, W = _row_nodes(lo[sl], hi[sl], cuts, cfg)
        with np.errstate(all="ignore"):
            vals = np.asarray(fn(x[sl, None], Y), float)
        vals = np.where(W > 0, np.nan_to_num(vals, nan=0.0), 0.0)
        out[sl] = np.sum(xmul(vals, W), axis=1)
    out[~(hi > lo)] = 0.0
    return out


def row_sup(fn, x, lo, hi, cuts, cfg: Config, chunk: int = 256) -> np.ndarray:
    """ess sup_{lo_i < y < hi_i} fn(x_i, y) on the quadrature nodes plus the
    (nudged) end points of each row."""
    x = np.atleast_1d(np.asarray(x, float))
    lo = np.broadcast_to(np.asarray(lo, float), x.shape)
    hi = np.broadcast_to(np.asarray(hi, float), x.shape)
    out = np.zeros_like(x)
    pad = 10.0 ** (cfg.pad_decades + 2)
    for i in range(0, len(x), chunk):
        sl = slice(i, i + chunk)
        Y, W = _row_nodes(lo[sl], hi[sl], cuts, cfg, per_decade=16, order=4)
        a = np.maximum(lo[sl], cfg.x_min / pad) * (1 + 1e-12)
        b = np.minimum(hi[sl], cfg.x_max * pad) * (1 - 1e-12)
        Y = np.concatenate([Y, a[:, None], b[:, None]], axis=1)
        live = np.concatenate([W > 0, (b > a)[:, None], (b > a)[:, None]], axis=1)
        with np.errstate(all="ignore"):
            vals = np.asarray(fn(x[sl, None], Y), float)
        vals = np.where(live, np.nan_to_num(vals, nan=0.0), 0.0)
        out[sl] = np.max(vals, axis=1)
    out[~(hi > lo)] = 0.0
    return out


# ---------------------------------------------------------------------------
# auxiliary inequalities
# ---------------------------------------------------------------------------

def _maps(data: ProblemData, tag: str):
    u = data.u
    if tag in SIGMA_SIDE:
        return lambda x, m: np.atleast_1d(sigma_map(u, x, m, check=False))
    return lambda x, m: np.atleast_1d(zeta_map(u, x, m, check=False))


def _window_weight(data: ProblemData, cfg: Config, x, lo, hi, kfac=None) -> np.ndarray:
    """(int_lo^hi kfac(x, y) w(y) dy)^{r/q} for finite q, or
    (ess sup_(lo, hi) kfac(x, y) w(y))^r for q = inf."""
    w, r, q = data.w, data.r, data.q
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    cuts = w.breakpoints
    if math.isinf(q):
        if kfac is None:
            g = lambda xx, y: w(y) + 0.0 * xx
        else:
            g = lambda xx, y: xmul(kfac(xx, y), w(y))
        return xpow(row_sup(g, x, lo, hi, cuts, cfg), r)
    if kfac is None:
        val = np.asarray(w.integrate(np.minimum(lo, hi), hi), float)
    else:
        val = row_integral(lambda xx, y: xmul(kfac(xx, y), w(y)), x, lo, hi, cuts, cfg)
    return xpow(val, r / q)


def _kq(data: ProblemData):
    """k(a, b)^q, or k itself when q = inf (the ess-sup forms carry k to the first power)."""
    k, q = data.k, data.q
    if math.isinf(q):
        return lambda a, b: k(a, b)
    return lambda a, b: xpow(k(a, b), q)


def _indicator(k: Kernel) -> bool:
    return isinstance(k, IndicatorKernel)


def auxiliary_forms(theorem: str, data: ProblemData, cfg: Config = DEFAULT) -> tuple:
    """The two auxiliary left-hand sides (A0, A1) of a theorem as oracle forms."""
    _, tag = resolve_theorem(theorem)
    u, w, k, r, q = data.u, data.w, data.k, data.r, data.q
    kq = _kq(data)
    rq = r if math.isinf(q) else r / q
    mp = _maps(data, tag)
    zero = lambda x: np.zeros_like(x)
    inf = lambda x: np.full_like(x, INF)
    ident = lambda x: x
    marks = tuple(u.breakpoints) + tuple(w.breakpoints)

    def ww(lo_fn, hi_fn, kfac=None):
        def alpha(x):
            lo, hi = lo_fn(x), hi_fn(x)
            return xmul(u(x), _window_weight(data, cfg, x, lo, hi, kfac))
        return alpha

    # kernel-free composite for k = 1 keeps the closed form (k^q = 1)
    kf = (lambda fac: None if _indicator(k) else fac)

    if tag == "T":
        f0 = AuxForm(ww(ident, inf), zero, ident, "left", r, k, marks=marks, label="A0")
        f1 = AuxForm(ww(ident, inf, kf(lambda x, y: kq(y, x))), zero, ident, "plain", r,
                     marks=marks, label="A1")
    elif tag == "S":
        s2 = lambda x: mp(x, 2)
        f0 = AuxForm(ww(ident, s2), s2, inf, "right", r, k, anchor=s2, marks=marks, label="A0")
        f1 = AuxForm(ww(ident, s2, kf(lambda x, y: kq(mp(x[:, 0], 2)[:, None], y))), s2, inf,
                     "plain", r, marks=marks, label="A1")
    elif tag == "calT":
        f0 = AuxForm(ww(zero, ident), ident, inf, "right", r, k, marks=marks, label="A0")
        f1 = AuxForm(ww(zero, ident, kf(lambda x, y: kq(x, y))), ident, inf, "plain", r,
                     marks=marks, label="A1")
    elif tag == "calS":
        z2 = lambda x: np.minimum(mp(x, -2), x)
        f0 = AuxForm(ww(z2, ident), zero, z2, "left", r, k, anchor=z2, marks=marks, label="A0")
        f1 = AuxForm(ww(z2, ident, kf(lambda x, y: kq(y, np.minimum(mp(x[:, 0], -2), x[:, 0])[:, None]))),
                     zero, z2, "plain", r, marks=marks, label="A1")
    elif tag == "boldT":
        f0 = AuxForm(ww(ident, inf, lambda x, y: k(y, x)), zero, ident, "plain", r,
                     marks=marks, label="B0")
        s2 = lambda x: mp(x, 2)
        f1 = NestedForm(lambda x: xmul(u(x), xpow(k(s2(x), x), rq)), s2, inf,
                        lambda x, y: w(y) + 0.0 * x, "left", q, r, None, marks=marks, label="B1")
    elif tag == "boldS":
        s3 = lambda x: mp(x, 3)
        f0 = AuxForm(ww(ident, s3, lambda x, y: k(y, x)), s3, inf, "plain", r,
                     marks=marks, label="B0")
        s2 = lambda x: mp(x, 2)
        f1 = NestedForm(lambda x: xmul(u(x), xpow(k(s2(x), x), rq)), s2, inf,
                        lambda x, y: w(y) + 0.0 * x, "right", q, r, None, marks=marks, label="B1")
    elif tag == "frakT":
        f0 = AuxForm(ww(zero, ident, lambda x, y: k(x, y)), ident, inf, "plain", r,
                     marks=marks, label="B0")
        z2 = lambda x: np.minimum(mp(x, -2), x)
        f1 = NestedForm(lambda x: xmul(u(x), xpow(k(x, z2(x)), rq)), zero, z2,
                        lambda x, y: w(y) + 0.0 * x, "right", q, r, None, marks=marks, label="B1")
    else:  # frakS
        z3 = lambda x: np.minimum(mp(x, -3), x)
        f0 = AuxForm(ww(z3, ident, lambda x, y: k(x, y)), zero, z3, "plain", r,
                     marks=marks, label="B0")
        z2 = lambda x: np.minimum(mp(x, -2), x)
        f1 = NestedForm(lambda x: xmul(u(x), xpow(k(x, z2(x)), rq)), zero, z2,
                        lambda x, y: w(y) + 0.0 * x, "left", q, r, None, marks=marks, label="B1")
    return f0, f1


def compute_A0_A1(theorem: str, data: ProblemData, cfg: Config = DEFAULT) -> tuple[float, float]:
    """Best constants of the two auxiliary inequalities (oracle lower bounds)."""
    vals, _ = _aux_terms(theorem, data, cfg)
    return vals


def _aux_terms(theorem, data: ProblemData, cfg: Config):
    if data.w.is_zero or data.u.is_zero:
        return (0.0, 0.0), {"A0": "trivial", "A1": "trivial"}
    f0, f1 = auxiliary_forms(theorem, data, cfg)
    e0 = best_constant(InequalitySpec(f0, data.p, data.v), cfg)
    e1 = best_constant(InequalitySpec(f1, data.p, data.v), cfg)
    return (e0.value, e1.value), {"A0": "oracle", "A1": "oracle",
                                  "A0_witness_cells": len(e0.witness.values),
                                  "A1_witness_cells": len(e1.witness.values)}


# ---------------------------------------------------------------------------
# the localized term
# ---------------------------------------------------------------------------

def _target(data: ProblemData, conv, anchor: float):
    w, k = data.w, data.k
    if conv is None:
        return lambda y: w(y)
    if conv == "yt":
        return lambda y: xmul(w(y), k(y, np.full_like(np.asarray(y, float), anchor)))
    return lambda y: xmul(w(y), k(np.full_like(np.asarray(y, float), anchor), y))


def _local_at(tag: str, data: ProblemData, cfg: Config, t: float | None = None,
              x: float | None = None) -> float:
    """Localized norm entering A2: the t-form (p <= r, r = inf) or the window
    form attached to the point x (r < p)."""
    fam, conv = _LOCAL[tag]
    u, k = data.u, data.k
    if t is not None:
        spec = LocalOpSpec(fam, t=t, kernel=k)
        anchor = t
    else:
        mp = _maps(data, tag)
        c = float(mp(np.array([x]), -1)[0])
        if tag in ("boldT", "boldS"):
            d = float(mp(np.array([x]), 2)[0])
            anchor = c
        elif tag in ("frakT", "frakS"):
            d = float(mp(np.array([x]), 2)[0])
            anchor = d
        else:
            d = float(mp(np.array([x]), 1)[0])
            anchor = c
        if tag not in SIGMA_SIDE and not math.isfinite(d):
            return 0.0
        if not d > c:
            return 0.0
        spec = LocalOpSpec(fam, c=c, d=d, u=u, kernel=k)
    est = local_norm(spec, data.p, data.v, data.q, _target(data, conv, anchor), cfg)
    return float(est.value)


def _level(data: ProblemData, tag: str):
    """(int_0^t u) on the sigma side, (int_t^inf u) on the zeta side."""
    if tag in SIGMA_SIDE:
        return lambda t: np.asarray(data.u.cumulative(t), float)
    return lambda t: np.asarray(data.u.tail(t), float)


def _dyadic_nodes(data: ProblemData, tag: str, cfg: Config):
    window = (cfg.x_min, cfg.x_max)
    if tag in SIGMA_SIDE:
        disc = dyadic_sequence(data.u, window)
    else:
        disc = tail_dyadic_sequence(data.u, window)
    pts = disc.finite_values()
    pts = np.unique(pts[(pts >= cfg.x_min) & (pts <= cfg.x_max)])
    if len(pts) > cfg.max_levels:
        # keep the levels nearest the heavy end of u: the first ones on the
        # sigma side would be the lightest, on the zeta side the last ones are
        pts = pts[-cfg.max_levels:] if tag in SIGMA_SIDE else pts[:cfg.max_levels]
    return disc, pts


def t_grid(data: ProblemData, tag: str, cfg: Config = DEFAULT) -> tuple[np.ndarray, object]:
    """Dyadic points plus cfg.t_per_cell log-uniform points per dyadic cell; the
    unbounded end cells get the same density per decade."""
    disc, nodes = _dyadic_nodes(data, tag, cfg)
    m = cfg.t_per_cell
    edges = np.unique(np.concatenate([[cfg.x_min], nodes, [cfg.x_max]]))
    pts = [edges]
    for a, b in zip(edges[:-1], edges[1:]):
        inner_cell = (a in nodes) and (b in nodes)
        n = m if inner_cell else max(m, int(math.ceil(m * math.log10(b / a))))
        pts.append(np.geomspace(a, b, n + 2)[1:-1])
    return np.unique(np.concatenate(pts)), disc


def compute_A2(theorem: str, data: ProblemData, cfg: Config = DEFAULT) -> float:
    return _A2(theorem, data, cfg)[0]


def _A2(theorem: str, data: ProblemData, cfg: Config):
    _, tag = resolve_theorem(theorem)
    if data.u.is_zero or data.w.is_zero:
        return 0.0, {"A2": "trivial"}
    ex = data.exponents
    level = _level(data, tag)
    if math.isinf(ex.r):
        if tag not in SIGMA_SIDE:
            raise PreconditionError("the r = inf form is available for T, S, boldT and boldS only")
        ts, disc = t_grid(data, tag, cfg)
        U = np.maximum.accumulate(np.asarray(data.u(ts), float))
        norms = np.array([_local_at(tag, data, cfg, t=t) for t in ts])
        vals = xmul(U, norms)
        i = int(np.argmax(vals))
        return float(vals[i]), {"A2": "oracle-local:sup U*norm", "t_points": len(ts),
                                "argmax_t": float(ts[i]), "levels": disc.to_json()}
    if ex.regime == "p<=r":
        ts, disc = t_grid(data, tag, cfg)
        norms = np.array([_local_at(tag, data, cfg, t=t) for t in ts])
        vals = xmul(xpow(level(ts), 1.0 / ex.r), norms)
        i = int(np.argmax(vals))
        return float(vals[i]), {"A2": "oracle-local:sup", "t_points": len(ts),
                                "argmax_t": float(ts[i]), "levels": disc.to_json()}
    return _A2_integral(tag, data, cfg)


def _A2_integral(tag: str, data: ProblemData, cfg: Config):
    """r < p: (int u L^{s/p} ||H_window(x)||^s dx)^{1/s}, with L the level
    function, the norms sampled at the dyadic points and held constant on each
    dyadic cell at the larger of the two end values."""
    ex = data.exponents
    s, p = ex.s, ex.p
    e = 1.0 + s / p
    disc, nodes = _dyadic_nodes(data, tag, cfg)
    level = _level(data, tag)
    norms = np.array([_local_at(tag, data, cfg, x=x) for x in nodes])
    notes = []
    # outer end points: 0 / inf where the level integral converges there, else the window
    if tag in SIGMA_SIDE:
        lo_end = 0.0
        hi_end = INF if math.isfinite(data.u.total()) else cfg.x_max
        if hi_end < INF:
            notes.append("cumulative mass infinite: outer integral cut at x_max")
    else:
        lo_end = 0.0 if math.isfinite(float(data.u.tail(0.0))) else cfg.x_min
        hi_end = INF
        if lo_end > 0:
            notes.append("tail mass infinite at 0: outer integral cut at x_min")
    edges = np.concatenate([[lo_end], nodes, [hi_end]])
    held = np.concatenate([[norms[0]], np.maximum(norms[:-1], norms[1:]), [norms[-1]]])
    L = np.asarray(level(edges), float)
    with np.errstate(over="ignore", invalid="ignore"):
        Le = xpow(L, e)
        mass = np.abs(np.diff(Le)) / e
    mass = np.where(np.isnan(mass), 0.0, mass)
    total = float(np.sum(xmul(mass, xpow(held, s))))
    val = float(xpow(total, 1.0 / s))
    return val, {"A2": "oracle-local:dyadic integral", "nodes": len(nodes),
                 "levels": disc.to_json(), "notes": notes}


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

def compute_breakdown(theorem: str, data: ProblemData, cfg: Config = DEFAULT) -> ConstantBreakdown:
    thm, tag = resolve_theorem(theorem)
    ex = data.exponents
    q_mode = "ess-sup" if math.isinf(ex.q) else "finite"
    diag = {"grid": {"x_min": cfg.x_min, "x_max": cfg.x_max, "grid_points": cfg.grid_points,
                     "local_cells": cfg.local_cells, "t_per_cell": cfg.t_per_cell},
            "exponents": ex.to_json()}
    if math.isinf(ex.p):
        # the whole constant is the norm of the operator applied to 1/v
        op = OperatorKind(tag, ex.q, data.w, data.k)
        est = best_constant(InequalitySpec(op, INF, data.v, r=ex.r, u=data.u), cfg)
        diag["note"] = "p = inf: single value ||Op(1/v)||, reported as A0"
        return ConstantBreakdown(thm, tag, ex.regime, q_mode, est.value, 0.0, 0.0,
                                 {"A0": est.method, "A1": "n/a", "A2": "n/a"}, diag, mode="p=inf")
    if math.isinf(ex.r):
        a2, d2 = _A2(thm, data, cfg)
        diag.update({k: v for k, v in d2.items() if k != "A2"})
        diag["note"] = "r = inf: single value sup_t U(t)||H_t||, reported as A2"
        return ConstantBreakdown(thm, tag, ex.regime, q_mode, 0.0, 0.0, a2,
                                 {"A0": "n/a", "A1": "n/a", "A2": d2["A2"]}, diag, mode="r=inf")
    (a0, a1), m01 = _aux_terms(thm, data, cfg)
    a2, d2 = _A2(thm, data, cfg)
    method = {"A0": m01["A0"], "A1": m01["A1"], "A2": d2["A2"]}
    diag.update({k: v for k, v in m01.items() if k not in ("A0", "A1")})
    diag.update({k: v for k, v in d2.items() if k != "A2"})
    return ConstantBreakdown(thm, tag, ex.regime, q_mode, a0, a1, a2, method, diag)


# ---------------------------------------------------------------------------
# classical bracket for kernel-free Hardy inequalities with p = r
# ---------------------------------------------------------------------------

def muckenhoupt_bracket(alpha, v: Weight, p: float, cfg: Config = DEFAULT,
                        side: str = "left") -> tuple[float, float, float]:
    """(B, lower, upper) for (int alpha (int_0^x f)^p)^{1/p} <= C ||f||_{L^p_v}
    (side 'left') or its dual with int_x^inf f (side 'right'), 1 < p < inf.

    B = sup_t (int_t^inf alpha)^{1/p} (int_0^t v^{1-p'})^{1/p'} for side 'left';
    the best constant lies in [B, p^{1/p} p'^{1/p'} B].
    """
    if not 1 < p < INF:
        raise PreconditionError("the bracket needs 1 < p < inf")
    pp = p / (p - 1.0)
    pad = 10.0 ** cfg.pad_decades
    bp = make_breakpoints(cfg.x_min / pad, cfg.x_max * pad, 4 * cfg.grid_points,
                          extra=tuple(v.breakpoints))
    X, W, cell = cell_nodes(bp, 8)
    with np.errstate(all="ignore"):
        a = np.nan_to_num(np.asarray(alpha(X), float), nan=0.0) * W
        vv = np.asarray(v(X), float)
        g = np.where(vv > 0, np.power(np.where(vv > 0, vv, 1.0), 1.0 - pp), INF) * W
    ncell = len(bp) - 1
    A = np.bincount(cell, a, ncell)
    G = np.bincount(cell, g, ncell)
    # head/tail of the padded range approximated by the first/last node values
    head_g = bp[0] * float(g[0] / W[0])
    if side == "left":
        up = np.concatenate([np.cumsum(A[::-1])[::-1], [0.0]])       # int_t^inf alpha at bp
        down = np.concatenate([[head_g], head_g + np.cumsum(G)])     # int_0^t v^{1-p'} at bp
    else:
        down = np.concatenate([[0.0], np.cumsum(A)])                 # int_0^t alpha
        up = np.concatenate([np.cumsum(G[::-1])[::-1], [0.0]])       # int_t^inf v^{1-p'}
    with np.errstate(all="ignore"):
        vals = xmul(xpow(up, 1.0 / p), xpow(down, 1.0 / pp)) if side == "left" else \
            xmul(xpow(down, 1.0 / p), xpow(up, 1.0 / pp))
    B = float(np.nanmax(vals))
    return B, B, B * p ** (1.0 / p) * pp ** (1.0 / pp)
