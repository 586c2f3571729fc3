"""Pointwise evaluation of the eight quasilinear operators and the localized operators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .discretize import sigma_map, zeta_map
from .kernels import Kernel
from .realfun import (INF, GridFunction, PreconditionError, Weight, ess_sup, parse_exponent,
                      quad_integrate, xmul, xpow)

TAGS = ("T", "calT", "S", "calS", "boldT", "frakT", "boldS", "frakS")

# tag -> (inner side, kernel inside, outer side, outer kernel factor)
#   inner side 'left' : int_0^y (.) f,   'right': int_y^inf (.) f
#   outer side 'up'   : int_x^inf dy,    'down' : int_0^x dy
#   outer factor 'yx' : k(y, x),  'xy': k(x, y),  None: 1
PATTERNS = {
    "T": ("left", True, "up", None),
    "calT": ("right", True, "down", None),
    "S": ("right", True, "up", None),
    "calS": ("left", True, "down", None),
    "boldT": ("left", False, "up", "yx"),
    "frakT": ("right", False, "down", "xy"),
    "boldS": ("right", False, "up", "yx"),
    "frakS": ("left", False, "down", "xy"),
}

ALIASES = {"𝒯": "calT", "𝒮": "calS", "𝐓": "boldT", "𝔗": "frakT", "𝐒": "boldS", "𝔖": "frakS"}


def canonical_tag(tag: str) -> str:
    tag = ALIASES.get(tag, tag)
    if tag not in PATTERNS:
        raise PreconditionError(f"unknown operator tag {tag!r}; expected one of {TAGS}")
    return tag


@dataclass
class OperatorKind:
    tag: str
    q: float
    w: Weight
    k: Kernel

    def __post_init__(self):
        self.tag = canonical_tag(self.tag)
        self.q = parse_exponent(self.q)
        if not self.q > 0:
            raise PreconditionError("q must be positive")

    @property
    def pattern(self):
        return PATTERNS[self.tag]

    def to_json(self) -> dict:
        return {"tag": self.tag, "q": self.q if math.isfinite(self.q) else "inf",
                "w": self.w.to_json(), "k": self.k.to_json()}


# ---------------------------------------------------------------------------
# inner integrals of step functions (exact)
# ---------------------------------------------------------------------------

def inner_integral(f: GridFunction, y, lo, hi, kernel: Kernel | None, side: str):
    """int_{lo}^{hi} K(y, z) f(z) dz with K = k(y, z) (side 'left'), k(z, y)
    (side 'right') or 1 (kernel None); vectorized over y, lo, hi."""
    y = np.atleast_1d(np.asarray(y, float))
    lo = np.broadcast_to(np.asarray(lo, float), y.shape)
    hi = np.broadcast_to(np.asarray(hi, float), y.shape)
    bp, vals = f.breakpoints, f.values
    a = np.maximum(bp[None, :-1], lo[:, None])
    b = np.minimum(bp[None, 1:], hi[:, None])
    live = (b > a) & (vals[None, :] > 0)
    out = np.zeros(y.shape)
    if not np.any(live):
        return out
    rows, cols = np.nonzero(live)
    aa, bb, yy = a[rows, cols], b[rows, cols], y[rows]
    if kernel is None:
        seg = bb - aa
    elif side == "left":
        seg = kernel.int_second(yy, aa, np.minimum(bb, yy))
    else:
        seg = kernel.int_first(yy, np.maximum(aa, yy), bb)
    contrib = xmul(np.asarray(seg, float), vals[cols])
    np.add.at(out, rows, contrib)
    return out


def standard_inner(f: GridFunction, y, side: str, kernel: Kernel | None):
    y = np.atleast_1d(np.asarray(y, float))
    if side == "left":
        return inner_integral(f, y, 0.0, y, kernel, "left")
    return inner_integral(f, y, y, INF, kernel, "right")


class _Integrand:
    """Scalar/vector callable carrying break points for quadrature splitting."""

    def __init__(self, fn, breakpoints):
        self.fn = fn
        self.breakpoints = [b for b in breakpoints if 0 < b < INF]

    def __call__(self, y):
        arr = np.atleast_1d(np.asarray(y, float))
        out = self.fn(arr)
        return float(out[0]) if np.ndim(y) == 0 else out


def _outer_factor(op: OperatorKind, x: float, y: np.ndarray) -> np.ndarray:
    fac = op.pattern[3]
    wy = np.asarray(op.w(y), float)
    if fac == "yx":
        return xmul(wy, op.k(y, np.full_like(y, x)))
    if fac == "xy":
        return xmul(wy, op.k(np.full_like(y, x), y))
    return wy


def apply_operator(op: OperatorKind, f: GridFunction, x: float, rtol: float = 1e-9) -> float:
    """(Op f)(x) for nonnegative step f; divergent outer integrals give +inf."""
    if x < 0:
        raise PreconditionError("x must be nonnegative")
    side, kin, outer, _ = op.pattern
    kern = op.k if kin else None
    if not np.any(f.values > 0):
        return 0.0

    def core(y):
        return standard_inner(f, y, side, kern)

    if outer == "up":
        a, b = float(x), INF
    else:
        a, b = 0.0, float(x)
    if not b > a:
        return 0.0
    pts = list(f.breakpoints) + list(op.w.breakpoints) + [x]
    if math.isinf(op.q):
        g = _Integrand(lambda y: xmul(_outer_factor(op, x, y), core(y)), pts)
        return ess_sup(g, a, b)
    q = op.q

    def integrand(y):
        yy = np.atleast_1d(y)
        return xmul(_outer_factor(op, x, yy), xpow(core(yy), q))

    g = _Integrand(integrand, pts)
    val = quad_integrate(lambda t: float(g(t)), a, b, rtol=rtol, points=g.breakpoints)
    return float(xpow(val, 1.0 / q))


# ---------------------------------------------------------------------------
# localized operators
# ---------------------------------------------------------------------------

SIGMA_FAMILIES = ("H", "Hstar", "boldH", "boldHstar")
ZETA_FAMILIES = ("calH", "calHstar", "frakH", "frakHstar")
FAMILIES = SIGMA_FAMILIES + ZETA_FAMILIES


@dataclass
class LocalWindow:
    """Resolved localized operator: rows in the window, inner integral from/to a fixed point.

    side 'left'  : (Hf)(x) = int_{fixed}^x K f, K = k(x, z)
    side 'right' : (Hf)(x) = int_x^{fixed} K f, K = k(z, x)
    """

    row_lo: float
    row_hi: float
    closed_left: bool
    side: str
    fixed: float
    kernel: Kernel | None

    @property
    def empty(self) -> bool:
        return not self.row_hi > self.row_lo

    def contains(self, x):
        x = np.asarray(x, float)
        if self.closed_left:
            return (x >= self.row_lo) & (x < self.row_hi)
        return (x > self.row_lo) & (x <= self.row_hi)

    def to_json(self) -> dict:
        def j(v):
            return v if math.isfinite(v) else "inf"
        return {"row_lo": j(self.row_lo), "row_hi": j(self.row_hi), "closed_left": self.closed_left,
                "side": self.side, "fixed": j(self.fixed),
                "kernel": None if self.kernel is None else self.kernel.to_json()}


@dataclass
class LocalOpSpec:
    """A localized operator: H_t / H_{c,d} and their starred, calligraphic,
    bold and fraktur variants.  `u` supplies the sigma/zeta maps for windows."""

    family: str
    t: float | None = None
    c: float | None = None
    d: float | None = None
    u: Weight | None = None
    kernel: Kernel | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise PreconditionError(f"unknown local family {self.family!r}")
        if self.t is None and (self.c is None or self.d is None):
            raise PreconditionError("give either t or both c and d")

    @property
    def kernel_inside(self) -> bool:
        return self.family in ("H", "Hstar", "calH", "calHstar")

    def resolve(self) -> LocalWindow:
        fam = self.family
        kern = self.kernel if self.kernel_inside else None
        if self.kernel_inside and kern is None:
            raise PreconditionError(f"family {fam} needs a kernel")
        left = fam in ("H", "boldH", "calHstar", "frakHstar")
        if fam in SIGMA_FAMILIES:
            if self.t is not None:
                return LocalWindow(float(self.t), INF, True, "left" if left else "right",
                                   0.0 if left else INF, kern)
            c, d = float(self.c), float(self.d)
            if not (0 < c <= d):
                raise PreconditionError("sigma-side windows need 0 < c <= d")
            if self.u is None:
                raise PreconditionError("windowed operator needs u for the sigma map")
            if left:
                fixed = sigma_map(self.u, c, -1)
            else:
                fixed = sigma_map(self.u, d, 1) if math.isfinite(d) else INF
            return LocalWindow(c, d, True, "left" if left else "right", fixed, kern)
        if self.t is not None:
            return LocalWindow(0.0, float(self.t), False, "left" if left else "right",
                               0.0 if left else INF, kern)
        c, d = float(self.c), float(self.d)
        if not (0 <= c <= d < INF):
            raise PreconditionError("zeta-side windows need 0 <= c <= d < inf")
        if self.u is None:
            raise PreconditionError("windowed operator needs u for the zeta map")
        if left:
            fixed = zeta_map(self.u, c, -1)
        else:
            fixed = zeta_map(self.u, d, 1)
        return LocalWindow(c, d, False, "left" if left else "right", fixed, kern)


def local_values(win: LocalWindow, f: GridFunction, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, float))
    out = np.zeros_like(x)
    inside = win.contains(x)
    if not np.any(inside) or win.empty:
        return out
    xi = x[inside]
    if win.side == "left":
        val = inner_integral(f, xi, np.full_like(xi, win.fixed), xi, win.kernel, "left")
    else:
        val = inner_integral(f, xi, xi, np.full_like(xi, win.fixed), win.kernel, "right")
    out[inside] = val
    return out


def apply_local(spec: LocalOpSpec | LocalWindow, f: GridFunction, x: float) -> float:
    win = spec if isinstance(spec, LocalWindow) else spec.resolve()
    return float(local_values(win, f, x)[0])
