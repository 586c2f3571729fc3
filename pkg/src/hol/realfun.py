"""Numeric substrate: extended reals, weights, step functions, quadrature.

Weights on the semiaxis are finite sums of elementary terms

    c * x**alpha * exp(-beta * x) * chi_[lo, hi)(x)

which is closed under products and covers the power, exponential,
indicator and grid presets.  Every term has a closed-form antiderivative
(incomplete gamma functions), so cumulative and tail integrals of preset
weights are exact, including the parts beyond any truncation window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate as _spi
from scipy import optimize as _spo
from scipy import special as _sps

INF = math.inf

# Default truncation window and evaluation grid.
X_MIN = 1e-6
X_MAX = 1e6
GRID_POINTS = 2048
QUAD_RTOL = 1e-8


class PreconditionError(ValueError):
    """Input violates a standing assumption of the computation."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not converge; carries the partial estimate."""

    def __init__(self, message: str, partial: float, abserr: float):
        super().__init__(f"{message} (partial={partial!r}, abserr={abserr!r})")
        self.partial = partial
        self.abserr = abserr


# ---------------------------------------------------------------------------
# extended reals
# ---------------------------------------------------------------------------

ExtReal = float  # nonnegative float, math.inf allowed


def xmul(a, b):
    """Product with 0 * inf = 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore"):
        out = a * b
    out = np.where((a == 0) | (b == 0), 0.0, out)
    return out[()] if out.ndim == 0 else out


def xdiv(a, b):
    """Quotient with 0/0 = 0, inf/inf = 0 and t/0 = inf for t > 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = a / b
    out = np.where((a == 0) | (np.isinf(a) & np.isinf(b)), 0.0, out)
    return out[()] if out.ndim == 0 else out


def xpow(a, e):
    """Power of a nonnegative extended real; 0**0 = 1, inf**0 = 1."""
    a = np.asarray(a, dtype=float)
    e = np.asarray(e, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.power(a, e)
    out = np.where(e == 0, 1.0, out)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# incomplete gamma helper
# ---------------------------------------------------------------------------

def upper_gamma(s: float, x):
    """Upper incomplete gamma Gamma(s, x) for real s and x > 0 (vectorized).

    scipy only covers s > 0; for s <= 0 the recurrence
    Gamma(s, x) = (Gamma(s + 1, x) - x**s e**-x) / s is applied downwards
    from the first positive shift, with Gamma(0, x) = E1(x).
    """
    x = np.asarray(x, dtype=float)
    if s > 0:
        with np.errstate(over="ignore"):
            return _sps.gamma(s) * _sps.gammaincc(s, x)
    k = math.ceil(-s) if s != math.floor(s) else int(-s)
    top = s + k
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        if top == 0:
            g = _sps.exp1(x)
        else:
            g = _sps.gamma(top) * _sps.gammaincc(top, x)
        cur = top
        for _ in range(k):
            cur -= 1.0
            g = (g - np.power(x, cur) * np.exp(-x)) / cur
    return g


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Term:
    coef: float
    alpha: float = 0.0
    beta: float = 0.0
    lo: float = 0.0
    hi: float = INF

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lo) & (x < self.hi)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if self.alpha == 0:
                px = np.ones_like(x)
            else:
                px = np.power(x, self.alpha)
            val = self.coef * px * np.exp(-self.beta * x) if self.beta else self.coef * px
        return np.where(inside, val, 0.0)

    def times(self, other: "Term") -> "Term | None":
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo >= hi or self.coef == 0 or other.coef == 0:
            return None
        return Term(self.coef * other.coef, self.alpha + other.alpha,
                    self.beta + other.beta, lo, hi)

    def integrate(self, a, b):
        """Vectorized closed-form integral over [a, b]."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        A = np.maximum(a, self.lo)
        B = np.minimum(b, self.hi)
        empty = ~(B > A)
        A = np.where(empty, 1.0, A)
        B = np.where(empty, 1.0, B)
        s = self.alpha + 1.0
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if self.beta == 0:
                if s == 0:
                    val = np.log(B) - np.log(A)
                elif s > 0:
                    val = (np.power(B, s) - np.power(A, s)) / s
                    val = np.where(np.isinf(B), INF, val)
                else:
                    val = (np.power(A, s) - np.power(B, s)) / (-s)
                    val = np.where(A == 0, INF, val)
            elif self.beta > 0:
                bt = self.beta
                if s > 0:
                    # choose the better-conditioned difference
                    lower = _sps.gammainc(s, bt * B) - _sps.gammainc(s, bt * A)
                    upper = _sps.gammaincc(s, bt * A) - _sps.gammaincc(s, bt * B)
                    diff = np.where(bt * A > s, upper, lower)
                    val = _sps.gamma(s) * diff / bt ** s
                else:
                    Apos = np.where(A > 0, A, 1.0)
                    ga = upper_gamma(s, bt * Apos)
                    gb = np.where(np.isinf(B), 0.0, upper_gamma(s, bt * np.where(np.isinf(B), 1.0, B)))
                    val = (ga - gb) / bt ** s
                    val = np.where(A == 0, INF, val)
            else:
                val = _negative_beta_integral(self, A, B)
        val = self.coef * np.asarray(val, dtype=float)
        val = np.where(empty, 0.0, val)
        val = np.maximum(val, 0.0) if self.coef >= 0 else val
        return val[()] if val.ndim == 0 else val


def _negative_beta_integral(term: Term, A, B):
    A = np.atleast_1d(A)
    B = np.atleast_1d(B)
    out = np.empty(np.broadcast(A, B).shape)
    for idx, (lo, hi) in enumerate(zip(np.broadcast_to(A, out.shape).ravel(),
                                      np.broadcast_to(B, out.shape).ravel())):
        if math.isinf(hi) or -term.beta * hi > 700.0:
            # beyond double range: the growing exponential is treated as divergent
            out.flat[idx] = INF
            continue
        g = lambda t: t ** term.alpha * math.exp(-term.beta * t)
        out.flat[idx] = _spi.quad(g, lo, hi, epsrel=1e-12, limit=200)[0]
    return out


class Weight:
    """Nonnegative weight on [0, inf) as a sum of elementary terms."""

    def __init__(self, terms: Iterable[Term], spec: dict | None = None):
        self.terms = tuple(t for t in terms if t.coef != 0 and t.lo < t.hi)
        for t in self.terms:
            if t.coef < 0:
                raise PreconditionError("weights must be nonnegative")
        self.spec = spec if spec is not None else {"kind": "terms", "terms": [t.__dict__ for t in self.terms]}

    def __repr__(self) -> str:
        return f"Weight({self.spec!r})"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for t in self.terms:
            out = out + t(x)
        return out[()] if out.ndim == 0 else out

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            if other < 0:
                raise PreconditionError("weights must be nonnegative")
            return Weight([Term(t.coef * other, t.alpha, t.beta, t.lo, t.hi) for t in self.terms],
                          {"kind": "product", "factors": [self.spec, {"kind": "const", "c": float(other)}]})
        prods = []
        for s in self.terms:
            for o in other.terms:
                t = s.times(o)
                if t is not None:
                    prods.append(t)
        return Weight(prods, {"kind": "product", "factors": [self.spec, other.spec]})

    __rmul__ = __mul__

    def __add__(self, other: "Weight") -> "Weight":
        return Weight(self.terms + other.terms, {"kind": "sum", "terms": [self.spec, other.spec]})

    def times_power(self, alpha: float) -> "Weight":
        return self * power(alpha)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def breakpoints(self) -> list[float]:
        pts = set()
        for t in self.terms:
            if 0 < t.lo < INF:
                pts.add(t.lo)
            if 0 < t.hi < INF:
                pts.add(t.hi)
        return sorted(pts)

    @property
    def support_end(self) -> float:
        return max((t.hi for t in self.terms), default=0.0)

    @property
    def support_start(self) -> float:
        return min((t.lo for t in self.terms), default=INF)

    def integrate(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        out = np.zeros(np.broadcast(a, b).shape)
        for t in self.terms:
            out = out + t.integrate(a, b)
        return out[()] if out.ndim == 0 else out

    def cumulative(self, x):
        return self.integrate(0.0, x)

    def tail(self, x):
        return self.integrate(x, INF)

    def total(self) -> float:
        return float(self.integrate(0.0, INF))

    def to_json(self) -> dict:
        return self.spec


def power(alpha: float, a: float = 0.0, b: float = INF, c: float = 1.0) -> Weight:
    spec = {"kind": "power", "alpha": float(alpha)}
    if a != 0.0 or b != INF:
        spec.update(a=float(a), b=_json_num(b))
    if c != 1.0:
        spec["c"] = float(c)
    return Weight([Term(float(c), float(alpha), 0.0, float(a), float(b))], spec)


def exponential(beta: float = 1.0, c: float = 1.0) -> Weight:
    spec = {"kind": "exp", "beta": float(beta)}
    if c != 1.0:
        spec["c"] = float(c)
    return Weight([Term(float(c), 0.0, float(beta))], spec)


def indicator(a: float, b: float) -> Weight:
    return Weight([Term(1.0, 0.0, 0.0, float(a), float(b))],
                  {"kind": "indicator", "a": float(a), "b": _json_num(b)})


def constant(c: float = 1.0) -> Weight:
    return Weight([Term(float(c))], {"kind": "const", "c": float(c)})


def grid_weight(breakpoints: Sequence[float], values: Sequence[float],
                alphas: Sequence[float] | None = None) -> Weight:
    bp = [float(b) for b in breakpoints]
    vals = [float(v) for v in values]
    if len(bp) != len(vals) + 1:
        raise PreconditionError("grid weight needs len(breakpoints) == len(values) + 1")
    if any(b1 <= b0 for b0, b1 in zip(bp, bp[1:])):
        raise PreconditionError("grid breakpoints must be strictly increasing")
    al = [0.0] * len(vals) if alphas is None else [float(a) for a in alphas]
    spec = {"kind": "grid", "breakpoints": [_json_num(b) for b in bp], "values": vals}
    if alphas is not None:
        spec["alphas"] = al
    return Weight([Term(v, a, 0.0, lo, hi) for v, a, lo, hi in zip(vals, al, bp, bp[1:])], spec)


def _json_num(x: float):
    return "inf" if math.isinf(x) else float(x)


def _num(x) -> float:
    if isinstance(x, str):
        return float(x.replace("∞", "inf"))
    return float(x)


def weight_from_json(spec: dict) -> Weight:
    kind = spec["kind"]
    if kind == "power":
        return power(_num(spec["alpha"]), _num(spec.get("a", 0.0)), _num(spec.get("b", INF)),
                     _num(spec.get("c", 1.0)))
    if kind == "exp":
        return exponential(_num(spec.get("beta", 1.0)), _num(spec.get("c", 1.0)))
    if kind == "indicator":
        return indicator(_num(spec["a"]), _num(spec["b"]))
    if kind == "const":
        return constant(_num(spec.get("c", 1.0)))
    if kind == "grid":
        return grid_weight([_num(b) for b in spec["breakpoints"]], spec["values"], spec.get("alphas"))
    if kind == "product":
        factors = [weight_from_json(f) for f in spec["factors"]]
        out = factors[0]
        for f in factors[1:]:
            out = out * f
        out.spec = spec
        return out
    if kind == "sum":
        parts = [weight_from_json(f) for f in spec["terms"]]
        out = Weight([t for p in parts for t in p.terms], spec)
        return out
    if kind == "terms":
        return Weight([Term(**t) for t in spec["terms"]], spec)
    raise PreconditionError(f"unknown weight kind {kind!r}")


# ---------------------------------------------------------------------------
# step functions
# ---------------------------------------------------------------------------

@dataclass
class GridFunction:
    """Nonnegative step function, half-open cells [t_i, t_{i+1}), zero outside."""

    breakpoints: np.ndarray
    values: np.ndarray
    decreasing: bool = False

    def __post_init__(self):
        self.breakpoints = np.asarray(self.breakpoints, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        bp, vals = self.breakpoints, self.values
        if bp.ndim != 1 or len(bp) != len(vals) + 1:
            raise PreconditionError("need len(breakpoints) == len(values) + 1")
        if np.any(np.diff(bp) <= 0) or bp[0] < 0:
            raise PreconditionError("breakpoints must be nonnegative and strictly increasing")
        if np.any(vals < 0) or np.any(np.isnan(vals)):
            raise PreconditionError("grid function values must be nonnegative")
        if self.decreasing and np.any(np.diff(vals) > 0):
            raise PreconditionError("values flagged decreasing are not nonincreasing")

    @classmethod
    def constant(cls, c: float, a: float = 0.0, b: float = INF) -> "GridFunction":
        return cls(np.array([a, b]), np.array([c]), decreasing=a == 0.0)

    @classmethod
    def sample(cls, fn: Callable, breakpoints, rule: str = "average") -> "GridFunction":
        bp = np.asarray(breakpoints, dtype=float)
        if rule == "midpoint":
            mid = np.where(bp[:-1] > 0, np.sqrt(bp[:-1] * bp[1:]), 0.5 * (bp[:-1] + bp[1:]))
            vals = np.asarray(fn(mid), dtype=float)
        elif rule == "average":
            vals = np.array([integrate(fn, a, b) / (b - a) for a, b in zip(bp[:-1], bp[1:])])
        else:
            raise ValueError(f"unknown sampling rule {rule!r}")
        return cls(bp, vals)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.breakpoints, x, side="right") - 1
        inside = (idx >= 0) & (idx < len(self.values))
        out = np.where(inside, self.values[np.clip(idx, 0, len(self.values) - 1)], 0.0)
        return out[()] if out.ndim == 0 else out

    def scaled(self, c: float) -> "GridFunction":
        return GridFunction(self.breakpoints, self.values * c, self.decreasing)

    def cumulative(self, x):
        """Exact running integral of f from 0 to x."""
        x = np.asarray(x, dtype=float)
        bp, vals = self.breakpoints, self.values
        lo = bp[:-1]
        hi = bp[1:]
        with np.errstate(invalid="ignore"):
            seg = np.clip(x[..., None], lo, hi) - lo
        seg = np.where(np.isnan(seg), 0.0, seg)
        out = xmul(seg, np.broadcast_to(vals, seg.shape)).sum(axis=-1)
        return out[()] if np.ndim(out) == 0 else out

    @property
    def cell_lengths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    def to_json(self) -> dict:
        return {"breakpoints": [_json_num(b) for b in self.breakpoints],
                "values": [float(v) for v in self.values],
                "decreasing": self.decreasing}


def log_grid(x_min: float = X_MIN, x_max: float = X_MAX, n: int = GRID_POINTS) -> np.ndarray:
    return np.geomspace(x_min, x_max, n)


# ---------------------------------------------------------------------------
# exponents
# ---------------------------------------------------------------------------

def parse_exponent(v) -> float:
    if isinstance(v, str):
        v = v.strip().lower()
        if v in ("inf", "infinity", "∞"):
            return INF
    return float(v)


@dataclass(frozen=True)
class Exponents:
    p: float
    r: float
    q: float
    s: float = field(init=False)

    def __post_init__(self):
        p, r, q = (parse_exponent(self.p), parse_exponent(self.r), parse_exponent(self.q))
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "q", q)
        if not p >= 1:
            raise PreconditionError("p must satisfy 1 <= p <= inf; the range 0 < p < 1 is excluded")
        if not r > 0 or not q > 0:
            raise PreconditionError("r and q must be positive")
        inv = max(1.0 / r - 1.0 / p, 0.0)
        object.__setattr__(self, "s", INF if inv == 0 else 1.0 / inv)

    @property
    def regime(self) -> str:
        return "p<=r" if self.p <= self.r else "r<p"

    def to_json(self) -> dict:
        return {k: _json_num(getattr(self, k)) for k in ("p", "r", "q", "s")}


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def quad_integrate(fn: Callable[[float], float], a: float, b: float,
                   rtol: float = QUAD_RTOL, points: Sequence[float] | None = None,
                   limit: int = 400) -> float:
    """Adaptive quadrature of a scalar callable on [a, b] (b may be inf).

    The interval is split at the supplied break points (kinks, jumps) and each
    piece is handed to QUADPACK.  A divergence diagnosis gives +inf; any other
    failure raises QuadratureError with the partial sum.
    """
    if not b > a:
        return 0.0
    cuts = [a] + sorted(p for p in (points or ()) if a < p < b) + [b]
    total = 0.0
    err = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        with np.errstate(all="ignore"):
            res = _spi.quad(fn, lo, hi, epsrel=rtol, epsabs=0.0, limit=limit, full_output=1)
        val, abserr = res[0], res[1]
        if math.isnan(val):
            raise QuadratureError("quadrature produced NaN", total, err)
        if len(res) > 3:
            msg = str(res[3])
            if "divergent" in msg or math.isinf(val):
                return INF
            if abserr > max(1e3 * rtol * abs(val), 1e-12):
                if _grows_without_bound(fn, lo, hi):
                    return INF
                raise QuadratureError(f"quadrature failed on [{lo}, {hi}]: {msg.splitlines()[0]}",
                                      total + val, err + abserr)
        total += val
        err += abserr
    return total


def _grows_without_bound(fn, lo: float, hi: float) -> bool:
    """Heuristic divergence check at an infinite or zero endpoint."""
    def part(a, b):
        with np.errstate(all="ignore"):
            return _spi.quad(fn, a, b, epsrel=1e-6, limit=200, full_output=1)[0]

    if math.isinf(hi):
        base = max(lo, 1.0)
        vals = [part(lo, base * 10.0 ** k) for k in (4, 8, 12)]
    elif lo == 0.0:
        vals = [part(hi * 10.0 ** -k, hi) for k in (4, 8, 12)]
    else:
        return False
    d1, d2 = vals[1] - vals[0], vals[2] - vals[1]
    return d2 > 1e-6 * abs(vals[2]) and d2 >= 0.5 * d1 > 0


def integrate(w, a: float = 0.0, b: float = INF, rtol: float = QUAD_RTOL) -> float:
    """Integral of a weight (closed form) or callable (adaptive) over [a, b]."""
    a = float(a)
    b = float(b)
    if a < 0 or b < a:
        raise PreconditionError("need 0 <= a <= b")
    if a == b:
        return 0.0
    if isinstance(w, Weight):
        return float(w.integrate(a, b))
    pts = getattr(w, "breakpoints", None)
    pts = list(pts) if pts is not None else None
    return quad_integrate(lambda t: float(w(t)), a, b, rtol=rtol, points=pts)


def _eval_points(w, a: float, b: float, n: int, x_min: float, x_max: float) -> np.ndarray:
    lo = max(a, x_min) if a < x_min else a
    hi = min(b, x_max)
    pts = [a]
    if not math.isinf(b):
        pts.append(b)
    if hi > lo > 0:
        pts.extend(np.geomspace(lo, hi, n))
    elif hi > lo:
        pts.extend(np.linspace(lo, hi, n))
    bps = getattr(w, "breakpoints", None)
    if bps is not None:
        for t in list(bps):
            for z in (t, t * (1 - 1e-12), t * (1 + 1e-12)):
                if a <= z <= b and not math.isinf(z):
                    pts.append(z)
    pts = np.unique(np.asarray([p for p in pts if not math.isinf(p)], dtype=float))
    return pts


def ess_sup(w, a: float = 0.0, b: float = INF, n: int = GRID_POINTS,
            x_min: float = X_MIN, x_max: float = X_MAX) -> float:
    """Supremum of w over [a, b] on a log grid, refined by golden section."""
    if not b > a:
        return 0.0
    pts = _eval_points(w, a, b, n, x_min, x_max)
    if len(pts) == 0:
        return 0.0
    with np.errstate(all="ignore"):
        vals = np.asarray(w(pts), dtype=float)
    vals = np.where(np.isnan(vals), 0.0, vals)
    k = int(np.argmax(vals))
    best = float(vals[k])
    if math.isinf(best) or len(pts) < 3:
        return best
    lo = pts[max(k - 1, 0)]
    hi = pts[min(k + 1, len(pts) - 1)]
    if hi > lo:
        res = _spo.minimize_scalar(lambda t: -float(w(t)), bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-12 * max(hi, 1e-300)})
        if res.success and -res.fun > best:
            best = float(-res.fun)
    return best


def lebesgue_norm(f: GridFunction, p, v: Weight) -> float:
    """Weighted (quasi-)norm of a step function; exact via closed-form cell masses."""
    p = parse_exponent(p)
    if not p > 0:
        raise PreconditionError("exponent must be positive")
    bp, vals = f.breakpoints, f.values
    if math.isinf(p):
        best = 0.0
        for c, lo, hi in zip(vals, bp[:-1], bp[1:]):
            if c > 0:
                best = max(best, float(xmul(c, ess_sup(v, lo, hi))))
        return best
    masses = v.integrate(bp[:-1], bp[1:])
    # factor out the largest value so that tiny or huge f neither under- nor overflows
    top = float(np.max(vals)) if len(vals) else 0.0
    if top == 0.0:
        return 0.0
    total = float(np.sum(xmul(xpow(vals / top, p), masses)))
    return float(xmul(top, xpow(total, 1.0 / p)))


def weighted_norm(fn: Callable[[float], float], p, v: Weight, a: float = 0.0, b: float = INF,
                  rtol: float = 1e-7, points: Sequence[float] | None = None) -> float:
    """(int_a^b fn^p v)^(1/p), or ess sup v*fn for p = inf, for a scalar callable."""
    p = parse_exponent(p)
    if math.isinf(p):
        g = lambda t: float(xmul(v(t), fn(t)))
        return ess_sup(_Pointwise(g, v.breakpoints + list(points or ())), a, b)
    pts = list(v.breakpoints) + list(points or ())
    g = lambda t: float(xmul(v(t), xpow(fn(t), p)))
    return float(xpow(quad_integrate(g, a, b, rtol=rtol, points=pts), 1.0 / p))


class _Pointwise:
    def __init__(self, fn, breakpoints):
        self.fn = fn
        self.breakpoints = breakpoints

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            return self.fn(float(x))
        return np.array([self.fn(float(t)) for t in x])


# ---------------------------------------------------------------------------
# vectorized composite Gauss-Legendre in the log variable
# ---------------------------------------------------------------------------

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    if order not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(order)
        _GL_CACHE[order] = ((x + 1.0) / 2.0, w / 2.0)
    return _GL_CACHE[order]


def log_nodes(lo, hi, panels: int = 48, order: int = 8):
    """Per-row quadrature nodes/weights for int_lo^hi g(y) dy, rows independent.

    lo, hi are 1-d arrays with 0 < lo <= hi < inf.  Rows with lo >= hi get
    zero weights.  Returns (Y, W) of shape (len(lo), panels * order).
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    s, w = gauss_legendre(order)
    u = (np.arange(panels)[:, None] + s[None, :]).ravel() / panels
    wu = np.tile(w, panels) / panels
    ok = hi > lo
    llo = np.log(np.where(ok, lo, 1.0))
    span = np.where(ok, np.log(np.where(ok, hi, 1.0)) - llo, 0.0)
    Y = np.exp(llo[:, None] + span[:, None] * u[None, :])
    W = Y * span[:, None] * wu[None, :]
    return Y, W


def log_quad(fn: Callable[[np.ndarray], np.ndarray], lo, hi, panels: int = 48,
             order: int = 8, floor: float = X_MIN * 1e-6):
    """Vectorized int_lo^hi fn(Y) dy per row; lo == 0 is cut at `floor`."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    lo = np.maximum(lo, floor)
    Y, W = log_nodes(lo, hi, panels, order)
    with np.errstate(all="ignore"):
        vals = np.asarray(fn(Y), dtype=float)
    vals = np.where(W == 0, 0.0, vals)
    return np.sum(xmul(vals, W), axis=1)
