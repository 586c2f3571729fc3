"""Maximal-operator bounds between Gamma spaces.

For 0 < p, q < inf the norm of the Hardy-Littlewood maximal operator from
Gamma^p(v) to Gamma^q(u) is equivalent to A_cal0 + A_cal2 + A_bf0 + A_bf2,
closed-form expressions in u, v, the function V(z) = int v(y) / (y^p + z^p) dy
and the zeta maps of the weight s^{-q} u(s).  This module evaluates those
expressions and, independently, maximizes the ratio of the underlying
inequality over nonincreasing step functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
import scipy.optimize as spo

from .config import DEFAULT, Config
from .discretize import zeta_map
from .oracle import NormEstimate
from .problem import cell_nodes, make_breakpoints
from .realfun import (INF, GridFunction, PreconditionError, Weight, gauss_legendre, power,
                      quad_integrate, xdiv, xmul, xpow)


@dataclass
class GammaSetup:
    p: float
    q: float
    u: Weight
    v: Weight

    def __post_init__(self):
        self.p, self.q = float(self.p), float(self.q)
        if not (0 < self.p < INF and 0 < self.q < INF):
            raise PreconditionError("need 0 < p < inf and 0 < q < inf")

    @property
    def uq(self) -> Weight:
        """The weight s^{-q} u(s) that drives the zeta maps."""
        return self.u * power(-self.q)

    def check_tail(self, cfg: Config = DEFAULT) -> None:
        """0 < int_t^inf s^{-q} u(s) ds < inf on the working window."""
        uq = self.uq
        lo = float(uq.tail(cfg.x_min))
        if not math.isfinite(lo):
            raise PreconditionError("int_t^inf s^{-q} u(s) ds is infinite")
        if uq.is_zero or uq.support_end < INF:
            raise PreconditionError("int_t^inf s^{-q} u(s) ds vanishes for large t")

    def check_V(self) -> None:
        v, p = self.v, self.p
        if v.is_zero:
            raise PreconditionError("v vanishes identically, V = 0")
        if not math.isfinite(float(v.cumulative(1.0))) or \
                not math.isfinite(float((v * power(-p)).tail(1.0))):
            raise PreconditionError("V(z) = int v(y) dy / (y^p + z^p) diverges")

    def branches(self) -> dict:
        return {"pq": "p<=q" if self.p <= self.q else "q<p",
                "p1": "p<=1" if self.p <= 1 else "p>1"}

    def to_json(self) -> dict:
        return {"p": self.p, "q": self.q, "u": self.u.to_json(), "v": self.v.to_json()}


# ---------------------------------------------------------------------------
# V and the zeta maps
# ---------------------------------------------------------------------------

def compute_V(v: Weight, p: float, z: float) -> float:
    """V(z) = int_0^inf v(y) dy / (y^p + z^p), by adaptive quadrature."""
    if not (p > 0 and z > 0):
        raise PreconditionError("need p > 0 and z > 0")
    zp = z ** p
    pts = sorted(set([z] + list(v.breakpoints)))
    return quad_integrate(lambda y: float(v(y)) / (y ** p + zp), 0.0, INF, rtol=1e-10, points=pts)


def _dens(per_decade: int, cfg: Config) -> int:
    """Scale a nominal node density (set for 8 per decade) by cfg.gamma_per_decade."""
    return max(1, int(round(per_decade * cfg.gamma_per_decade / 8)))


def V_values(v: Weight, p: float, z, cfg: Config = DEFAULT, per_decade: int = 8,
             order: int = 8) -> np.ndarray:
    """Vectorized V(z): Gauss-Legendre in log y on a padded range, split at the
    break points of v, with the head and tail beyond the range in closed form."""
    z = np.atleast_1d(np.asarray(z, float))
    pos = z[(z > 0) & np.isfinite(z)]
    if pos.size > 4096:
        # V is smooth and monotone in log z: tabulate and interpolate log V
        a, b = math.log(pos.min()), math.log(pos.max())
        grid = np.exp(np.linspace(a, b, max(64, int(48 * (b - a) / math.log(10)) + 2)))
        tab = V_values(v, p, grid, cfg, per_decade, order)
        spl = CubicSpline(np.log(grid), np.log(tab))
        out = np.full_like(z, np.nan)
        m = (z > 0) & np.isfinite(z)
        out[m] = np.exp(spl(np.log(z[m])))
        return out
    pad = 10.0 ** (cfg.pad_decades + 2)
    lo = min(cfg.x_min, float(np.min(z))) / pad
    hi = max(cfg.x_max, float(np.max(z))) * pad
    cuts = [lo] + [b for b in v.breakpoints if lo < b < hi] + [hi]
    s, gw = gauss_legendre(order)
    ys, ws = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        panels = max(2, int(math.ceil(_dens(per_decade, cfg) * math.log10(b / a))))
        e = np.linspace(math.log(a), math.log(b), panels + 1)
        t = (e[:-1, None] + np.diff(e)[:, None] * s[None, :]).ravel()
        y = np.exp(t)
        ys.append(y)
        ws.append(y * np.repeat(np.diff(e), order) * np.tile(gw, panels))
    y = np.concatenate(ys)
    wy = np.concatenate(ws) * np.asarray(v(y), float)
    out = np.empty_like(z)
    zp = np.power(z, p)
    for i in range(0, len(z), 512):
        sl = slice(i, i + 512)
        out[sl] = (1.0 / (np.power(y, p)[None, :] + zp[sl, None])) @ wy
    # head: y < lo, where y^p << z^p; tail: y > hi, where z^p << y^p
    out += float(v.cumulative(lo)) / zp + float((v * power(-p)).tail(hi))
    return out


def zeta_q_map(u: Weight, q: float, x, m: int = 1, cfg: Config = DEFAULT):
    """zeta^m(x) for the weight s^{-q} u(s)."""
    GammaSetup(1.0, q, u, Weight([])).check_tail(cfg)
    return zeta_map(u * power(-q), x, m, check=False)


# ---------------------------------------------------------------------------
# the closed-form constants
# ---------------------------------------------------------------------------

class _Ctx:
    """Shared pieces: Tq(x) = int_x^inf s^{-q} u, zeta maps, V, quadrature grids."""

    def __init__(self, setup: GammaSetup, cfg: Config):
        self.s, self.cfg = setup, cfg
        self.uq = setup.uq
        self.pad = 10.0 ** cfg.pad_decades

    def Tq(self, x):
        return np.asarray(self.uq.tail(x), float)

    def U(self, x):
        return np.asarray(self.s.u.cumulative(x), float)

    def zeta(self, x, m):
        return np.atleast_1d(zeta_map(self.uq, np.atleast_1d(x), m, check=False))

    def V(self, z):
        z = np.atleast_1d(np.asarray(z, float))
        out = np.full_like(z, INF)
        pos = z > 0
        fin = pos & np.isfinite(z)
        if np.any(fin):
            out[fin] = V_values(self.s.v, self.s.p, z[fin], self.cfg)
        out[pos & ~np.isfinite(z)] = 0.0
        if np.any(~pos):
            out[~pos] = float((self.s.v * power(-self.s.p)).total())
        return out

    def L(self, x):
        """log(x / zeta^{-2}(x)), taken as 0 where zeta^{-2}(x) = 0 (the inner
        integral over (0, zeta^{-2}(x)) it multiplies is then empty)."""
        z2 = self.zeta(x, -2)
        # zeta^{-2}(x) >= x only where the tail has underflowed, and uq vanishes there
        ok = (z2 > 0) & (z2 < x)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(ok, np.log(x / np.where(ok, z2, 1.0)), 0.0)
        return out

    # quadrature helpers --------------------------------------------------------
    def outer_nodes(self, per_decade: int = 8, order: int = 8):
        per_decade = _dens(per_decade, self.cfg)
        bp = make_breakpoints(self.cfg.x_min / self.pad, self.cfg.x_max * self.pad,
                              int(per_decade * (math.log10(self.cfg.x_max / self.cfg.x_min)
                                                + 2 * self.cfg.pad_decades)),
                              extra=tuple(self.s.u.breakpoints) + tuple(self.s.v.breakpoints))
        X, W, _ = cell_nodes(bp, order)
        return X, W

    def rows(self, lo, hi, per_decade: int = 8, order: int = 8):
        """Per-row log-GL nodes on [lo_i, hi_i] (lo = 0 cut at the padded window)."""
        lo = np.maximum(np.asarray(lo, float), self.cfg.x_min / self.pad ** 2)
        hi = np.asarray(hi, float)
        ok = hi > lo
        la = np.log(np.where(ok, lo, 1.0))
        span = np.where(ok, np.log(np.where(ok, hi, 1.0)) - la, 0.0)
        per_decade = _dens(per_decade, self.cfg)
        panels = max(4, int(math.ceil(per_decade * float(np.max(span, initial=0.0)) / math.log(10))))
        s, gw = gauss_legendre(order)
        t = (np.arange(panels)[:, None] + s[None, :]).ravel() / panels
        wt = np.tile(gw, panels) / panels
        Y = np.exp(la[:, None] + span[:, None] * t[None, :])
        return Y, Y * span[:, None] * wt[None, :]


def _sup_refined(fn, cfg: Config, per_decade: int = 8) -> tuple[float, float]:
    """sup_t fn(t) on a log grid over the window, refined by golden section
    (bounded Brent) around the grid argmax in log t."""
    ts = np.geomspace(cfg.x_min, cfg.x_max,
                      int(_dens(per_decade, cfg) * math.log10(cfg.x_max / cfg.x_min)) + 1)
    with np.errstate(all="ignore"):
        vals = np.nan_to_num(np.asarray(fn(ts), float), nan=0.0)
    i = int(np.argmax(vals))
    best, arg = float(vals[i]), float(ts[i])
    if not math.isfinite(best) or best <= 0:
        return best, arg
    a = math.log(ts[max(i - 1, 0)])
    b = math.log(ts[min(i + 1, len(ts) - 1)])
    if b > a:
        res = spo.minimize_scalar(lambda lt: -float(fn(np.array([math.exp(lt)]))[0]),
                                  bounds=(a, b), method="bounded", options={"xatol": 1e-10})
        if res.success and -res.fun > best:
            best, arg = float(-res.fun), float(math.exp(res.x))
    return best, arg


def _integral_of_V_power(ctx: _Ctx, t, logpow: float | None):
    """int_0^t V(x)^{1/(1-p)} [log(t/x)]^{logpow} dx/x for each t (logpow None: no log factor)."""
    p = ctx.s.p
    t = np.atleast_1d(np.asarray(t, float))
    Y, W = ctx.rows(np.zeros_like(t), t)
    Vy = ctx.V(Y.ravel()).reshape(Y.shape)
    with np.errstate(all="ignore"):
        g = xpow(Vy, 1.0 / (1.0 - p)) / Y
        if logpow is not None:
            g = g * np.power(np.log(t[:, None] / Y), logpow)
    return np.sum(np.where(W > 0, np.nan_to_num(g, nan=0.0) * W, 0.0), axis=1)


def _A_cal0(ctx: _Ctx) -> tuple[float, str]:
    s = ctx.s
    p, q, u = s.p, s.q, s.u
    if p <= q:
        def ratio(t):
            return xdiv(xpow(ctx.U(t), p / q), xmul(np.power(t, p), ctx.V(t)))
        val, _ = _sup_refined(ratio, ctx.cfg)
        return float(xpow(val, 1.0 / p)), "cllA0:p<=q"
    X, W = ctx.outer_nodes()
    with np.errstate(all="ignore"):
        g = xmul(xmul(xpow(xmul(np.power(X, p), ctx.V(X)), q / (q - p)),
                      xpow(ctx.U(X), q / (p - q))), np.asarray(u(X), float))
    I = float(np.sum(np.nan_to_num(g, nan=0.0) * W))
    return float(xpow(xpow(I, (p - q) / q), 1.0 / p)), "clllA0:q<p"


def _bf_tail(ctx: _Ctx):
    """J(y) = int_y^inf x^{-q} u(x) L(x)^q dx as a callable (cumulative log-GL
    sums on a fine grid plus a Gauss-Legendre piece for the partial cell)."""
    s = ctx.s
    q = s.q
    pad = ctx.pad
    bp = make_breakpoints(ctx.cfg.x_min / pad, ctx.cfg.x_max * pad,
                          int(16 * (math.log10(ctx.cfg.x_max / ctx.cfg.x_min) + 2 * ctx.cfg.pad_decades)),
                          extra=tuple(s.u.breakpoints))
    X, W, cell = cell_nodes(bp, 8)

    def g(x):
        x = np.asarray(x, float)
        with np.errstate(all="ignore"):
            val = xmul(np.asarray(ctx.uq(x), float), np.power(ctx.L(x.ravel()).reshape(x.shape), q))
        return np.nan_to_num(val, nan=0.0)

    cellsum = np.bincount(cell, g(X) * W, len(bp) - 1)
    tail_at_bp = np.concatenate([np.cumsum(cellsum[::-1])[::-1], [0.0]])

    def J(y):
        y = np.atleast_1d(np.asarray(y, float))
        out = np.zeros_like(y)
        inside = (y > 0) & (y < bp[-1])
        if not np.any(inside):
            return out
        yi = np.maximum(y[inside], bp[0])
        j = np.searchsorted(bp, yi, side="left")
        j = np.clip(j, 0, len(bp) - 1)
        Y, Wr = ctx.rows(yi, bp[j], per_decade=16)
        part = np.sum(g(Y) * Wr, axis=1)
        out[inside] = tail_at_bp[j] + part
        return out

    return J, g


def _A_bf0(ctx: _Ctx) -> tuple[float, str]:
    s = ctx.s
    p, q = s.p, s.q
    J, g = _bf_tail(ctx)
    if p <= q:
        def ratio(t):
            z2 = ctx.zeta(t, 2)
            return xdiv(xpow(J(z2), p / q), ctx.V(t))
        val, _ = _sup_refined(ratio, ctx.cfg)
        return float(xpow(val, 1.0 / p)), "bffA0:p<=q"
    X, W = ctx.outer_nodes()
    z2 = ctx.zeta(X, -2)
    with np.errstate(all="ignore"):
        inner = xdiv(J(X), ctx.V(z2))
        integrand = xmul(xpow(inner, q / (p - q)), g(X))
    I = float(np.sum(np.nan_to_num(integrand, nan=0.0) * W))
    return float(xpow(xpow(I, (p - q) / q), 1.0 / p)), "bfffA0:q<p"


def _q_lt_p_outer(ctx: _Ctx, local) -> float:
    """(int x^{-q} u Tq^{q/(p-q)} local(x) dx)^{(p-q)/(pq)}."""
    s = ctx.s
    p, q = s.p, s.q
    X, W = ctx.outer_nodes()
    loc = local(X)
    with np.errstate(all="ignore"):
        g = xmul(xmul(np.asarray(ctx.uq(X), float), xpow(ctx.Tq(X), q / (p - q))), loc)
    I = float(np.sum(np.nan_to_num(g, nan=0.0) * W))
    return float(xpow(I, (p - q) / (p * q)))


def _A_cal2(ctx: _Ctx) -> tuple[float, str]:
    s = ctx.s
    p, q = s.p, s.q
    if p <= q:
        if p <= 1:
            fn = lambda t: xmul(xpow(ctx.Tq(t), 1.0 / q), xpow(ctx.V(t), -1.0 / p))
            tag = "clA21:p<=q,p<=1"
        else:
            pp = p / (p - 1.0)
            fn = lambda t: xmul(xpow(ctx.Tq(t), 1.0 / q),
                                xpow(_integral_of_V_power(ctx, t, None), 1.0 / pp))
            tag = "clA22:p<=q,p>1"
        return _sup_refined(fn, ctx.cfg)[0], tag
    if p <= 1:
        def local(x):
            z1, zm = ctx.zeta(x, 1), ctx.zeta(x, -1)
            with np.errstate(invalid="ignore"):
                frac = xdiv(xdiv(z1 - zm, z1), xpow(ctx.V(z1), 1.0 / p))
            return xpow(frac, p * q / (p - q))
        return _q_lt_p_outer(ctx, local), "clA211:q<p,p<=1"

    def local(x):
        z1, zm = ctx.zeta(x, 1), ctx.zeta(x, -1)
        Y, W = ctx.rows(zm, z1)
        Vy = ctx.V(Y.ravel()).reshape(Y.shape)
        with np.errstate(all="ignore"):
            g = xpow(xdiv(Y - zm[:, None], xmul(np.power(Y, p), Vy)), 1.0 / (p - 1.0))
        I = np.sum(np.where(W > 0, np.nan_to_num(g, nan=0.0) * W, 0.0), axis=1)
        return xpow(I, q * (p - 1.0) / (p - q))
    return _q_lt_p_outer(ctx, local), "clA221:q<p,p>1"


def _A_bf2(ctx: _Ctx) -> tuple[float, str]:
    s = ctx.s
    p, q = s.p, s.q
    if p <= q:
        if p <= 1:
            def fn(t):
                t = np.atleast_1d(t)
                Y, W = ctx.rows(np.zeros_like(t), t, per_decade=16, order=4)
                Vy = ctx.V(Y.ravel()).reshape(Y.shape)
                with np.errstate(all="ignore"):
                    g = xmul(xpow(Vy, -1.0 / p), np.log(t[:, None] / Y))
                inner = np.max(np.where(W > 0, np.nan_to_num(g, nan=0.0), 0.0), axis=1)
                return xmul(xpow(ctx.Tq(t), 1.0 / q), inner)
            tag = "bA21:p<=q,p<=1"
        else:
            pp = p / (p - 1.0)
            fn = lambda t: xmul(xpow(ctx.Tq(t), 1.0 / q),
                                xpow(_integral_of_V_power(ctx, t, 1.0 / (p - 1.0)), 1.0 / pp))
            tag = "bA22:p<=q,p>1"
        return _sup_refined(fn, ctx.cfg)[0], tag
    if p <= 1:
        def local(x):
            z1, zm = ctx.zeta(x, 1), ctx.zeta(x, -1)
            Y, W = ctx.rows(zm, z1, per_decade=16, order=4)
            Vy = ctx.V(Y.ravel()).reshape(Y.shape)
            with np.errstate(all="ignore"):
                g = xdiv(np.power(np.log(z1[:, None] / Y), p), Vy)
            sup = np.max(np.where(W > 0, np.nan_to_num(g, nan=0.0), 0.0), axis=1)
            return xpow(sup, q / (p - q))
        return _q_lt_p_outer(ctx, local), "bA211:q<p,p<=1"

    def local(x):
        z1, zm = ctx.zeta(x, 1), ctx.zeta(x, -1)
        Y, W = ctx.rows(zm, z1)
        Vy = ctx.V(Y.ravel()).reshape(Y.shape)
        with np.errstate(all="ignore"):
            g = xpow(xdiv(np.log(z1[:, None] / Y), Vy), 1.0 / (p - 1.0)) / Y
        I = np.sum(np.where(W > 0, np.nan_to_num(g, nan=0.0) * W, 0.0), axis=1)
        return xpow(I, q * (p - 1.0) / (p - q))
    return _q_lt_p_outer(ctx, local), "bA221:q<p,p>1"


def maximal_constants(setup: GammaSetup, cfg: Config = DEFAULT) -> dict:
    """A_cal0, A_cal2, A_bf0, A_bf2 and their total, with the formula branch of each."""
    setup.check_V()
    setup.check_tail(cfg)
    ctx = _Ctx(setup, cfg)
    a0, b_a0 = _A_cal0(ctx)
    a2, b_a2 = _A_cal2(ctx)
    f0, b_f0 = _A_bf0(ctx)
    f2, b_f2 = _A_bf2(ctx)
    total = a0 + a2 + f0 + f2
    return {"A_cal0": a0, "A_cal2": a2, "A_bf0": f0, "A_bf2": f2, "total": total,
            "branches": {"A_cal0": b_a0, "A_cal2": b_a2, "A_bf0": b_f0, "A_bf2": b_f2,
                         **setup.branches()}}


# ---------------------------------------------------------------------------
# the inequality itself on the decreasing cone
# ---------------------------------------------------------------------------

def double_star(f: GridFunction, x) -> np.ndarray | float:
    """f**(x) = (1/x) int_0^x f; at x = 0 the limit f(0+)."""
    xa = np.atleast_1d(np.asarray(x, float))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(xa > 0, np.asarray(f.cumulative(xa), float) / np.where(xa > 0, xa, 1.0),
                       f.values[0] if len(f.values) else 0.0)
    return float(out[0]) if np.ndim(x) == 0 else out


def _average_matrices(bp: np.ndarray, x: np.ndarray):
    """A[i, j] = f**(x_i) and B[i, j] = (1/x_i) int_0^{x_i} f**(y) dy for the
    indicator of source cell j (exact)."""
    b0 = bp[:-1][None, :]
    b1 = bp[1:][None, :]
    X = x[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        length = np.minimum(X, b1) - b0
        A = np.where(X > b0, length, 0.0) / X
        # int_0^x A_j(y) dy
        logb = np.where(b0 > 0, b0 * np.log(np.where(b0 > 0, np.minimum(X, b1) / np.where(b0 > 0, b0, 1.0), 1.0)), 0.0)
        inside = np.where((X > b0), (np.minimum(X, b1) - b0) - logb, 0.0)
        beyond = np.where(X > b1, (b1 - b0) * np.log(X / np.where(np.isfinite(b1), b1, 1.0)), 0.0)
        G = np.nan_to_num(inside + beyond, nan=0.0)
        B = G / X
    return np.nan_to_num(A, nan=0.0), np.nan_to_num(B, nan=0.0)


def _min_sides(f: GridFunction, setup: GammaSetup, rtol: float = 1e-9) -> tuple[float, float]:
    bp, c = f.breakpoints, f.values
    p, q, u, v = setup.p, setup.q, setup.u, setup.v

    def g(x):
        A, B = _average_matrices(bp, np.array([x]))
        return float((B @ c)[0]), float((A @ c)[0])

    # beyond the support end b, f** = F/x and the iterated average is (G_b + F log(x/b))/x
    b = bp[-1] if math.isfinite(bp[-1]) else (bp[-2] if c[-1] == 0 else INF)
    pts = [t for t in bp if 0 < t < b]
    up = sorted(set(pts + [t for t in u.breakpoints if t < b]))
    vp = sorted(set(pts + [t for t in v.breakpoints if t < b]))
    lhs = quad_integrate(lambda x: float(u(x)) * g(x)[0] ** q, 0.0, b, rtol=rtol, points=up)
    rhs = quad_integrate(lambda x: float(v(x)) * g(x)[1] ** p, 0.0, b, rtol=rtol, points=vp)
    if math.isfinite(b):
        F = float(f.cumulative(b))
        Gb = g(b)[0] * b
        rhs += F ** p * float((v * power(-p)).tail(b))
        tpts = [math.log(t / b) for t in u.breakpoints if t > b]

        def tail(t):
            # u(x) x^{1-q} (G_b + F t)^q with x = b e^t; x^{1-q} in logs to stay finite
            if t > 700.0:
                return 0.0
            x = b * math.exp(t)
            return float(xmul(float(u(x)), math.exp((1.0 - q) * math.log(x)) * (Gb + F * t) ** q))

        lhs += quad_integrate(tail, 0.0, INF, rtol=rtol, points=tpts)
    return float(xpow(lhs, 1.0 / q)), float(xpow(rhs, 1.0 / p))


def direct_min_ratio(f: GridFunction, setup: GammaSetup, rtol: float = 1e-9) -> float:
    """LHS / RHS of the maximal inequality restricted to nonincreasing f:
    LHS = ||(1/x) int_0^x f**||_{L^q_u}, RHS = ||f**||_{L^p_v}."""
    if np.any(np.diff(f.values) > 0):
        raise PreconditionError("f must be nonincreasing")
    if not np.any(f.values > 0):
        return 0.0
    lhs, rhs = _min_sides(f, setup, rtol)
    return float(xdiv(lhs, rhs)) if rhs > 0 or lhs == 0 else INF


def pav_decreasing(y: np.ndarray, w: np.ndarray | None = None) -> np.ndarray:
    """Weighted least-squares projection onto nonincreasing sequences (pool adjacent violators)."""
    y = np.asarray(y, float)
    w = np.ones_like(y) if w is None else np.asarray(w, float)
    vals, wts, cnts = [], [], []
    for yi, wi in zip(y, w):
        vals.append(yi)
        wts.append(wi)
        cnts.append(1)
        while len(vals) > 1 and vals[-2] < vals[-1]:
            v2, w2, c2 = vals.pop(), wts.pop(), cnts.pop()
            tot = wts[-1] + w2
            vals[-1] = (vals[-1] * wts[-1] + v2 * w2) / tot if tot > 0 else 0.5 * (vals[-1] + v2)
            wts[-1] = tot
            cnts[-1] += c2
    return np.repeat(vals, cnts)


class _MinProblem:
    def __init__(self, setup: GammaSetup, cfg: Config, cells: int):
        self.setup = setup
        inner = make_breakpoints(cfg.x_min, cfg.x_max, cells, extra=(1.0,))
        # witnesses vanish beyond x_max, so both sides stay finite
        self.bp = np.concatenate([[0.0], inner])
        pad = 10.0 ** cfg.pad_decades
        ev = np.unique(np.concatenate([make_breakpoints(cfg.x_min / pad, cfg.x_max * pad,
                                                        cells + 2 * cfg.pad_cells,
                                                        extra=tuple(setup.u.breakpoints) + tuple(setup.v.breakpoints)),
                                       inner]))
        X, W, _ = cell_nodes(ev, 4)
        A, B = _average_matrices(self.bp, X)
        self.A, self.B = A, B
        self.au = np.asarray(setup.u(X), float) * W
        self.bv = np.asarray(setup.v(X), float) * W
        self.n = len(self.bp) - 1

    def sides(self, C):
        C = np.atleast_2d(C.T).T if C.ndim == 1 else C
        G = self.B @ C
        F = self.A @ C
        L = np.power(np.maximum(self.au @ np.power(G, self.setup.q), 0.0), 1.0 / self.setup.q)
        N = np.power(np.maximum(self.bv @ np.power(F, self.setup.p), 0.0), 1.0 / self.setup.p)
        return L, N, G, F

    def ratio(self, C):
        L, N, _, _ = self.sides(C)
        with np.errstate(all="ignore"):
            return np.where(N > 0, L / np.where(N > 0, N, 1.0), np.where(L > 0, INF, 0.0))

    def grad_parts(self, c):
        p, q = self.setup.p, self.setup.q
        L, N, G, F = self.sides(c[:, None])
        G, F = G[:, 0], F[:, 0]
        with np.errstate(all="ignore"):
            dL = self.B.T @ (self.au * np.where(G > 0, np.power(G, q - 1.0), 0.0))
            dN = self.A.T @ (self.bv * np.where(F > 0, np.power(F, p - 1.0), 0.0))
        # gradients of L^q / q and N^p / p; the logarithmic derivatives are dL/L^q, dN/N^p
        return float(L[0]), float(N[0]), dL / max(L[0] ** q, 1e-300), dN / max(N[0] ** p, 1e-300)


def _min_starts(prob: _MinProblem, rng: np.random.Generator) -> np.ndarray:
    n = prob.n
    bp = prob.bp
    mids = np.where(np.isinf(bp[1:]), bp[:-1] * 2.0, np.sqrt(np.maximum(bp[:-1], 1e-300) * bp[1:]))
    mids[0] = bp[1] / 2.0
    starts = []
    # indicators of [0, b]
    for j in range(0, n, max(1, n // 64)):
        c = np.zeros(n)
        c[: j + 1] = 1.0
        starts.append(c)
    one = int(np.searchsorted(bp, 1.0))
    c = np.zeros(n)
    c[:one] = 1.0
    starts.append(c)
    # decreasing powers, plain and cut
    for gamma in np.arange(0.0, 1.0, 0.125):
        base = np.power(mids, -gamma)
        starts.append(base / base.max())
        for cut in (1e-2, 1.0, 1e2):
            starts.append(np.where(mids < cut, base, 0.0) / base.max())
    for _ in range(8):
        starts.append(np.sort(rng.random(n))[::-1] * (rng.random(n) < 0.9).cumprod())
    return np.array(starts).T


def estimate_min_constant(setup: GammaSetup, cfg: Config = DEFAULT, cells: int = 192) -> NormEstimate:
    """Lower bound for the best constant of the maximal inequality on the
    nonincreasing cone, by projected multiplicative ascent from many starts."""
    if setup.u.is_zero:
        return NormEstimate(0.0, GridFunction([0.0, 1.0], [0.0]), 0, True, [0.0], "trivial")
    prob = _MinProblem(setup, cfg, cells)
    rng = np.random.default_rng(cfg.seed)
    S = _min_starts(prob, rng)
    vals = prob.ratio(S)
    vals = np.where(np.isfinite(vals), vals, -1.0)
    if np.all(vals <= 0):
        return NormEstimate(0.0, GridFunction(prob.bp, S[:, 0] * 0), 0, True, [0.0], "oracle")
    order = np.argsort(-vals, kind="stable")[: cfg.restarts]
    best_val, best_c = -1.0, None
    history: list[float] = []
    converged = True
    for idx in order:
        c = S[:, idx].copy()
        cur = float(prob.ratio(c)[0])
        eta, stall = 1.0, 0
        hist = [cur]
        for _ in range(cfg.max_iter):
            L, N, gl, gn = prob.grad_parts(c)
            with np.errstate(all="ignore"):
                rel = np.where(gn > 0, gl / np.where(gn > 0, gn, 1.0), 1.0)
            rel = np.clip(np.nan_to_num(rel, nan=1.0, posinf=1e6), 1e-6, 1e6)
            improved = False
            step = eta
            for _ in range(8):
                trial = pav_decreasing(c * np.power(rel, step))
                trial = np.maximum(trial, 0.0)
                if trial.max() > 0:
                    trial = trial / trial.max()
                val = float(prob.ratio(trial)[0])
                if val > cur:
                    improved = True
                    break
                step *= 0.5
            if not improved:
                break
            gain = (val - cur) / max(cur, 1e-300)
            c, cur = trial, val
            hist.append(cur)
            eta = min(step * 1.5, 4.0)
            stall = stall + 1 if gain < cfg.tol else 0
            if stall >= cfg.patience:
                break
        else:
            converged = False
        if cur > best_val:
            best_val, best_c, history = cur, c, hist
    witness = GridFunction(prob.bp.copy(), best_c.copy(), decreasing=True)
    return NormEstimate(best_val, witness, len(order), converged, history, "oracle:decreasing cone")


def evaluate_min_witness(setup: GammaSetup, witness: GridFunction, cfg: Config = DEFAULT,
                         cells: int = 192) -> float:
    """Recompute the discretized ratio of an estimator witness from scratch."""
    prob = _MinProblem(setup, cfg, cells)
    if len(prob.bp) != len(witness.breakpoints) or not np.allclose(prob.bp, witness.breakpoints):
        raise PreconditionError("witness grid does not match the estimator grid")
    return float(prob.ratio(witness.values)[0])
