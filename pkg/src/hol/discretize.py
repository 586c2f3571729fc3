"""Level-doubling maps sigma/zeta, their iterates, and dyadic discretizations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .realfun import INF, X_MAX, X_MIN, PreconditionError, Weight

BISECT_RTOL = 1e-13
_TINY = 1e-300
_HUGE = 1e300


# ---------------------------------------------------------------------------
# standing assumptions
# ---------------------------------------------------------------------------

def check_cumulative(u: Weight, x_min: float = X_MIN) -> None:
    """Every cumulative integral over a finite interval must be finite."""
    if not math.isfinite(float(u.cumulative(x_min))):
        raise PreconditionError("weight u violates the cumulative assumption: its integral over (0, t) diverges")


def check_tail(u: Weight, x_min: float = X_MIN) -> None:
    """Every tail integral over (t, inf) must be finite and positive."""
    t = float(u.tail(x_min))
    if not math.isfinite(t):
        raise PreconditionError("weight u violates the tail assumption: its integral over (t, inf) diverges")
    if u.support_end < INF:
        raise PreconditionError("weight u violates the tail assumption: its tail integral vanishes beyond the support")


# ---------------------------------------------------------------------------
# monotone inversion
# ---------------------------------------------------------------------------

def _bracket_geometric(pred, x0: np.ndarray):
    """Find lo < hi with pred(lo) False and pred(hi) True by doubling/halving.

    Returns (lo, hi, none_true, all_true): entries with none_true never satisfy
    the predicate on representable reals, entries with all_true satisfy it
    arbitrarily close to 0.
    """
    x0 = np.where((x0 > 0) & np.isfinite(x0), x0, 1.0)
    hi = x0.copy()
    ok = pred(hi)
    none_true = np.zeros(hi.shape, bool)
    # grow hi until pred holds
    todo = ~ok
    while np.any(todo):
        hi = np.where(todo, hi * 16.0, hi)
        ok = np.where(todo, pred(hi), ok)
        none_true |= todo & ~ok & (hi > _HUGE)
        todo = ~ok & ~none_true
    lo = np.where(none_true, hi, hi / 16.0)
    bad = pred(lo) & ~none_true
    all_true = np.zeros(hi.shape, bool)
    while np.any(bad):
        hi = np.where(bad, lo, hi)
        lo = np.where(bad, lo / 16.0, lo)
        all_true |= bad & (lo < _TINY)
        bad = bad & ~all_true
        if np.any(bad):
            bad = bad & pred(lo)
    return lo, hi, none_true, all_true


def _bisect(pred, lo, hi, rtol: float = BISECT_RTOL):
    """Shrink [lo, hi] (pred(lo) False, pred(hi) True) geometrically."""
    for _ in range(200):
        if np.all(hi - lo <= rtol * hi):
            break
        mid = np.sqrt(lo * hi)
        mid = np.where((mid <= lo) | (mid >= hi), 0.5 * (lo + hi), mid)
        t = pred(mid)
        hi = np.where(t, mid, hi)
        lo = np.where(t, lo, mid)
    return hi


def first_reaching(F, target, x0=None) -> np.ndarray:
    """inf{y > 0 : F(y) >= target} for nondecreasing F (vectorized), inf(empty) = inf."""
    target = np.atleast_1d(np.asarray(target, dtype=float))
    x0 = np.ones_like(target) if x0 is None else np.broadcast_to(np.asarray(x0, float), target.shape).copy()
    out = np.zeros_like(target)
    live = target > 0
    inf_t = np.isinf(target)
    out[inf_t] = INF
    live &= ~inf_t
    if np.any(live):
        tg = target[live]

        def pred(y):
            return F(y) >= tg

        lo, hi, none_true, all_true = _bracket_geometric(pred, x0[live])
        res = _bisect(pred, lo, hi)
        res = np.where(none_true, INF, res)
        res = np.where(all_true, 0.0, res)
        out[live] = res
    return out


def last_reaching(G, target, x0=None) -> np.ndarray:
    """sup{y > 0 : G(y) >= target} for nonincreasing G (vectorized), sup(empty) = 0."""
    target = np.atleast_1d(np.asarray(target, dtype=float))
    x0 = np.ones_like(target) if x0 is None else np.broadcast_to(np.asarray(x0, float), target.shape).copy()
    out = np.full_like(target, INF)
    live = target > 0
    inf_t = np.isinf(target)
    out[inf_t] = 0.0
    live &= ~inf_t
    if np.any(live):
        tg = target[live]

        def pred(y):
            # True beyond the sup point
            return G(y) < tg

        lo, hi, none_true, all_true = _bracket_geometric(pred, x0[live])
        res = _bisect(pred, lo, hi)
        res = np.where(none_true, INF, res)
        res = np.where(all_true, 0.0, res)
        out[live] = res
    return out


# ---------------------------------------------------------------------------
# sigma and zeta
# ---------------------------------------------------------------------------

def cumulative_level(u: Weight, target, x0=None) -> np.ndarray:
    """inf{y : int_0^y u >= target}, accurate also when target is near the total mass.

    Levels in the upper half of a finite total are located through the tail
    integral, which avoids the cancellation in 1 - e^{-y} style cumulatives.
    A level equal to the total mass is reached only if u has bounded support.
    """
    target = np.atleast_1d(np.asarray(target, dtype=float))
    total = u.total()
    if not math.isfinite(total):
        return first_reaching(u.cumulative, target, x0)
    out = np.empty_like(target)
    gap = total - target
    over = gap < -1e-15 * total
    exact = ~over & (gap <= 1e-15 * total)
    upper = ~over & ~exact & (gap < 0.5 * total)
    lower = ~over & ~exact & ~upper
    out[over] = INF
    if np.any(exact):
        out[exact] = (first_reaching(u.cumulative, target[exact]) if u.support_end < INF
                      else INF)
    if np.any(upper):
        # U(y) >= target  <=>  T(y) <= gap
        g = gap[upper]
        out[upper] = _first_tail_below(u, g)
    if np.any(lower):
        xs = None if x0 is None else np.broadcast_to(np.asarray(x0, float), target.shape)[lower]
        out[lower] = first_reaching(u.cumulative, target[lower], xs)
    return out


def _first_tail_below(u: Weight, gap: np.ndarray) -> np.ndarray:
    """inf{y : int_y^inf u <= gap} for gap > 0."""

    def pred(y):
        return u.tail(y) <= gap

    lo, hi, none_true, all_true = _bracket_geometric(pred, np.ones_like(gap))
    res = _bisect(pred, lo, hi)
    res = np.where(none_true, INF, res)
    return np.where(all_true, 0.0, res)


def _sigma_step(u: Weight, x: np.ndarray, up: bool) -> np.ndarray:
    out = np.full_like(x, INF)
    fin = np.isfinite(x)
    if np.any(fin):
        U = np.asarray(u.cumulative(x[fin]), dtype=float)
        target = 2.0 * U if up else 0.5 * U
        out[fin] = cumulative_level(u, target, x[fin])
    return out


def _zeta_step(u: Weight, x: np.ndarray, up: bool) -> np.ndarray:
    T = np.asarray(u.tail(x), dtype=float)
    target = 0.5 * T if up else 2.0 * T
    return last_reaching(u.tail, target, np.where(x > 0, x, 1.0))


def _iterate(step, x, m: int):
    arr = np.atleast_1d(np.asarray(x, dtype=float)).copy()
    for _ in range(abs(int(m))):
        arr = step(arr, m > 0)
    return arr


def _scalar(out, x):
    return float(out[0]) if np.ndim(x) == 0 else out


def sigma_map(u: Weight, x, m: int = 1, check: bool = True):
    """sigma^m(x); negative m composes sigma^{-1}. Once a value is inf it stays inf."""
    if check:
        check_cumulative(u)
    if np.any(np.asarray(x) < 0):
        raise PreconditionError("x must be nonnegative")
    out = _iterate(lambda a, up: _sigma_step(u, a, up), x, m)
    return _scalar(out, x)


def zeta_map(u: Weight, x, m: int = 1, check: bool = True):
    """zeta^m(x) built on tail integrals; sup(empty) = 0."""
    if check:
        check_tail(u)
    if np.any(np.asarray(x) < 0):
        raise PreconditionError("x must be nonnegative")
    out = _iterate(lambda a, up: _zeta_step(u, a, up), x, m)
    return _scalar(out, x)


# ---------------------------------------------------------------------------
# dyadic sequences
# ---------------------------------------------------------------------------

@dataclass
class Discretization:
    """Points a_n with int_0^{a_n} u = 2^n (kind 'cumulative') or
    int_{a_n}^inf u = 2^{-n} (kind 'tail'), restricted to a window."""

    n0: int
    N: float
    a: dict = field(default_factory=dict)
    kind: str = "cumulative"
    truncated: bool = False

    def indices(self) -> list[int]:
        return sorted(self.a)

    def finite_values(self) -> np.ndarray:
        return np.array([self.a[n] for n in self.indices() if math.isfinite(self.a[n])])

    def level(self, n: int) -> float:
        return 2.0 ** n if self.kind == "cumulative" else 2.0 ** (-n)

    def to_json(self) -> dict:
        N = self.N if math.isfinite(self.N) else "inf"
        return {"n0": self.n0, "N": N, "kind": self.kind, "truncated": self.truncated,
                "a": [{"n": n, "value": (v if math.isfinite(v) else "inf")}
                      for n, v in sorted(self.a.items())]}


def _first_positive(F, x_min: float, x_max: float) -> float:
    for y in np.geomspace(x_min, x_max, 241):
        val = float(F(y))
        if val > 0:
            return val
    return 0.0


def dyadic_sequence(u: Weight, window: tuple[float, float] = (X_MIN, X_MAX),
                    n0: int | None = None) -> Discretization:
    """The sequence a_n = inf{y : int_0^y u >= 2^n} for n0 <= n <= N inside the window.

    By default n0 makes a_{n0} the first level point >= x_min.
    """
    check_cumulative(u, window[0])
    x_min, x_max = window
    total = u.total()
    if n0 is None:
        base = float(u.cumulative(x_min))
        if base <= 0:
            base = _first_positive(u.cumulative, x_min, x_max)
        if base <= 0:
            raise PreconditionError("u vanishes on the whole window; no dyadic levels")
        n0 = int(math.ceil(math.log2(base) - 1e-12))
    if math.isfinite(total):
        n_top = int(math.floor(math.log2(total) + 1e-12)) if total > 0 else n0 - 1
    else:
        n_top = None
    a: dict[int, float] = {}
    n = n0
    truncated = False
    N: float = INF
    while True:
        if n_top is not None and n > n_top:
            N = n - 1
            a[n] = INF
            break
        val = float(cumulative_level(u, 2.0 ** n)[0])
        if not math.isfinite(val):
            N = n - 1
            a[n] = INF
            break
        if val > x_max:
            truncated = True
            break
        a[n] = val
        n += 1
    if len(a) < 2:
        raise PreconditionError("window too narrow to contain two dyadic levels")
    return Discretization(n0=n0, N=N, a=a, kind="cumulative", truncated=truncated)


def tail_dyadic_sequence(u: Weight, window: tuple[float, float] = (X_MIN, X_MAX),
                         n0: int | None = None) -> Discretization:
    """Points b_n = sup{y : int_y^inf u >= 2^{-n}}, increasing in n, for the zeta side."""
    check_tail(u, window[0])
    x_min, x_max = window
    if n0 is None:
        n0 = int(math.ceil(-math.log2(float(u.tail(x_min))) - 1e-12))
    a: dict[int, float] = {}
    n = n0
    truncated = False
    while True:
        val = float(last_reaching(u.tail, 2.0 ** (-n))[0])
        if val > x_max:
            truncated = True
            break
        a[n] = val
        n += 1
        if n - n0 > 4000:
            truncated = True
            break
    if len(a) < 2:
        raise PreconditionError("window too narrow to contain two dyadic levels")
    return Discretization(n0=n0, N=INF, a=a, kind="tail", truncated=truncated)


# ---------------------------------------------------------------------------
# dyadic sum relation
# ---------------------------------------------------------------------------

def dyadic_sum_ratio(lam: dict, s: float, sup: bool = False) -> tuple[float, float, float]:
    """Compare sum_n 2^n (sum_{i>=n} lam_i)^s with sum_n 2^n lam_n^s.

    `lam` maps integers to nonnegative values; indices outside the support
    contribute the geometric head 2^m (tail)^s exactly.  With sup=True the
    inner sum is replaced by sup_{i>=n} lam_i.
    """
    if not s > 0:
        raise PreconditionError("s must be positive")
    items = sorted((int(n), float(v)) for n, v in lam.items() if float(v) != 0.0)
    if any(v < 0 for _, v in items):
        raise PreconditionError("lambda must be nonnegative")
    if not items:
        return 0.0, 0.0, 0.0
    idx = np.array([n for n, _ in items])
    val = np.array([v for _, v in items])
    m, M = int(idx[0]), int(idx[-1])
    dense = np.zeros(M - m + 1)
    dense[idx - m] = val
    if sup:
        tails = np.maximum.accumulate(dense[::-1])[::-1]
    else:
        tails = np.cumsum(dense[::-1])[::-1]
    pw = np.exp2(np.arange(m, M + 1, dtype=float))
    # n < m: sum_{n<m} 2^n = 2^m, each with the full tail tails[0]
    lhs = math.ldexp(1.0, m) * tails[0] ** s + float(np.sum(pw * tails ** s))
    rhs = float(np.sum(pw * dense ** s))
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else INF)
    return lhs, rhs, ratio
