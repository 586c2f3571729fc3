"""Oinarov kernels: presets, closed-form partial integrals, sampled defect."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .realfun import INF, X_MAX, X_MIN, PreconditionError, gauss_legendre, xdiv


class Kernel:
    """Nonnegative kernel k(x, y), zero for x < y.

    Subclasses provide `_raw(x, y)` for x >= y and, when available, exact
    partial integrals in either argument.  The fallback integrates with a
    fixed Gauss-Legendre rule.
    """

    name = "kernel"
    D_declared = 1.0
    homogeneity_degree: float | None = None

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        with np.errstate(all="ignore"):
            val = self._raw(x, y)
        out = np.where(x >= y, val, 0.0)
        return out[()] if out.ndim == 0 else out

    def _raw(self, x, y):
        raise NotImplementedError

    def int_second(self, x, z0, z1):
        """int_{z0}^{z1} k(x, z) dz for z0 <= z1 <= x (vectorized)."""
        return _gl_fallback(lambda z: self(x[..., None], z), z0, z1)

    def int_first(self, y, z0, z1):
        """int_{z0}^{z1} k(z, y) dz for y <= z0 <= z1 (vectorized)."""
        return _gl_fallback(lambda z: self(z, y[..., None]), z0, z1)

    def to_json(self) -> dict:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_json()})"


def _gl_fallback(g, z0, z1, order: int = 16):
    z0 = np.asarray(z0, dtype=float)
    z1 = np.asarray(z1, dtype=float)
    s, w = gauss_legendre(order)
    span = np.maximum(z1 - z0, 0.0)
    Z = z0[..., None] + span[..., None] * s
    vals = g(Z)
    return np.sum(vals * w, axis=-1) * span


class IndicatorKernel(Kernel):
    """k(x, y) = 1 for x >= y."""

    name = "indicator"
    D_declared = 2.0
    homogeneity_degree = 0.0

    def _raw(self, x, y):
        return np.ones(np.broadcast(x, y).shape)

    def int_second(self, x, z0, z1):
        return np.maximum(np.asarray(z1, float) - np.asarray(z0, float), 0.0)

    def int_first(self, y, z0, z1):
        return np.maximum(np.asarray(z1, float) - np.asarray(z0, float), 0.0)

    def to_json(self) -> dict:
        return {"kind": "indicator"}


@dataclass(repr=False)
class DifferencePowerKernel(Kernel):
    """k(x, y) = (x - y)**beta for x >= y, beta >= 0."""

    beta: float = 1.0
    name = "difference_power"

    def __post_init__(self):
        if not self.beta >= 0:
            raise PreconditionError("difference_power kernel needs beta >= 0 to satisfy (O)")
        self.D_declared = 2.0 ** abs(self.beta - 1.0)
        self.homogeneity_degree = self.beta

    def _raw(self, x, y):
        d = np.maximum(x - y, 0.0)
        if self.beta == 0:
            return np.ones_like(d)
        return np.power(d, self.beta)

    def int_second(self, x, z0, z1):
        b1 = self.beta + 1.0
        x = np.asarray(x, float)
        lo = np.maximum(x - np.asarray(z0, float), 0.0)
        hi = np.maximum(x - np.asarray(z1, float), 0.0)
        with np.errstate(invalid="ignore"):
            out = (np.power(lo, b1) - np.power(hi, b1)) / b1
        return np.maximum(np.nan_to_num(out), 0.0)

    def int_first(self, y, z0, z1):
        b1 = self.beta + 1.0
        y = np.asarray(y, float)
        lo = np.maximum(np.asarray(z0, float) - y, 0.0)
        hi = np.maximum(np.asarray(z1, float) - y, 0.0)
        with np.errstate(invalid="ignore"):
            out = (np.power(hi, b1) - np.power(lo, b1)) / b1
        return np.maximum(np.nan_to_num(out), 0.0)

    def to_json(self) -> dict:
        return {"kind": "difference_power", "beta": float(self.beta)}


class LogRatioKernel(Kernel):
    """k(x, y) = log(x / y) for x >= y > 0."""

    name = "log_ratio"
    D_declared = 1.0
    homogeneity_degree = 0.0

    def _raw(self, x, y):
        with np.errstate(invalid="ignore"):
            out = np.log(x) - np.log(y)
        # on the diagonal the ratio is 1, including the corner x = y = 0
        return np.where(np.asarray(x) == np.asarray(y), 0.0, out)

    @staticmethod
    def _anti(x, z):
        # d/dz [z (1 + log(x / z))] = log(x / z); value 0 at z = 0
        with np.errstate(all="ignore"):
            out = z * (1.0 + np.log(x) - np.log(z))
        return np.where(z > 0, out, 0.0)

    def int_second(self, x, z0, z1):
        x = np.asarray(x, float)
        z0 = np.asarray(z0, float)
        z1 = np.asarray(z1, float)
        out = self._anti(x, z1) - self._anti(x, z0)
        return np.where(z1 > z0, np.maximum(out, 0.0), 0.0)

    @staticmethod
    def _anti_first(y, z):
        # d/dz [z (log(z / y) - 1)] = log(z / y)
        with np.errstate(all="ignore"):
            return z * (np.log(z) - np.log(y) - 1.0)

    def int_first(self, y, z0, z1):
        y = np.asarray(y, float)
        z0 = np.asarray(z0, float)
        z1 = np.asarray(z1, float)
        with np.errstate(all="ignore"):
            out = self._anti_first(y, z1) - self._anti_first(y, z0)
            out = np.where(y > 0, out, INF)
        return np.where(z1 > z0, np.maximum(np.nan_to_num(out, posinf=INF), 0.0), 0.0)

    def to_json(self) -> dict:
        return {"kind": "log_ratio"}


class CallableKernel(Kernel):
    """Wraps a user function of (x, y); partial integrals by Gauss-Legendre."""

    name = "callable"

    def __init__(self, fn, D_declared: float = 1.0, label: str = "callable"):
        self.fn = fn
        self.D_declared = float(D_declared)
        self.label = label

    def _raw(self, x, y):
        return np.asarray(self.fn(x, y), dtype=float)

    def to_json(self) -> dict:
        return {"kind": "callable", "label": self.label, "D": self.D_declared}


def kernel_from_json(spec: dict | str) -> Kernel:
    if isinstance(spec, str):
        spec = {"kind": spec}
    kind = spec["kind"]
    if kind in ("indicator", "one"):
        return IndicatorKernel()
    if kind == "difference_power":
        return DifferencePowerKernel(float(spec.get("beta", 1.0)))
    if kind == "difference":
        return DifferencePowerKernel(1.0)
    if kind == "log_ratio":
        return LogRatioKernel()
    raise PreconditionError(f"unknown kernel kind {kind!r}")


def kernel_eval(k: Kernel, x: float, y: float) -> float:
    if x < 0 or y < 0:
        raise PreconditionError("kernel arguments must be nonnegative")
    return float(k(x, y))


# ---------------------------------------------------------------------------
# Oinarov defect
# ---------------------------------------------------------------------------

def _triple_grid(samples: int, x_min: float, x_max: float) -> np.ndarray:
    n = 1
    while n * (n + 1) * (n + 2) // 6 < samples:
        n += 1
    return np.geomspace(x_min, x_max, n)


def oinarov_defect(k: Kernel, samples: int = 100_000, x_min: float = X_MIN,
                   x_max: float = X_MAX) -> float:
    """Smallest D with (k(x,z)+k(z,y))/D <= k(x,y) <= D (k(x,z)+k(z,y)) on a sample.

    Triples x >= z >= y are taken from the tensor cube of a log grid with just
    enough nodes to reach `samples` triples.  Triples where both sides vanish
    carry no information and are skipped.  The result is a lower bound for the
    true constant.
    """
    if samples < 1:
        raise PreconditionError("samples must be >= 1")
    g = _triple_grid(samples, x_min, x_max)
    n = len(g)
    worst = 1.0
    for ix in range(n):
        x = g[ix]
        zz, yy = np.meshgrid(g[: ix + 1], g[: ix + 1], indexing="ij")
        mask = yy <= zz
        z = zz[mask]
        y = yy[mask]
        kxy = k(np.full_like(y, x), y)
        kxz = k(np.full_like(z, x), z)
        kzy = k(z, y)
        if not (np.all(np.isfinite(kxy)) and np.all(np.isfinite(kxz)) and np.all(np.isfinite(kzy))):
            raise PreconditionError("kernel is infinite on a sampled triple; (O) cannot be checked")
        side = kxz + kzy
        live = (kxy > 0) | (side > 0)
        if not np.any(live):
            continue
        a = kxy[live]
        b = side[live]
        up = xdiv(a, b)
        down = xdiv(b, a)
        worst = max(worst, float(np.max(up)), float(np.max(down)))
    return worst


# ---------------------------------------------------------------------------
# chain lemma
# ---------------------------------------------------------------------------

DEFAULT_ALPHAS = tuple(round(0.1 * i, 1) for i in range(1, 11))


@dataclass
class ChainResult:
    alpha: float
    constant: float
    witness: tuple[int, int]
    per_alpha: dict

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "constant": self.constant,
                "witness": list(self.witness),
                "per_alpha": {str(a): v for a, v in self.per_alpha.items()}}


def chain_ratio(k: Kernel, points: np.ndarray, alpha: float) -> tuple[float, tuple[int, int]]:
    """max over n <= i of k(a_{i+1}, a_n) / (sum_{j=n}^{i} k(a_{j+1}, a_j)**alpha)**(1/alpha).

    Indices in the witness are positions in `points`.
    """
    a = np.asarray(points, dtype=float)
    steps = k(a[1:], a[:-1]) ** alpha
    csum = np.concatenate([[0.0], np.cumsum(steps)])
    best = 0.0
    wit = (0, 0)
    m = len(a) - 1
    for n in range(m):
        i = np.arange(n, m)
        lhs = k(a[i + 1], np.full(i.shape, a[n]))
        rhs = (csum[i + 1] - csum[n]) ** (1.0 / alpha)
        ratio = xdiv(lhs, rhs)
        j = int(np.argmax(ratio))
        if ratio[j] > best:
            best = float(ratio[j])
            wit = (n, int(i[j]))
    return best, wit


def chain_alpha(k: Kernel, points, alphas=DEFAULT_ALPHAS, cap: float = 1e3) -> ChainResult:
    """Smallest alpha on the grid whose chain constant stays below `cap`."""
    pts = _finite_points(points)
    if len(pts) < 3:
        raise PreconditionError("chain lemma needs at least 3 finite terms")
    per = {}
    chosen = None
    for alpha in sorted(alphas):
        if not 0 < alpha <= 1:
            raise PreconditionError("alphas must lie in (0, 1]")
        c, wit = chain_ratio(k, pts, alpha)
        per[alpha] = c
        if chosen is None and c <= cap:
            chosen = (alpha, c, wit)
    if chosen is None:
        raise PreconditionError(f"no alpha admits a chain constant below cap={cap}; try a larger cap")
    return ChainResult(chosen[0], chosen[1], chosen[2], per)


def _finite_points(points) -> np.ndarray:
    if hasattr(points, "finite_values"):
        return points.finite_values()
    arr = np.asarray(points, dtype=float)
    return arr[np.isfinite(arr)]
