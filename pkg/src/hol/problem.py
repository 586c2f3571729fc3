"""Discretized ratio functionals ||LHS(f)|| / ||f||_{L^p_v} and their maximization.

A candidate f is a step function on a log-spaced source grid with values c_j.
Every inequality handled here has one of two shapes

    single:  L(c) = ( sum_m alpha_m (M c)_m^r )^{1/r}
    nested:  L(c) = ( sum_i alpha_i ( sum_m B_im (M c)_m^q )^{r/q} )^{1/r}

where the rows of M hold exact cell integrals of the inner kernel section and
alpha, B carry quadrature weights times the outer weights.  q = inf or r = inf
switch the corresponding sum to a maximum.  Because f is a step function, the
inner integrals are exact; the outer integrals use composite Gauss-Legendre
rules in the log variable, split at every partial cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .kernels import Kernel
from .realfun import INF, GridFunction, PreconditionError, Weight, gauss_legendre, xmul

# ---------------------------------------------------------------------------
# grids and quadrature rules
# ---------------------------------------------------------------------------


def make_breakpoints(lo: float, hi: float, cells: int, extra=()) -> np.ndarray:
    """Log-spaced breakpoints on [lo, hi] with extra points merged in."""
    if not (0 < lo < hi < INF):
        raise PreconditionError(f"invalid grid range [{lo}, {hi}]")
    bp = np.geomspace(lo, hi, max(int(cells), 1) + 1)
    ex = [float(e) for e in extra if lo < e < hi and math.isfinite(e)]
    if ex:
        bp = np.unique(np.concatenate([bp, ex]))
        # drop slivers created by merging
        keep = np.concatenate([[True], np.diff(np.log(bp)) > 1e-9])
        bp = bp[keep]
        bp[-1] = hi
    return bp


def cell_nodes(bp: np.ndarray, order: int):
    """Gauss-Legendre nodes in log variable for each cell; returns (Y, W, cell)."""
    s, w = gauss_legendre(order)
    la = np.log(bp[:-1])
    span = np.diff(np.log(bp))
    Y = np.exp(la[:, None] + span[:, None] * s[None, :])
    W = Y * span[:, None] * w[None, :]
    cell = np.repeat(np.arange(len(bp) - 1), order)
    return Y.ravel(), W.ravel(), cell


def interval_nodes(a: np.ndarray, b: np.ndarray, order: int):
    """Per-row GL nodes on [a_i, b_i] (linear variable); empty rows get zero weight."""
    s, w = gauss_legendre(order)
    ok = b > a
    a2 = np.where(ok, a, 1.0)
    span = np.where(ok, b - a, 0.0)
    Y = a2[:, None] + span[:, None] * s[None, :]
    W = span[:, None] * w[None, :]
    return Y, W


@dataclass
class RangeRule:
    """Quadrature for int_{lo_i}^{hi_i} g(y) dy over a fixed node set plus sub-nodes."""

    main: sp.csr_matrix          # (n_rows, n_main) weights on main nodes
    sub_y: np.ndarray            # (n_rows, 2*order)
    sub_w: np.ndarray            # (n_rows, 2*order)


def range_rule(bp: np.ndarray, Y: np.ndarray, W: np.ndarray, order: int,
               lo: np.ndarray, hi: np.ndarray) -> RangeRule:
    """Split each [lo_i, hi_i] into whole cells (main nodes) and at most two partial cells."""
    n = len(lo)
    lo = np.clip(np.asarray(lo, float), bp[0], bp[-1])
    hi = np.clip(np.nan_to_num(np.asarray(hi, float), posinf=bp[-1]), bp[0], bp[-1])
    hi = np.maximum(hi, lo)
    j_lo = np.searchsorted(bp, lo, side="left")           # first breakpoint >= lo
    j_hi = np.searchsorted(bp, hi, side="right") - 1      # last breakpoint <= hi
    full = j_hi > j_lo
    counts = np.where(full, (j_hi - j_lo) * order, 0)
    indptr = np.concatenate([[0], np.cumsum(counts)])
    idx = np.empty(indptr[-1], dtype=np.int64)
    for i in np.nonzero(counts)[0]:
        idx[indptr[i]:indptr[i + 1]] = np.arange(j_lo[i] * order, j_hi[i] * order)
    main = sp.csr_matrix((W[idx], idx, indptr), shape=(n, len(Y)))
    same = j_lo > j_hi  # lo and hi inside the same cell
    la = np.where(same, lo, lo)
    lb = np.where(same, hi, np.minimum(bp[np.minimum(j_lo, len(bp) - 1)], hi))
    ra = np.where(same, hi, bp[np.clip(j_hi, 0, len(bp) - 1)])
    rb = np.where(same, hi, hi)
    ra = np.maximum(ra, lb)
    y1, w1 = interval_nodes(la, lb, order)
    y2, w2 = interval_nodes(ra, rb, order)
    return RangeRule(main, np.hstack([y1, y2]), np.hstack([w1, w2]))


# ---------------------------------------------------------------------------
# inner matrices
# ---------------------------------------------------------------------------

def inner_matrix(src_bp: np.ndarray, kernel: Kernel | None, y: np.ndarray,
                 lo: np.ndarray, hi: np.ndarray, mode: str) -> np.ndarray:
    """M[m, j] = int over cell_j cut to [lo_m, hi_m] of K(y_m, z) dz.

    mode 'left':  K = k(y, z) (requires hi <= y);
    mode 'right': K = k(z, y) (requires lo >= y);
    mode 'plain': K = 1.
    """
    y = np.asarray(y, float).ravel()
    lo = np.broadcast_to(np.asarray(lo, float), y.shape).ravel()
    hi = np.broadcast_to(np.asarray(hi, float), y.shape).ravel()
    a = np.maximum(src_bp[None, :-1], lo[:, None])
    b = np.minimum(src_bp[None, 1:], hi[:, None])
    live = b > a
    out = np.zeros(a.shape)
    if not np.any(live):
        return out
    rows, cols = np.nonzero(live)
    aa, bb, yy = a[rows, cols], b[rows, cols], y[rows]
    if mode == "plain" or kernel is None:
        vals = bb - aa
    elif mode == "left":
        vals = kernel.int_second(yy, aa, np.minimum(bb, yy))
    elif mode == "right":
        vals = kernel.int_first(yy, np.maximum(aa, yy), bb)
    else:
        raise ValueError(f"unknown inner mode {mode!r}")
    out[rows, cols] = vals
    return out


def inner_rows(mode: str, side: str, y: np.ndarray):
    """Standard inner ranges: side 'left' is int_0^y, side 'right' is int_y^inf."""
    if side == "left":
        return np.zeros_like(y), y
    return y, np.full_like(y, INF)


# ---------------------------------------------------------------------------
# the ratio functional
# ---------------------------------------------------------------------------

@dataclass
class RatioProblem:
    src_bp: np.ndarray
    V: np.ndarray                 # cell masses of v (p finite) or cell sup of v (p = inf)
    p: float
    M: np.ndarray
    alpha: np.ndarray
    r: float
    B: sp.csr_matrix | None = None
    q: float | None = None
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, float)
        self.M = np.asarray(self.M, float)
        if self.B is None and len(self.alpha) != self.M.shape[0]:
            raise ValueError("alpha must have one entry per inner row")
        if self.B is not None:
            self.Bt = self.B.T.tocsr()

    @property
    def nested(self) -> bool:
        return self.B is not None

    # -- norms ---------------------------------------------------------------
    def source_norm(self, C: np.ndarray) -> np.ndarray:
        C = _as2d(C)
        if math.isinf(self.p):
            return np.max(xmul(C, self.V[:, None]), axis=0)
        return np.power(np.sum(xmul(np.power(C, self.p), self.V[:, None]), axis=0), 1.0 / self.p)

    def lhs(self, C: np.ndarray, grad: bool = False):
        C = _as2d(C)
        G = self.M @ C
        G = np.maximum(G, 0.0)
        if not self.nested:
            return self._single(G, grad)
        return self._nested(G, grad)

    def _single(self, G, grad):
        a = self.alpha[:, None]
        r = self.r
        if math.isinf(r):
            prod = xmul(a, G)
            i = np.argmax(prod, axis=0)
            L = prod[i, np.arange(G.shape[1])]
            if not grad:
                return L, None
            dG = np.zeros_like(G)
            dG[i, np.arange(G.shape[1])] = self.alpha[i]
            return L, self.M.T @ dG
        S = np.sum(xmul(a, np.power(G, r)), axis=0)
        L = np.power(S, 1.0 / r)
        if not grad:
            return L, None
        with np.errstate(all="ignore"):
            gpow = np.where(G > 0, np.power(G, r - 1.0), 0.0)
            dG = xmul(a, gpow) * np.where(L > 0, np.power(L, 1.0 - r), 0.0)
        dG = np.nan_to_num(dG, posinf=1e300)
        return L, self.M.T @ dG

    def _nested(self, G, grad):
        q, r = self.q, self.r
        K = G.shape[1]
        if math.isinf(q):
            O = np.zeros((self.B.shape[0], K))
            arg = np.zeros((self.B.shape[0], K), dtype=np.int64)
            for k in range(K):
                prod = self.B.multiply(G[:, k][None, :]).tocsr()
                O[:, k] = prod.max(axis=1).toarray().ravel()
                arg[:, k] = np.asarray(prod.argmax(axis=1)).ravel()
            root = O
        else:
            O = self.B @ np.power(G, q)
            root = np.power(O, 1.0 / q)
        a = self.alpha[:, None]
        if math.isinf(r):
            prod = xmul(a, root)
            i = np.argmax(prod, axis=0)
            L = prod[i, np.arange(K)]
            if not grad:
                return L, None
            dO = np.zeros_like(O)
            with np.errstate(all="ignore"):
                if math.isinf(q):
                    dO[i, np.arange(K)] = self.alpha[i]
                else:
                    Oi = O[i, np.arange(K)]
                    dO[i, np.arange(K)] = self.alpha[i] * np.where(Oi > 0, np.power(Oi, 1.0 / q - 1.0) / q, 0.0)
        else:
            S = np.sum(xmul(a, np.power(root, r)), axis=0)
            L = np.power(S, 1.0 / r)
            if not grad:
                return L, None
            with np.errstate(all="ignore"):
                scale = np.where(L > 0, np.power(L, 1.0 - r), 0.0)
                # d L / d root_i = alpha_i root_i^{r-1} L^{1-r}
                dR = xmul(a, np.where(root > 0, np.power(root, r - 1.0), 0.0)) * scale
                if math.isinf(q):
                    dO = dR
                else:
                    dO = dR * np.where(O > 0, np.power(O, 1.0 / q - 1.0) / q, 0.0)
        dO = np.nan_to_num(dO, posinf=1e300)
        if math.isinf(q):
            dG = np.zeros_like(G)
            for k in range(K):
                rows = np.nonzero(dO[:, k])[0]
                if len(rows):
                    cols = arg[rows, k]
                    bvals = np.asarray(self.B[rows, cols]).ravel()
                    np.add.at(dG[:, k], cols, dO[rows, k] * bvals)
        else:
            with np.errstate(all="ignore"):
                gq = np.where(G > 0, q * np.power(G, q - 1.0), 0.0)
            dG = (self.Bt @ dO) * gq
        dG = np.nan_to_num(dG, posinf=1e300)
        return L, self.M.T @ dG

    def ratio(self, C: np.ndarray) -> np.ndarray:
        L, _ = self.lhs(C)
        N = self.source_norm(C)
        with np.errstate(all="ignore"):
            out = np.where(N > 0, L / np.where(N > 0, N, 1.0), np.where(L > 0, INF, 0.0))
        return out

    def witness(self, c: np.ndarray) -> GridFunction:
        return GridFunction(self.src_bp.copy(), np.asarray(c, float).copy())


def _as2d(C):
    C = np.asarray(C, float)
    return C[:, None] if C.ndim == 1 else C


# ---------------------------------------------------------------------------
# maximization
# ---------------------------------------------------------------------------

@dataclass
class OptimizerConfig:
    restarts: int = 16
    max_iter: int = 500
    seed: int = 42
    tol: float = 1e-5
    patience: int = 5


@dataclass
class OptResult:
    value: float
    c: np.ndarray
    restarts_used: int
    converged: bool
    history: list


def _start_pool(prob: RatioProblem, rng: np.random.Generator) -> np.ndarray:
    bp = prob.src_bp
    n = len(bp) - 1
    mid = np.sqrt(bp[:-1] * bp[1:])
    cols = []
    # (a) single cells
    cols.append(np.eye(n))
    # (b) power profiles
    for g in np.arange(-2.0, 1.01, 0.125):
        cols.append(np.power(mid, g)[:, None])
    # weight-adapted Hardy test functions v^{1-p'} cut at a level
    if prob.p > 1 and math.isfinite(prob.p):
        with np.errstate(all="ignore"):
            dens = prob.V / np.diff(bp)
            base = np.where(dens > 0, np.power(dens, -1.0 / (prob.p - 1.0)), 0.0)
        base = np.nan_to_num(base, posinf=0.0)
        cuts = np.unique(np.linspace(1, n - 1, 17).astype(int))
        for k in cuts:
            lo = base.copy()
            lo[k:] = 0.0
            hi = base.copy()
            hi[:k] = 0.0
            cols.extend([lo[:, None], hi[:, None]])
    # (c) seeded random smooth profiles
    for _ in range(8):
        walk = np.cumsum(rng.normal(scale=0.3, size=n))
        cols.append(np.exp(walk - walk.max())[:, None])
    P = np.hstack(cols)
    P = np.maximum(P, 0.0)
    return P


def _normalize(prob: RatioProblem, C: np.ndarray) -> np.ndarray:
    N = prob.source_norm(C)
    N = np.where((N > 0) & np.isfinite(N), N, 1.0)
    return C / N[None, :]


def maximize(prob: RatioProblem, cfg: OptimizerConfig, extra_starts=None) -> OptResult:
    """Multi-start multiplicative ascent on the discretized ratio."""
    rng = np.random.default_rng(cfg.seed)
    P = _start_pool(prob, rng)
    if extra_starts is not None:
        P = np.hstack([P, _as2d(extra_starts)])
    vals = np.zeros(P.shape[1])
    for s in range(0, P.shape[1], 256):
        vals[s:s + 256] = prob.ratio(P[:, s:s + 256])
    vals = np.nan_to_num(vals, nan=0.0)
    if np.all(vals == 0):
        return OptResult(0.0, np.zeros(P.shape[0]), 0, True, [0.0])
    if np.any(np.isinf(vals)):
        k = int(np.argmax(np.isinf(vals)))
        return OptResult(INF, P[:, k], 1, True, [INF])
    order = np.argsort(-vals, kind="stable")
    K = min(cfg.restarts, int(np.sum(vals > 0)))
    C = P[:, order[:K]].copy()
    # keep starts strictly positive so multiplicative steps can move every cell
    colmax = C.max(axis=0)
    C = np.maximum(C, 1e-8 * colmax[None, :])
    C = _normalize(prob, C)
    cur = prob.ratio(C)
    start_best = float(vals[order[0]])
    if math.isinf(prob.p):
        eta0 = 1.0
    elif prob.p > 1:
        eta0 = min(1.0 / (prob.p - 1.0), 8.0)
    else:
        eta0 = 1.0
    eta = np.full(K, eta0)
    history = [max(start_best, float(np.max(cur)))]
    stall = 0
    converged = False
    active = np.ones(K, bool)
    for it in range(cfg.max_iter):
        idx = np.nonzero(active)[0]
        if len(idx) == 0:
            converged = True
            break
        Ca = C[:, idx]
        L, g = prob.lhs(Ca, grad=True)
        N = prob.source_norm(Ca)
        with np.errstate(all="ignore"):
            if math.isinf(prob.p):
                dN = prob.V[:, None] * np.ones_like(Ca)
            else:
                dN = xmul(prob.V[:, None], np.power(Ca, prob.p - 1.0)) * np.power(N, 1.0 - prob.p)[None, :]
            rel = (g / np.where(L > 0, L, 1.0)[None, :]) / (dN / N[None, :])
        rel = np.nan_to_num(rel, nan=1.0, posinf=1e6)
        rel = np.clip(rel, 1e-12, 1e6)
        improved = np.zeros(len(idx), bool)
        trial_eta = eta[idx].copy()
        newC = Ca.copy()
        newval = cur[idx].copy()
        for _ in range(8):
            pending = ~improved & (trial_eta > 1e-4)
            if not np.any(pending):
                break
            cand = Ca[:, pending] * np.power(rel[:, pending], trial_eta[pending][None, :])
            cmax = cand.max(axis=0)
            cand = np.maximum(cand, 1e-14 * cmax[None, :])
            cand = _normalize(prob, cand)
            cv = prob.ratio(cand)
            ok = cv > cur[idx][pending] * (1 + 1e-13)
            pi = np.nonzero(pending)[0]
            for t, k in enumerate(pi):
                if ok[t]:
                    improved[k] = True
                    newC[:, k] = cand[:, t]
                    newval[k] = cv[t]
                else:
                    trial_eta[k] *= 0.5
        for t, k in enumerate(idx):
            if improved[t]:
                C[:, k] = newC[:, t]
                cur[k] = newval[t]
                eta[k] = min(trial_eta[t] * (1.25 if trial_eta[t] >= eta[k] else 1.0), 4 * eta0 if eta0 > 0 else 8.0)
            else:
                active[k] = False
        best = max(history[-1], float(np.max(cur)))
        gain = (best - history[-1]) / best if best > 0 else 0.0
        history.append(best)
        stall = stall + 1 if gain < cfg.tol else 0
        if stall >= cfg.patience:
            converged = True
            break
    k = int(np.argmax(cur))
    value = float(cur[k])
    c = C[:, k]
    if start_best > value:
        value = start_best
        c = _normalize(prob, P[:, order[0]][:, None])[:, 0]
    return OptResult(value, c, K, converged, history)
