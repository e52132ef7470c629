"""Inverse-distance measure g_ij, the Lambda map, and checks on both."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import sparse
from scipy.special import expit, logit

from .models import ModelParams, PairBand, make_rng

__all__ = [
    "LambdaMap",
    "BandedProximity",
    "TriangleReport",
    "band_proximity",
    "g_to_distance",
    "invert_decreasing",
    "lambda_inverse",
    "lambda_value",
    "link_probability_matrix",
    "pair_proximity",
    "partition_event_probs",
    "triangle_check",
]


def _need_decreasing(params: ModelParams):
    if not params.alpha_zeta < 0:
        raise ValueError("proximity needs alpha_zeta < 0; otherwise g is not a decreasing distance map")


def link_probability_matrix(zeta, params: ModelParams) -> np.ndarray:
    """g_ij = H(alpha0 + alpha_zeta |zeta_i - zeta_j|), g_ii = 1."""
    _need_decreasing(params)
    zeta = np.asarray(zeta, dtype=float)
    g = expit(params.alpha0 + params.alpha_zeta * np.abs(zeta[:, None] - zeta[None, :]))
    np.fill_diagonal(g, 1.0)
    return g


def pair_proximity(pair, params: ModelParams) -> np.ndarray:
    """g_ij = H(alpha0 + alpha_zeta |zeta_ij|) for pair characteristics, no truncation."""
    _need_decreasing(params)
    g = expit(params.alpha0 + params.alpha_zeta * np.abs(np.asarray(pair, dtype=float)))
    np.fill_diagonal(g, 1.0)
    return g


class BandedProximity:
    """Symmetric proximity stored by diagonals: vals[i, w + o] = g_{i, i+o} for |o| <= w.

    Entries with |i - j| > w are read as 0.  Unused corners of ``vals`` are 0.
    """

    def __init__(self, vals: np.ndarray):
        vals = np.asarray(vals, dtype=float)
        if vals.ndim != 2 or vals.shape[1] % 2 != 1:
            raise ValueError("vals must be n x (2w+1)")
        self.vals = vals
        self.width = vals.shape[1] // 2

    @property
    def shape(self):
        n = self.vals.shape[0]
        return (n, n)

    @property
    def n(self) -> int:
        return self.vals.shape[0]

    def row(self, i: int) -> np.ndarray:
        n, w = self.n, self.width
        out = np.zeros(n)
        lo, hi = max(0, i - w), min(n, i + w + 1)
        out[lo:hi] = self.vals[i, lo - i + w : hi - i + w]
        return out

    def __getitem__(self, key):
        i, j = key
        o = int(j) - int(i)
        if abs(o) > self.width:
            return 0.0
        return float(self.vals[int(i), self.width + o])

    def toarray(self) -> np.ndarray:
        return np.vstack([self.row(i) for i in range(self.n)])

    def row_extremes(self):
        """(max, min) per row, counting the implicit zeros."""
        n, w = self.n, self.width
        lo = self.vals.min(axis=1)
        return self.vals.max(axis=1), np.where(n > w + 1, np.minimum(lo, 0.0), lo)

    def colmax(self, rows: np.ndarray) -> np.ndarray:
        """max over r in rows of g_{r, q}, for every q (0 where no entry is stored)."""
        n, w = self.n, self.width
        out = np.zeros(n)
        rows = np.asarray(rows, dtype=int)
        if rows.size == 0:
            return out
        cols = rows[:, None] + np.arange(-w, w + 1)[None, :]
        ok = (cols >= 0) & (cols < n)
        np.maximum.at(out, cols[ok], self.vals[rows][ok])
        return out


def band_proximity(pb: PairBand, params: ModelParams, width: int | None = None) -> BandedProximity:
    """Banded version of pair_proximity; entries with |i - j| > width are left at 0."""
    _need_decreasing(params)
    n = pb.n
    w = pb.width if width is None else min(int(width), pb.width)
    vals = np.zeros((n, 2 * w + 1))
    vals[:, w] = 1.0
    for o in range(1, w + 1):
        m = n - o
        gv = expit(params.alpha0 + params.alpha_zeta * np.abs(pb.zeta[o, :m]))
        vals[:m, w + o] = gv
        vals[o:, w - o] = gv
    return BandedProximity(vals)


@dataclass(frozen=True)
class LambdaMap:
    """Lambda(k) = c H(alpha0 + alpha_zeta k).

    The default c = (1 + e^alpha0) e^-alpha0 gives Lambda(0) = 1.  With
    c = 1 (see ``unnormalized``) the map is the plain logistic link and
    1{g <= Lambda(k)} = 1{distance >= k}.
    """

    alpha0: float = 0.0
    alpha_zeta: float = -1.0
    c: float = field(default=float("nan"))

    def __post_init__(self):
        if not self.alpha_zeta < 0:
            raise ValueError("LambdaMap needs alpha_zeta < 0")
        if math.isnan(self.c):
            object.__setattr__(self, "c", (1.0 + math.exp(self.alpha0)) * math.exp(-self.alpha0))
        if not self.c > 0:
            raise ValueError("c must be positive")

    @classmethod
    def unnormalized(cls, alpha0: float = 0.0, alpha_zeta: float = -1.0) -> "LambdaMap":
        return cls(alpha0, alpha_zeta, 1.0)

    @property
    def top(self) -> float:
        """Lambda(0); exactly 1 for the normalized map despite rounding in c."""
        v = self.c * float(expit(self.alpha0))
        return 1.0 if abs(v - 1.0) <= 1e-12 else v

    def __call__(self, k):
        return lambda_value(k, self)


def lambda_value(k, lam: LambdaMap):
    k = np.asarray(k, dtype=float)
    if np.any(k < 0) or np.any(np.isnan(k)):
        raise ValueError("Lambda is defined for k >= 0 only")
    out = lam.c * expit(lam.alpha0 + lam.alpha_zeta * k)
    # rounding in c can push values near k = 0 just above Lambda(0)
    out = np.where(k == 0, lam.top, np.minimum(out, lam.top))
    return float(out) if out.ndim == 0 else out


def lambda_inverse(g, lam: LambdaMap):
    """Functional inverse of Lambda on (0, Lambda(0)]."""
    g = np.asarray(g, dtype=float)
    if np.any(g <= 0) or np.any(g > 1) or np.any(np.isnan(g)):
        raise ValueError("lambda_inverse needs g in (0, 1]")
    if np.any(g > lam.top * (1 + 1e-15)):
        raise ValueError(f"g above Lambda(0) = {lam.top}")
    k = (logit(np.minimum(g / lam.c, expit(lam.alpha0))) - lam.alpha0) / lam.alpha_zeta
    k = np.where(g >= lam.top, 0.0, np.maximum(k, 0.0))
    return float(k) if k.ndim == 0 else k


def invert_decreasing(f: Callable[[float], float], y: float, lo: float = 0.0, hi: float = 1.0,
                      tol: float = 1e-12, max_iter: int = 200) -> float:
    """Bisection for f(k) = y with f strictly decreasing; used when no closed form exists."""
    if y > f(lo):
        raise ValueError("target above f(lo)")
    while f(hi) > y:
        lo, hi = hi, 2 * hi
        if hi > 1e300:
            raise ValueError("target not bracketed")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if f(mid) > y:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def g_to_distance(g, params: ModelParams):
    """alpha_zeta^-1 (log(g / (1 - g)) - alpha0): inverts H without the c factor."""
    _need_decreasing(params)
    g = np.asarray(g, dtype=float)
    if np.any(g <= 0) or np.any(g >= 1) or np.any(np.isnan(g)):
        raise ValueError("g_to_distance needs g in the open interval (0, 1)")
    out = (logit(g) - params.alpha0) / params.alpha_zeta
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TriangleReport:
    triples: list
    max_violation: float

    @property
    def ok(self) -> bool:
        return not self.triples


def triangle_check(g, max_n: int = 512, force: bool = False) -> TriangleReport:
    """Check 1/g_ij <= 1/g_ik + 1/g_kj over distinct ordered triples (i, k, j).

    A pair with g_ij = 0 passes for a given k only when g_ik = 0 or g_kj = 0.
    Violation magnitudes are 1/g_ij - 1/g_ik - 1/g_kj (inf for the zero case).
    """
    g = g.toarray() if hasattr(g, "toarray") else np.asarray(g, dtype=float)
    n = g.shape[0]
    if n > max_n and not force:
        raise ValueError(f"triangle_check is O(n^3); n={n} exceeds {max_n} (pass force=True)")
    with np.errstate(divide="ignore"):
        inv = np.where(g > 0, 1.0 / np.where(g > 0, g, 1.0), np.inf)
    triples, worst = [], 0.0
    for k in range(n):
        rhs = inv[:, k][:, None] + inv[k, :][None, :]
        with np.errstate(invalid="ignore"):
            gap = inv - rhs
        bad = (inv > rhs) & ~np.isinf(rhs)
        bad[k, :] = False
        bad[:, k] = False
        np.fill_diagonal(bad, False)
        for i, j in zip(*np.nonzero(bad)):
            v = float(gap[i, j])
            triples.append((int(i), k, int(j), v))
            worst = max(worst, v)
    triples.sort()
    return TriangleReport(triples, worst)


def partition_event_probs(sampler, i: int, j: int, k_grid, reps: int, seed, lam: LambdaMap):
    """Monte Carlo Pr(A_m(i, j)) for A_m = {Lambda(k_m) < g_ij <= Lambda(k_{m-1})}.

    The first cell is capped at 1 (Lambda(k_0) = 1) and a final tail cell
    {g_ij <= Lambda(k_M)} is appended so the cells partition [0, 1].
    ``sampler(rng)`` must return a proximity matrix.  Returns (probs, se).
    """
    k = np.asarray(k_grid, dtype=float)
    if k.ndim != 1 or k.size == 0 or np.any(np.diff(k) <= 0) or k[0] < 0:
        raise ValueError("k_grid must be nonnegative and strictly increasing")
    reps = int(reps)
    if reps < 1:
        raise ValueError("reps must be >= 1")
    edges = np.asarray(lambda_value(k, lam), dtype=float)
    counts = np.zeros(k.size + 1)
    for r in range(reps):
        g = sampler(make_rng(seed, r))
        gij = float(g[i, j])
        # number of edges strictly below gij picks the cell
        m = int(np.sum(edges >= gij))
        counts[m] += 1
    p = counts / reps
    return p, np.sqrt(p * (1 - p) / reps)
