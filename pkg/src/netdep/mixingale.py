"""Mixingale coefficient bounds, the summability and dispersion diagnostics, and the covariance check.

Radii follow the grid k_m = m.  Cell m = 0 is the event {g_ij = 1}
(i = j), cell m >= 1 is {Lambda(m) < g_ij <= Lambda(m - 1)} with
Lambda(0) read as 1, and the last cell collects everything farther out.
Probabilities of those cells are computed under the plain logistic map,
for which the cells are {m - 1 <= distance < m}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import models
from .simulate import ModelSpec, draw, stat_moments

__all__ = [
    "PsiBoundTable",
    "covariance_bound_check",
    "covariance_sweep",
    "dispersion_check",
    "event_probs_for",
    "lattice_close_probs",
    "model_bounds",
    "psi_bound_logistic",
    "psi_bound_neighborhood",
    "summability_ceiling",
    "summability_diagnostic",
]

PLATEAU = 0.05
SE_MULT = 3.0


def psi_bound_neighborhood(i: int, k: float, kappa_u: float, mu_abs: float, second_moment: float) -> float:
    """|mu_i| + E[v_i^2]^(1/2) for k <= kappa_u and 0 beyond."""
    if not kappa_u > 0:
        raise ValueError("kappa_u must be positive")
    if mu_abs < 0 or second_moment < 0:
        raise ValueError("moments must be nonnegative")
    if k > kappa_u:
        return 0.0
    return float(mu_abs + math.sqrt(second_moment))


def psi_bound_logistic(i: int, k: float, pair_probs) -> float:
    """2 sum_j |P_j - 1| P_j + 3 e^-k sum_j P_j with P_j = P(|zeta_i - zeta_j| <= k)."""
    p = np.asarray(pair_probs, dtype=float)
    if np.any(p < 0) or np.any(p > 1) or np.any(np.isnan(p)):
        raise ValueError("pair probabilities must lie in [0, 1]")
    return float(2 * np.sum(np.abs(p - 1) * p) + 3 * math.exp(-k) * np.sum(p))


@dataclass(frozen=True)
class PsiBoundTable:
    """bounds[i, m] bounds E[psi_{i, k_m}] on the grid k_m = m, m = 0..M.

    A larger radius conditions on less information, so any bound at a
    smaller radius also holds at a larger one; the table keeps the running
    minimum over k, which makes it nonincreasing by construction.
    """

    bounds: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bounds, dtype=float)
        if b.ndim != 2 or np.any(b < 0) or not np.all(np.isfinite(b)):
            raise ValueError("bounds must be a finite nonnegative n x (M+1) array")
        object.__setattr__(self, "bounds", np.minimum.accumulate(b, axis=1))
        c = np.broadcast_to(np.asarray(self.c, dtype=float), (b.shape[0],)).copy()
        if np.any(c < 0):
            raise ValueError("c_i must be nonnegative")
        object.__setattr__(self, "c", c)

    @property
    def n(self) -> int:
        return self.bounds.shape[0]

    @classmethod
    def from_function(cls, n: int, n_cells: int, f: Callable[[int, int], float], c=1.0):
        b = np.array([[f(i, m) for m in range(n_cells)] for i in range(n)], dtype=float)
        return cls(b, c)


def _tri_cdf(x):
    """CDF of U1 - U2 for independent U(-1/2, 1/2)."""
    x = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
    return np.where(x < 0, 0.5 * (1 + x) ** 2, 1 - 0.5 * (1 - x) ** 2)


def lattice_close_probs(i: int, k: float, n: int, spacing: float = 1.0) -> np.ndarray:
    """P(|zeta_i - zeta_j| <= k), j = 0..n-1, for the lattice-plus-noise characteristics."""
    d = spacing * (np.arange(n) - i)
    p = _tri_cdf(k - d) - _tri_cdf(-k - d)
    p[i] = 1.0
    return np.clip(p, 0.0, 1.0)


def _pair_cells(n: int, n_cells: int):
    """Cell probabilities for pair models: pair (i, j) sits in cell |i - j| (capped at the tail)."""

    def probs(i: int, js: np.ndarray) -> np.ndarray:
        off = np.minimum(np.abs(js - i), n_cells - 1)
        out = np.zeros((js.size, n_cells))
        out[np.arange(js.size), off] = 1.0
        return out

    return probs


def _lattice_cells(n: int, n_cells: int, spacing: float):
    def probs(i: int, js: np.ndarray) -> np.ndarray:
        d = spacing * (js - i)
        out = np.zeros((js.size, n_cells))
        prev = np.zeros(js.size)
        for m in range(1, n_cells):
            cur = _tri_cdf(m - d) - _tri_cdf(-m - d)
            out[:, m] = cur - prev
            prev = cur
        out[:, -1] += 1 - prev
        same = js == i
        out[same] = 0.0
        out[same, 0] = 1.0
        return np.clip(out, 0.0, 1.0)

    return probs


def event_probs_for(spec: ModelSpec, n: int, n_cells: int):
    """Exact cell probabilities P(A_m(i, j)) as a callable probs(i, js) -> (len(js), n_cells)."""
    if spec.model == "distance":
        return _lattice_cells(n, n_cells, spec.params.spacing)
    return _pair_cells(n, n_cells)


def model_bounds(spec: ModelSpec, n: int, n_cells: int | None = None, c=1.0):
    """(PsiBoundTable, event_probs) for the degree of a pair model or the distance model."""
    if spec.banded and spec.stat == "degree":
        kap = spec.params.kappa_u
        if n_cells is None:
            n_cells = models.link_width(kap) + 2
        mu, m2 = stat_moments(spec, n)
        b = np.array(
            [[psi_bound_neighborhood(i, m, kap, abs(mu[i]), m2[i]) for m in range(n_cells)] for i in range(n)]
        )
        return PsiBoundTable(b, c), event_probs_for(spec, n, n_cells)
    if spec.model == "distance":
        if n_cells is None:
            n_cells = 12
        s = spec.params.spacing
        b = np.array(
            [[psi_bound_logistic(i, m, lattice_close_probs(i, m, n, s)) for m in range(n_cells)] for i in range(n)]
        )
        return PsiBoundTable(b, c), event_probs_for(spec, n, n_cells)
    raise ValueError(f"no computable psi bound for model={spec.model!r}, stat={spec.stat!r}")


def summability_diagnostic(psi: PsiBoundTable, event_probs, n_grid) -> dict:
    """Weighted totals sum_i log^2(i+1)/i^2 sum_{j>=i} sum_m psi_{i,m} P(A_m(i,j)) per n.

    ``event_probs`` is either an (n, n, M+1) array or a callable
    probs(i, js) -> (len(js), M+1).  Node labels in the weights are 1-based.
    PASS when the total at the largest n exceeds the total at half that n by
    less than 5 percent.
    """
    grid = sorted({int(x) for x in n_grid})
    if not grid or grid[0] < 1:
        raise ValueError("n_grid must hold positive counts")
    n_max = grid[-1]
    half = max(n_max // 2, 1)
    if n_max > psi.n:
        raise ValueError(f"psi table covers {psi.n} nodes, grid needs {n_max}")
    if callable(event_probs):
        probs = event_probs
    else:
        arr = np.asarray(event_probs, dtype=float)
        if arr.shape[:2] != (psi.n, psi.n) or arr.shape[2] != psi.bounds.shape[1]:
            raise ValueError(f"event probability shape {arr.shape} does not match psi table")

        def probs(i, js):
            return arr[i, js]

    # totals_by_n[n - 1] accumulates every node i < n with partners i <= j < n
    totals_by_n = np.zeros(n_max)
    for i in range(n_max):
        js = np.arange(i, n_max)
        p = probs(i, js)
        if p.shape[1] != psi.bounds.shape[1]:
            raise ValueError("event probabilities and psi table disagree on the number of cells")
        inner = p @ psi.bounds[i]
        w = math.log(i + 2) ** 2 / (i + 1) ** 2
        totals_by_n[i:] += w * np.cumsum(inner)
    totals = {n: float(totals_by_n[n - 1]) for n in grid}
    t_max, t_half = float(totals_by_n[n_max - 1]), float(totals_by_n[half - 1])
    monotone = bool(np.all(np.diff([totals[n] for n in grid]) >= -1e-12))
    growth = t_max - t_half
    passed = monotone and (growth <= 0 if t_half == 0 else growth < PLATEAU * t_half)
    return {"totals": totals, "half": half, "total_half": t_half, "growth": growth, "pass": bool(passed)}


def summability_ceiling(psi: PsiBoundTable, event_probs, n: int) -> float:
    """sup_i sum_j sum_m psi P times sum_i log^2(i+1)/i^2 up to n."""
    sup = 0.0
    for i in range(n):
        js = np.arange(i, n)
        sup = max(sup, float(np.sum(event_probs(i, js) @ psi.bounds[i])))
    w = sum(math.log(i + 1) ** 2 / i**2 for i in range(1, n + 1))
    return sup * w


def _pair_bound(psi: PsiBoundTable, event_probs, i: int, j: int) -> float:
    p = event_probs(i, np.array([j]))[0]
    return float(p @ psi.bounds[i]) * psi.c[i] * psi.c[j]


def covariance_sweep(spec: ModelSpec, n: int, reps: int, seed, K: float = 1.0, c=1.0) -> dict:
    """Monte Carlo covariance of (v_i, v_j) for every pair, with bounds and 3-SE margins."""
    reps = int(reps)
    if reps < 2:
        raise ValueError("need at least 2 replications")
    psi, probs = model_bounds(spec, n, c=c)
    v = np.empty((reps, n))
    for r in range(reps):
        v[r] = draw(spec, n, seed, r).v
    x = v - v.mean(axis=0)
    prod = x[:, :, None] * x[:, None, :]
    cov = prod.sum(axis=0) / (reps - 1)
    se = prod.std(axis=0, ddof=1) / math.sqrt(reps)
    bound = np.array([[2 * K * _pair_bound(psi, probs, i, j) for j in range(n)] for i in range(n)])
    return {"cov": cov, "se": se, "margin": SE_MULT * se, "bound": bound}


def covariance_bound_check(spec: ModelSpec, i: int, j: int, n: int, reps: int, seed, K: float = 1.0, c=1.0):
    """(cov_hat, bound, margin) for one pair; bound = 2 K c_i c_j sum_m psi_{i,m} P(A_m(i, j))."""
    res = covariance_sweep(spec, n, reps, seed, K, c)
    return float(res["cov"][i, j]), float(res["bound"][i, j]), float(res["margin"][i, j])


def dispersion_check(sampler: Callable[[int, np.random.Generator], np.ndarray], k: float, n_grid,
                     reps: int, seed) -> dict:
    """Monte Carlo sup_i sum_j P(|zeta_i - zeta_j| <= k) for each n; PASS when flat across doublings.

    ``sampler(n, rng)`` returns n node characteristics.  Flat means each
    step up the grid raises the estimate by less than 5 percent plus three
    standard errors of the new estimate (the sup over more nodes of noisy
    averages drifts up even when the true sup is constant).
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    reps = int(reps)
    if reps < 1:
        raise ValueError("reps must be >= 1")
    grid = sorted({int(x) for x in n_grid})
    est, se = {}, {}
    for n in grid:
        acc = np.zeros(n)
        acc2 = np.zeros(n)
        for r in range(reps):
            z = np.asarray(sampler(n, models.make_rng(seed, n, r)), dtype=float)
            cnt = np.sum(np.abs(z[:, None] - z[None, :]) <= k, axis=1)
            acc += cnt
            acc2 += cnt * cnt
        mean = acc / reps
        top = int(np.argmax(mean))
        est[n] = float(mean[top])
        var = max(acc2[top] / reps - mean[top] ** 2, 0.0)
        se[n] = math.sqrt(var / reps)
    flat = all(est[b] <= est[a] * (1 + PLATEAU) + SE_MULT * se[b] for a, b in zip(grid, grid[1:]))
    return {"estimates": est, "se": se, "pass": bool(flat)}
