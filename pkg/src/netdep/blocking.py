"""Nearest-neighbour ordering, bandwidths, adaptive cutoffs and the block/buffer partition.

Proximity may be a dense array, a scipy.sparse matrix or a
BandedProximity.  Entries not stored are read as g = 0, i.e. farther than
anything stored.
Node indices are 0-based throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import sparse

__all__ = [
    "BlockPartition",
    "Cutoffs",
    "TieError",
    "adaptive_cutoffs",
    "bandwidths",
    "build_partition",
    "check_partition",
    "neighbor_order",
    "partition_diagnostics",
]


class TieError(ValueError):
    pass


def _banded(g) -> bool:
    return hasattr(g, "vals") and hasattr(g, "colmax")


def _row(g, i: int) -> np.ndarray:
    if _banded(g):
        return g.row(i)
    if sparse.issparse(g):
        return np.asarray(g[[i]].toarray(), dtype=float).ravel()
    return np.asarray(g[i], dtype=float)


def neighbor_order(g, i: int) -> np.ndarray:
    """Nodes sorted by descending g_ij, ties by ascending index."""
    row = _row(g, i)
    return np.lexsort((np.arange(row.size), -row))


def bandwidths(n: int, c_J: float = 1.0, c_T: float = 1.0, epsilon: float = 0.05):
    """(L_n, R_n) = (c_J n^(3/4), c_T n^(1/4 - epsilon))."""
    if n < 4:
        raise ValueError("bandwidths need n >= 4")
    if not (c_J > 0 and c_T > 0):
        raise ValueError("c_J and c_T must be positive")
    if not 0 < epsilon < 0.25:
        raise ValueError("epsilon must lie in (0, 1/4)")
    return c_J * n**0.75, c_T * n ** (0.25 - epsilon)


@dataclass(frozen=True)
class Cutoffs:
    """Per-node thresholds read off order statistics of each proximity row.

    j_thr[i] is the floor(L)-th largest g_ij, t_thr[i] the (floor(L)+floor(R))-th.
    k/h are the same thresholds mapped to radii when a map was supplied.
    """

    j_thr: np.ndarray
    t_thr: np.ndarray
    k: np.ndarray
    h: np.ndarray
    n_keep: int
    n_buffer: int
    ties: int


def _top_values(g, m: int) -> np.ndarray:
    """Descending top-(m+1) values of each row (padded with zeros)."""
    n = g.shape[0]
    if _banded(g):
        dense = g.vals
        if n > dense.shape[1] and dense.shape[1] < m + 1:
            dense = np.hstack([dense, np.zeros((n, 1))])
    elif sparse.issparse(g):
        g = sparse.csr_matrix(g)
        lens = np.diff(g.indptr)
        width = max(int(lens.max()) if n else 0, min(m + 1, n))
        dense = np.zeros((n, width))
        pos = np.arange(g.nnz) - np.repeat(g.indptr[:-1], lens)
        dense[np.repeat(np.arange(n), lens), pos] = g.data
    else:
        dense = np.asarray(g, dtype=float)
    k = min(m + 1, dense.shape[1])
    width = dense.shape[1]
    if k < width:
        part = np.partition(dense, width - k, axis=1)[:, width - k :]
    else:
        part = dense
    part = np.sort(part, axis=1)[:, ::-1]
    if part.shape[1] < m + 1:
        part = np.hstack([part, np.full((n, m + 1 - part.shape[1]), -np.inf)])
    return part


def adaptive_cutoffs(g, L: float, R: float, to_radius: Callable | None = None) -> Cutoffs:
    n = g.shape[0]
    lk, rb = int(math.floor(L)), int(math.floor(R))
    if lk < 2 or rb < 1:
        raise ValueError("adaptive_cutoffs needs floor(L) >= 2 and floor(R) >= 1")
    lk_eff = min(lk, n)
    lt_eff = min(lk + rb, n)
    top = _top_values(g, lt_eff)
    j_thr = top[:, lk_eff - 1]
    t_thr = top[:, lt_eff - 1]
    if _banded(g):
        hi, lo = g.row_extremes()
    else:
        hi = np.asarray(g.max(axis=1).toarray() if sparse.issparse(g) else g.max(axis=1)).ravel()
        lo = np.asarray(g.min(axis=1).toarray() if sparse.issparse(g) else g.min(axis=1)).ravel()
    if n > 1 and np.any(hi == lo):
        raise TieError(f"degenerate proximity row {int(np.argmax(hi == lo))}: all entries equal")
    ties = 0
    if lk_eff < n:
        ties += int(np.sum(top[:, lk_eff - 1] == top[:, lk_eff]))
    if lt_eff < n and lt_eff > lk_eff:
        ties += int(np.sum(top[:, lt_eff - 1] == top[:, lt_eff]))
    if to_radius is None:
        k = h = np.full(n, np.nan)
    else:
        k = np.asarray(to_radius(j_thr), dtype=float)
        h = np.asarray(to_radius(t_thr), dtype=float)
    return Cutoffs(j_thr, t_thr, k, h, lk, rb, ties)


@dataclass
class BlockPartition:
    centers: list
    j_sets: list
    t_sets: list
    k_cut: list
    h_cut: list
    L: float
    R: float
    terminal: bool = False
    ties: int = 0
    j_thr: list = field(default_factory=list)

    @property
    def n_blocks(self) -> int:
        return len(self.centers)

    @property
    def n_kept(self) -> int:
        """Blocks with a nonempty J-set."""
        return sum(1 for j in self.j_sets if len(j))

    def format_lines(self) -> list[str]:
        """One line per block, 1-based labels."""
        out = []
        for q, j, t, k, h in zip(self.centers, self.j_sets, self.t_sets, self.k_cut, self.h_cut):
            js = ",".join(str(x + 1) for x in j)
            ts = ",".join(str(x + 1) for x in t)
            out.append(f"{q + 1}: J=[{js}] T=[{ts}] k={k:.17g}, h={h:.17g}")
        return out


def _colmax(g, rows: np.ndarray) -> np.ndarray:
    if _banded(g):
        return g.colmax(rows)
    if sparse.issparse(g):
        sub = g[rows]
        return np.asarray(sub.max(axis=0).toarray(), dtype=float).ravel()
    return np.asarray(g[rows], dtype=float).max(axis=0)


def build_partition(g, cutoffs: Cutoffs, L: float, R: float) -> BlockPartition:
    """Recursive construction of kept-blocks J and buffers T.

    q_1 = node 0.  J(q) holds the floor(L) nodes closest to q and T(q) the
    still-unassigned nodes among the next floor(R).  A candidate q is
    feasible when every assigned node i has g_qi < j_thr[q]; among feasible
    candidates the one closest to the assigned set (largest max_i g_qi) is
    taken, ties to the smallest index.  Once nothing is feasible the
    leftovers form a terminal buffer with an empty J-set.
    """
    n = g.shape[0]
    if sparse.issparse(g):
        g = sparse.csr_matrix(g)
    lk, rb = cutoffs.n_keep, cutoffs.n_buffer
    assigned = np.zeros(n, dtype=bool)
    maxg = np.full(n, -np.inf)
    p = BlockPartition([], [], [], [], [], L, R, ties=cutoffs.ties)
    q = 0
    while True:
        order = neighbor_order(g, q)
        keep = order[:lk]
        keep = np.sort(keep[~assigned[keep]])
        ring = order[lk : lk + rb]
        buf = np.sort(ring[~assigned[ring]])
        p.centers.append(int(q))
        p.j_sets.append(keep)
        p.t_sets.append(buf)
        p.k_cut.append(float(cutoffs.k[q]))
        p.h_cut.append(float(cutoffs.h[q]))
        p.j_thr.append(float(cutoffs.j_thr[q]))
        new = np.concatenate([keep, buf])
        assigned[new] = True
        if assigned.all():
            break
        maxg = np.maximum(maxg, _colmax(g, new))
        feasible = ~assigned & (maxg < cutoffs.j_thr)
        if not feasible.any():
            rest = np.nonzero(~assigned)[0]
            p.centers.append(int(rest[0]))
            p.j_sets.append(np.zeros(0, dtype=int))
            p.t_sets.append(rest)
            p.k_cut.append(float("nan"))
            p.h_cut.append(float("nan"))
            p.j_thr.append(float("nan"))
            p.terminal = True
            break
        score = np.where(feasible, maxg, -np.inf)
        best = score.max()
        winners = np.flatnonzero(score == best)
        if winners.size > 1:
            p.ties += 1
        q = int(winners[0])
    return p


def check_partition(g, p: BlockPartition) -> dict:
    """Counts of violated partition invariants (all zero for a valid partition)."""
    n = g.shape[0]
    seen = np.zeros(n, dtype=int)
    for j, t in zip(p.j_sets, p.t_sets):
        seen[j] += 1
        seen[t] += 1
    lk, rb = int(math.floor(p.L)), int(math.floor(p.R))
    out = {
        "overlap": int(np.sum(seen > 1)),
        "uncovered": int(np.sum(seen == 0)),
        "duplicate_centers": len(p.centers) - len(set(p.centers)),
        "j_size": 0,
        "t_size": 0,
        "membership": 0,
        "separation": 0,
    }
    owner = np.full(n, -1)
    for b, (j, t) in enumerate(zip(p.j_sets, p.t_sets)):
        owner[j] = b
        owner[t] = b
    for b, (q, j, t) in enumerate(zip(p.centers, p.j_sets, p.t_sets)):
        if p.terminal and b == len(p.centers) - 1:
            continue
        if len(j) not in (min(lk, n) - 1, min(lk, n)):
            out["j_size"] += 1
        if len(t) > rb:
            out["t_size"] += 1
        row = _row(g, q)
        thr = p.j_thr[b]
        out["membership"] += int(np.sum(row[j] < thr))
        later = owner > b
        out["separation"] += int(np.sum(row[later] >= thr))
    return out


def partition_diagnostics(p: BlockPartition, n: int, epsilon: float = 0.05,
                          c_J: float = 1.0, c_T: float = 1.0) -> dict:
    """Block-size deviations using N = n / (c_T floor(n^1/4) + c_J floor(n^3/4)).

    Only blocks with a nonempty J-set enter the sup; an empty buffer gives a
    buffer deviation of 1.
    """
    n_formula = n / (c_T * math.floor(n**0.25) + c_J * math.floor(n**0.75))
    kept = [b for b, j in enumerate(p.j_sets) if len(j)]
    j_dev = max((abs(len(p.j_sets[b]) * n_formula / n - 1) for b in kept), default=float("nan"))
    scale = n ** (0.25 - epsilon)
    t_dev = max((abs(len(p.t_sets[b]) / scale - 1) for b in kept), default=float("nan"))
    return {
        "j_deviation": j_dev,
        "t_deviation": t_dev,
        "n_blocks": p.n_blocks,
        "n_kept": len(kept),
        "n_formula": n_formula,
        "j_deviation_realized": max(
            (abs(len(p.j_sets[b]) * len(kept) / n - 1) for b in kept), default=float("nan")
        ),
        "terminal_size": len(p.t_sets[-1]) if p.terminal else 0,
        "ties": p.ties,
    }
