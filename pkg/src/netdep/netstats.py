"""Per-node network statistics.

Every function accepts a dense array or a scipy.sparse matrix; the sparse
route is only used by the banded simulators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg, sparse
from scipy.sparse import linalg as splinalg

__all__ = [
    "StatVector",
    "clustering",
    "degree",
    "peer_average",
    "peer_effects_reduced_form",
    "row_normalized",
]


@dataclass(frozen=True)
class StatVector:
    v: np.ndarray
    mu: np.ndarray | None = None

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        object.__setattr__(self, "v", v)
        if not np.all(np.isfinite(v)):
            raise ValueError("statistics must be finite")
        if self.mu is not None:
            mu = np.broadcast_to(np.asarray(self.mu, dtype=float), v.shape).copy()
            if not np.all(np.isfinite(mu)):
                raise ValueError("means must be finite")
            object.__setattr__(self, "mu", mu)

    @property
    def n(self) -> int:
        return self.v.size

    def with_mu(self, mu) -> "StatVector":
        return StatVector(self.v, mu)


def _rowsum(m) -> np.ndarray:
    return np.asarray(m.sum(axis=1), dtype=float).ravel()


def degree(d) -> StatVector:
    return StatVector(_rowsum(d))


def clustering(d) -> StatVector:
    """v_i = sum_{j<k, j,k != i} d_ij d_ik d_jk (transitive triples anchored at i)."""
    if sparse.issparse(d):
        a = sparse.csr_matrix(d, dtype=float)
        a.setdiag(0)
        a.eliminate_zeros()
        upper = sparse.triu(a, k=1, format="csr")
        v = _rowsum((a @ upper).multiply(a))
    else:
        a = np.asarray(d, dtype=float).copy()
        np.fill_diagonal(a, 0.0)
        v = np.einsum("ij,ij->i", a @ np.triu(a, 1), a)
    return StatVector(v)


def row_normalized(d):
    """m_ij = d_ij / n_i with all-zero rows for isolated nodes."""
    deg = _rowsum(d)
    inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
    if sparse.issparse(d):
        return sparse.diags(inv) @ sparse.csr_matrix(d, dtype=float)
    return np.asarray(d, dtype=float) * inv[:, None]


def _check_vec(m, z):
    z = np.asarray(z, dtype=float)
    if z.ndim != 1 or m.shape != (z.size, z.size):
        raise ValueError(f"dimension mismatch: M {m.shape}, vector {z.shape}")
    return z


def peer_average(m, z) -> StatVector:
    z = _check_vec(m, z)
    return StatVector(np.asarray(m @ z, dtype=float).ravel())


def peer_effects_reduced_form(m, z, u, lam: float, beta: float) -> StatVector:
    """Solve (I - lam M) y = z beta + u."""
    if not abs(lam) < 1:
        raise ValueError(f"|lambda| must be < 1, got {lam}")
    z = _check_vec(m, z)
    u = _check_vec(m, u)
    rhs = z * beta + u
    n = rhs.size
    if sparse.issparse(m):
        a = (sparse.identity(n, format="csc") - lam * sparse.csc_matrix(m)).tocsc()
        y = splinalg.spsolve(a, rhs)
        y = np.atleast_1d(y)
    else:
        a = np.eye(n) - lam * np.asarray(m, dtype=float)
        try:
            y = linalg.solve(a, rhs)
        except linalg.LinAlgError as exc:
            raise ArithmeticError(f"singular peer-effects system: {exc}") from exc
    if not np.all(np.isfinite(y)):
        raise ArithmeticError("singular peer-effects system")
    res = np.linalg.norm(a @ y - rhs)
    if res > 1e-10 * np.linalg.norm(rhs):
        raise ArithmeticError(f"peer-effects solve residual {res:.3e} too large")
    return StatVector(y)
