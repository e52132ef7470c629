import itertools

import numpy as np
import pytest
from scipy import sparse

from netdep import netstats


def test_degree_examples():
    assert np.array_equal(netstats.degree(np.zeros((5, 5))).v, np.zeros(5))
    full = np.ones((3, 3)) - np.eye(3)
    assert np.array_equal(netstats.degree(full).v, [2, 2, 2])
    d = np.zeros((3, 3))
    d[0, 1] = 1
    assert np.array_equal(netstats.degree(d).v, [1, 0, 0])


def test_clustering_examples():
    full = np.ones((3, 3)) - np.eye(3)
    assert np.array_equal(netstats.clustering(full).v, [1, 1, 1])
    star = np.zeros((5, 5))
    star[0, 1:] = 1
    assert np.array_equal(netstats.clustering(star).v, np.zeros(5))


def _brute_clustering(d):
    n = d.shape[0]
    out = np.zeros(n)
    for i in range(n):
        for j, k in itertools.combinations(range(n), 2):
            if i not in (j, k):
                out[i] += d[i, j] * d[i, k] * d[j, k]
    return out


@pytest.mark.parametrize("seed", range(5))
def test_clustering_brute_force(seed):
    rng = np.random.default_rng(seed)
    d = (rng.random((8, 8)) < 0.6).astype(float)
    np.fill_diagonal(d, 0)
    assert np.array_equal(netstats.clustering(d).v, _brute_clustering(d))
    assert np.array_equal(netstats.clustering(sparse.csr_matrix(d)).v, _brute_clustering(d))


def test_row_normalized():
    d = np.array([[0, 1, 1], [0, 0, 0], [1, 0, 0]], dtype=float)
    m = netstats.row_normalized(d)
    assert np.allclose(m[0], [0, 0.5, 0.5])
    assert np.array_equal(m[1], [0, 0, 0])
    rng = np.random.default_rng(1)
    d = (rng.random((30, 30)) < 0.2).astype(float)
    m = netstats.row_normalized(d)
    rs = m.sum(axis=1)
    assert np.all(np.abs(rs[d.sum(axis=1) > 0] - 1) <= 1e-12)
    ms = netstats.row_normalized(sparse.csr_matrix(d))
    assert np.allclose(ms.toarray(), m)


def test_peer_average():
    m = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert np.array_equal(netstats.peer_average(m, [1, 3]).v, [3, 1])
    rng = np.random.default_rng(2)
    d = (rng.random((6, 6)) < 0.5).astype(float)
    np.fill_diagonal(d, 0)
    d[np.arange(6), (np.arange(6) + 1) % 6] = 1
    m = netstats.row_normalized(d)
    assert np.allclose(netstats.peer_average(m, np.full(6, 2.5)).v, 2.5)
    z = rng.random(6)
    assert np.allclose(netstats.peer_average(m, z).v, [m[i] @ z for i in range(6)])
    with pytest.raises(ValueError):
        netstats.peer_average(m, z[:5])


def test_reduced_form():
    m = np.array([[0.0, 1.0], [1.0, 0.0]])
    y = netstats.peer_effects_reduced_form(m, [1.0, 0.0], [0.0, 0.0], 0.5, 1.0).v
    assert np.allclose(y, [4 / 3, 2 / 3], atol=1e-14)
    z, u = np.array([1.0, 2.0]), np.array([0.5, -0.5])
    assert np.array_equal(netstats.peer_effects_reduced_form(m, z, u, 0.0, 2.0).v, z * 2 + u)
    with pytest.raises(ValueError):
        netstats.peer_effects_reduced_form(m, z, u, 1.0, 1.0)


@pytest.mark.parametrize("as_sparse", [False, True])
def test_reduced_form_residual(as_sparse):
    rng = np.random.default_rng(3)
    d = (rng.random((100, 100)) < 0.05).astype(float)
    np.fill_diagonal(d, 0)
    m = netstats.row_normalized(sparse.csr_matrix(d) if as_sparse else d)
    z, u = rng.random(100), rng.standard_normal(100)
    y = netstats.peer_effects_reduced_form(m, z, u, 0.6, 1.5).v
    md = m.toarray() if as_sparse else m
    assert np.linalg.norm((np.eye(100) - 0.6 * md) @ y - (1.5 * z + u)) <= 1e-10


def test_stat_vector_validation():
    with pytest.raises(ValueError):
        netstats.StatVector([1.0, np.nan])
    sv = netstats.StatVector([1.0, 2.0]).with_mu(0.5)
    assert np.array_equal(sv.mu, [0.5, 0.5])
