import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netdep import blocking, models, proximity
from netdep.blocking import Cutoffs
from netdep.models import ModelParams
from netdep.simulate import ModelSpec, draw


def test_neighbor_order_examples():
    assert list(blocking.neighbor_order(np.array([[1, 0.9, 0.2]]), 0)) == [0, 1, 2]
    assert list(blocking.neighbor_order(np.array([[1, 0.2, 0.9]]), 0)) == [0, 2, 1]
    assert list(blocking.neighbor_order(np.array([[1, 0.5, 0.5]]), 0)) == [0, 1, 2]


def test_bandwidths():
    L, R = blocking.bandwidths(256)
    assert abs(L - 64) < 1e-12
    assert abs(R - 256**0.2) < 1e-12 and math.floor(R) == 3
    assert abs(blocking.bandwidths(16)[0] - 8) < 1e-12
    with pytest.raises(ValueError):
        blocking.bandwidths(3)
    with pytest.raises(ValueError):
        blocking.bandwidths(64, epsilon=0.3)


def _random_g(n, seed):
    z = models.sample_node_characteristics(n, ModelParams(), seed)
    return proximity.link_probability_matrix(z, ModelParams())


def test_adaptive_cutoffs_counts():
    g = _random_g(10, 1)
    c = blocking.adaptive_cutoffs(g, 3.2, 1.5)
    assert np.all(np.sum(g >= c.j_thr[:, None], axis=1) == 3)
    assert np.all(np.sum(g >= c.t_thr[:, None], axis=1) == 4)
    c = blocking.adaptive_cutoffs(g, 10, 1)
    assert np.all(np.sum(g >= c.j_thr[:, None], axis=1) == 10)


def test_adaptive_cutoffs_grid_scan():
    n = 50
    prm = ModelParams()
    g = _random_g(n, 2)
    c = blocking.adaptive_cutoffs(g, 7, 2, lambda x: proximity.g_to_distance(np.minimum(x, 1 - 1e-16), prm))
    lam = proximity.LambdaMap.unnormalized()
    grid = np.linspace(0, 60, 60001)
    for i in range(0, n, 7):
        counts = np.array([np.sum(g[i] >= lam(k)) for k in grid])
        # the smallest grid radius that admits 7 members brackets k_n(i)
        first = grid[np.argmax(counts >= 7)]
        assert abs(first - c.k[i]) <= grid[1] + 1e-9


def test_adaptive_cutoffs_errors():
    with pytest.raises(ValueError):
        blocking.adaptive_cutoffs(_random_g(10, 1), 1.5, 1)
    with pytest.raises(blocking.TieError):
        blocking.adaptive_cutoffs(np.ones((5, 5)), 2, 1)


def _line_graph(n):
    idx = np.arange(n)
    return 1.0 / (1.0 + np.abs(np.subtract.outer(idx, idx)))


def test_line_graph_partition():
    g = _line_graph(6)
    cut = blocking.adaptive_cutoffs(g, 2, 1)
    p = blocking.build_partition(g, cut, 2, 1)
    j = [list(x) for x in p.j_sets]
    t = [list(x) for x in p.t_sets]
    assert j == [[0, 1], [3, 4]]
    assert t == [[2], [5]]
    # node 3 (0-based) touches buffer node 2 at exactly its own J-threshold, so node 4 is the next center
    assert p.centers == [0, 4]
    assert not p.terminal


def test_single_node_partition():
    g = np.ones((1, 1))
    cut = Cutoffs(np.ones(1), np.ones(1), np.zeros(1), np.zeros(1), 2, 1, 0)
    p = blocking.build_partition(g, cut, 2, 1)
    assert p.centers == [0]
    assert list(p.j_sets[0]) == [0] and len(p.t_sets[0]) == 0


def _check(g, n):
    L, R = blocking.bandwidths(n)
    cut = blocking.adaptive_cutoffs(g, L, R)
    p = blocking.build_partition(g, cut, L, R)
    bad = blocking.check_partition(g, p)
    return p, bad


@pytest.mark.parametrize("n", [64, 256, 1024])
def test_partition_invariants_random(n):
    spec = ModelSpec()
    L, R = blocking.bandwidths(n)
    for rep in range(20):
        g = draw(spec, n, 99, rep, int(L) + int(R) + 2, with_proximity=True).g
        _, bad = _check(g, n)
        assert all(v == 0 for v in bad.values()), bad


def test_partition_invariants_distance_model():
    for rep in range(5):
        _, bad = _check(_random_g(64, rep), 64)
        assert all(v == 0 for v in bad.values()), bad


def test_banded_partition_equals_dense():
    n = 256
    spec = ModelSpec()
    L, R = blocking.bandwidths(n)
    d_band = draw(spec, n, 4, 0, int(L) + int(R) + 2, with_proximity=True).g
    d_full = draw(spec, n, 4, 0, n - 1, with_proximity=True).g
    pb, _ = _check(d_band, n)
    pf, _ = _check(d_full.toarray(), n)
    assert pb.centers == pf.centers
    for a, b in zip(pb.j_sets + pb.t_sets, pf.j_sets + pf.t_sets):
        assert np.array_equal(a, b)


def test_partition_diagnostics():
    n = 256
    L, _ = blocking.bandwidths(n)
    lk = int(L)
    p = blocking.BlockPartition([0, 64], [np.arange(lk), np.arange(lk, 2 * lk)],
                                [np.zeros(0, int), np.zeros(0, int)], [0, 0], [0, 0], L, 3.0)
    d = blocking.partition_diagnostics(p, n)
    big_n = n / (math.floor(n**0.25) + math.floor(n**0.75))
    assert abs(d["j_deviation"] - abs(lk * big_n / n - 1)) < 1e-15
    assert d["t_deviation"] == 1.0


def test_format_lines():
    g = _line_graph(6)
    p = blocking.build_partition(g, blocking.adaptive_cutoffs(g, 2, 1, lambda x: 1 / x - 1), 2, 1)
    lines = p.format_lines()
    assert lines[0].startswith("1: J=[1,2] T=[3] k=1, h=2")


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(16, 120))
def test_partition_property(seed, n):
    g = _random_g(n, seed)
    _, bad = _check(g, n)
    assert all(v == 0 for v in bad.values()), bad
