import math

import numpy as np
import pytest

from netdep import mixingale, models
from netdep.mixingale import PsiBoundTable
from netdep.models import ModelParams
from netdep.simulate import ModelSpec


def test_psi_bound_neighborhood():
    assert mixingale.psi_bound_neighborhood(0, 2, 1.0, 0.76, 1.2) == 0.0
    assert abs(mixingale.psi_bound_neighborhood(0, 1, 1.0, 0.76, 1.2) - (0.76 + math.sqrt(1.2))) < 1e-15
    assert abs(mixingale.psi_bound_neighborhood(0, 1, 1.0, 0.76, 1.2) - 1.8554) < 1e-4
    assert mixingale.psi_bound_neighborhood(0, 5, 1.0, 0.76, 1.2) == 0.0
    with pytest.raises(ValueError):
        mixingale.psi_bound_neighborhood(0, 1, 1.0, -1, 1)


def test_psi_bound_logistic():
    assert mixingale.psi_bound_logistic(0, 1, np.zeros(7)) == 0.0
    assert abs(mixingale.psi_bound_logistic(0, 2, np.ones(7)) - 3 * math.exp(-2) * 7) < 1e-12
    val = mixingale.psi_bound_logistic(0, 1, [1, 0.5, 0])
    assert abs(val - (0.5 + 3 * math.exp(-1) * 1.5)) < 1e-12
    assert abs(val - 2.1554) < 1e-4
    with pytest.raises(ValueError):
        mixingale.psi_bound_logistic(0, 1, [1.5])


def test_psi_table_is_monotone():
    t = PsiBoundTable(np.array([[1.0, 2.0, 0.5]]), 1.0)
    assert list(t.bounds[0]) == [1.0, 1.0, 0.5]


def test_summability_zero():
    n = 16
    psi = PsiBoundTable(np.zeros((n, 2)), 1.0)
    res = mixingale.summability_diagnostic(psi, np.zeros((n, n, 2)), [4, 8, 16])
    assert res["pass"] and res["totals"][16] == 0.0


def test_summability_dense_counterexample_fails():
    n = 256
    psi = PsiBoundTable(np.ones((n, 1)), 1.0)
    res = mixingale.summability_diagnostic(psi, np.ones((n, n, 1)), [64, 128, 256])
    assert not res["pass"]
    assert res["totals"][256] > res["totals"][128] > res["totals"][64]


def test_summability_neighborhood_plateaus():
    spec = ModelSpec()
    n = 1024
    psi, probs = mixingale.model_bounds(spec, n)
    res = mixingale.summability_diagnostic(psi, probs, [256, 512, 1024])
    assert res["pass"]
    assert res["totals"][1024] <= mixingale.summability_ceiling(psi, probs, n) + 1e-12


def test_covariance_far_pair_and_diagonal():
    spec = ModelSpec()
    n = 20
    res = mixingale.covariance_sweep(spec, n, 2000, 17)
    assert res["bound"][3, 9] == 0.0
    assert abs(res["cov"][3, 9]) <= res["margin"][3, 9]
    # diagonal: the variance against the within-cell bound
    v = res["cov"][5, 5]
    assert v > 0 and v <= res["bound"][5, 5] + res["margin"][5, 5]
    c, b, m = mixingale.covariance_bound_check(spec, 4, 5, n, 2000, 17)
    assert c <= b + m


def test_lattice_close_probs():
    p = mixingale.lattice_close_probs(5, 1.0, 11)
    assert p[5] == 1.0
    assert np.all(p[np.abs(np.arange(11) - 5) >= 2] == 0)
    assert 0 < p[6] < 1 and p[6] == p[4]


def _lattice(n, rng):
    return models.sample_node_characteristics(n, ModelParams(), rng)


def _uniform(n, rng):
    return rng.random(n)


def test_dispersion_lattice_and_counterexample():
    res = mixingale.dispersion_check(_lattice, 1.0, [100, 200, 400], 5, 1)
    assert res["pass"]
    assert all(v <= 5 for v in res["estimates"].values())
    res = mixingale.dispersion_check(_lattice, 0.0, [100], 3, 1)
    assert res["estimates"][100] == 1.0
    res = mixingale.dispersion_check(_uniform, 1.0, [100, 200, 400], 3, 1)
    assert not res["pass"]
    assert res["estimates"][400] == 400
