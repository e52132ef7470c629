import math

import numpy as np
import pytest

from netdep import models, netstats
from netdep.models import ModelParams
from netdep.simulate import ModelSpec, analytic_mu, draw, mu_oracle, stat_moments

MU_INTERIOR = 2 * (1 + math.log(2) - math.log(1 + math.e))


def test_analytic_mu_neighborhood():
    mu = mu_oracle(ModelSpec(), 50, 0, 1)
    assert np.allclose(mu, MU_INTERIOR, atol=1e-14)
    assert abs(mu[0] - 0.759866) < 1e-3
    mu = mu_oracle(ModelSpec(padded=False), 50, 0, 1)
    assert abs(mu[0] - MU_INTERIOR / 2) < 1e-14
    assert abs(mu[0] - 0.379933) < 1e-3


def test_mu_vanishes_when_links_die():
    spec = ModelSpec("utility", ModelParams(alpha0=-1e3, alpha_zeta=-1e3))
    assert np.all(mu_oracle(spec, 10, 0, 1) == 0)


def test_mc_oracle_matches_analytic():
    spec = ModelSpec()
    mc = mu_oracle(spec, 20, 4000, 3, mode="mc_oracle")
    mu, m2 = stat_moments(spec, 20)
    se = np.sqrt((m2 - mu**2) / 4000)
    assert np.all(np.abs(mc - mu) <= 4 * se)
    with pytest.raises(ValueError):
        mu_oracle(spec, 20, 999, 3, mode="mc_oracle")


def test_analytic_mu_unavailable_for_distance():
    assert analytic_mu(ModelSpec("distance"), 10) is None


def test_draw_deterministic_and_width_independent():
    spec = ModelSpec(stat="peer_shock")
    a = draw(spec, 100, 7, 3)
    b = draw(spec, 100, 7, 3, 30, with_proximity=True)
    assert a.v.tobytes() == b.v.tobytes()
    assert draw(spec, 100, 7, 4).v.tobytes() != a.v.tobytes()


def test_banded_draw_matches_dense_rule():
    n, spec = 40, ModelSpec(padded=False)
    v = draw(spec, n, 5, 1).v
    pair = models.sample_pair_characteristics(n, models.make_rng(5, 1, 0))
    eps = models.sample_logistic_shocks(n, models.make_rng(5, 1, 1))
    d = models.form_network_neighborhood(pair, 1.0, eps)
    assert np.array_equal(v, netstats.degree(d).v)


@pytest.mark.parametrize("stat", ["degree", "clustering", "peer_avg", "peer_shock", "reduced_form_mean"])
@pytest.mark.parametrize("model", ["distance", "neighborhood", "utility"])
def test_every_model_and_stat_runs(model, stat):
    spec = ModelSpec(model, ModelParams(kappa_u=2.0), stat)
    d = draw(spec, 30, 1, 0, 10, with_proximity=True)
    assert d.v.shape == (30,) and np.all(np.isfinite(d.v))
    assert d.g.shape == (30, 30)


def test_unknown_model():
    with pytest.raises(ValueError):
        ModelSpec("lattice")
