"""One network draw per (seed, rep): statistics, their means, and the proximity used for blocking.

Pair-characteristic models (neighborhood, utility) with finite kappa_u run
on diagonal bands, so their cost is linear in n.  The distance model is
dense.  In padded mode the network is simulated on n + 2 * pad nodes and
the statistics of the middle n nodes are returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from . import models, netstats, proximity

__all__ = [
    "Draw",
    "MU_STREAM",
    "ModelSpec",
    "STATS",
    "MODELS",
    "analytic_mu",
    "draw",
    "link_probabilities",
    "mu_oracle",
    "stat_moments",
]

MODELS = ("distance", "neighborhood", "utility")
STATS = ("degree", "clustering", "peer_avg", "peer_shock", "reduced_form_mean")

# extra stream component that keeps oracle draws disjoint from (seed, rep)
MU_STREAM = 2**32 - 1


@dataclass(frozen=True)
class ModelSpec:
    model: str = "neighborhood"
    params: models.ModelParams = models.ModelParams.neighborhood()
    stat: str = "degree"
    padded: bool = True
    lam: float = 0.5
    beta: float = 1.0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.stat not in STATS:
            raise ValueError(f"unknown stat {self.stat!r}; expected one of {STATS}")
        if self.model == "neighborhood":
            p = self.params
            object.__setattr__(self, "params", replace(p, alpha0=0.0, alpha_zeta=-1.0))

    @property
    def banded(self) -> bool:
        return self.model != "distance" and math.isfinite(self.params.kappa_u)

    @property
    def pad(self) -> int:
        if not self.padded:
            return 0
        k = self.params.kappa_u
        return (int(math.ceil(k)) if math.isfinite(k) else 1) + 1


@dataclass
class Draw:
    v: np.ndarray
    g: object = None


def _stat(spec: ModelSpec, d, rng: np.random.Generator) -> np.ndarray:
    n = d.shape[0]
    if spec.stat == "degree":
        return netstats.degree(d).v
    if spec.stat == "clustering":
        return netstats.clustering(d).v
    m = netstats.row_normalized(d)
    z = rng.random(n)
    u = rng.standard_normal(n)
    if spec.stat == "peer_avg":
        return netstats.peer_average(m, z).v
    if spec.stat == "peer_shock":
        return netstats.peer_average(m, u).v
    return netstats.peer_effects_reduced_form(m, z, u, spec.lam, spec.beta).v


def draw(spec: ModelSpec, n: int, seed, rep=None, proximity_width: int | None = None,
         with_proximity: bool = False) -> Draw:
    """Simulate one network for stream (seed, rep) and return the n observed statistics.

    ``proximity_width`` sets how many diagonals of g are kept for banded
    models; it must cover floor(L) + floor(R) for blocking to be exact.
    """
    stream = () if rep is None else (rep if isinstance(rep, tuple) else (rep,))
    # separate substreams so the shocks do not depend on how many diagonals of zeta are drawn
    rng_zeta, rng_eps, rng_stat = (models.make_rng(seed, *stream, c) for c in range(3))
    pad = spec.pad
    total = n + 2 * pad
    prm = spec.params
    g = None
    if spec.banded:
        lw = models.link_width(prm.kappa_u)
        gw = 0
        if with_proximity:
            gw = proximity_width if proximity_width is not None else n - 1
        pb = models.sample_pair_band(total, max(lw, gw), rng_zeta)
        eb = models.sample_shock_band(total, lw, rng_eps)
        d = models.form_band_utility(pb, eb, prm)
        if with_proximity:
            inner = models.PairBand(pb.zeta[: gw + 1, pad : pad + n].copy())
            _blank_tail(inner)
            g = proximity.band_proximity(inner, prm, gw)
    else:
        if spec.model == "distance":
            zeta = models.sample_node_characteristics(total, prm, rng_zeta)
            eps = models.sample_logistic_shocks(total, rng_eps)
            d = models.form_network_distance(zeta, prm, eps)
            if with_proximity:
                g = proximity.link_probability_matrix(zeta[pad : pad + n], prm)
        else:
            pair = models.sample_pair_characteristics(total, rng_zeta)
            eps = models.sample_logistic_shocks(total, rng_eps)
            d = models.form_network_utility(pair, prm, eps)
            if with_proximity:
                g = proximity.pair_proximity(pair[pad : pad + n, pad : pad + n], prm)
    v = _stat(spec, d, rng_stat)[pad : pad + n]
    return Draw(v=v, g=g)


def _blank_tail(pb: models.PairBand):
    n = pb.n
    for o in range(1, pb.width + 1):
        pb.zeta[o, n - o :] = np.nan


def _softplus(x):
    return np.logaddexp(0.0, x)


def link_probabilities(params: models.ModelParams, width: int) -> np.ndarray:
    """p[o] = P(d_ij = 1) at |i - j| = o for pair models, o = 0..width (p[0] = 0)."""
    a, b, kap = params.alpha0, params.alpha_zeta, params.kappa_u
    p = np.zeros(width + 1)
    for o in range(1, width + 1):
        lo, hi = o - 1.0, min(float(o), kap)
        if hi <= lo:
            continue
        if b == 0:
            p[o] = (hi - lo) * (1.0 / (1.0 + math.exp(-a)))
        else:
            p[o] = (_softplus(a + b * hi) - _softplus(a + b * lo)) / b
    return p


def _sides(n: int, pad: int, width: int) -> np.ndarray:
    """sides[i, o] = number of partners of observed node i at offset o that exist."""
    total = n + 2 * pad
    pos = np.arange(pad, pad + n)[:, None]
    o = np.arange(width + 1)[None, :]
    return (pos - o >= 0).astype(int) + (pos + o <= total - 1).astype(int)


def analytic_mu(spec: ModelSpec, n: int):
    """Exact degree means for pair models, or None when no closed form is available."""
    if not (spec.banded and spec.stat == "degree"):
        return None
    w = models.link_width(spec.params.kappa_u)
    p = link_probabilities(spec.params, w)
    return _sides(n, spec.pad, w)[:, 1:] @ p[1:]


def stat_moments(spec: ModelSpec, n: int):
    """(mu, E[v^2]) per observed node for degrees of pair models (independent Bernoulli links)."""
    if not (spec.banded and spec.stat == "degree"):
        raise ValueError("closed-form moments exist only for degrees of pair models")
    w = models.link_width(spec.params.kappa_u)
    p = link_probabilities(spec.params, w)
    s = _sides(n, spec.pad, w)[:, 1:]
    mu = s @ p[1:]
    var = s @ (p[1:] * (1 - p[1:]))
    return mu, var + mu**2


def mu_oracle(spec: ModelSpec, n: int, reps_mu: int, seed, mode: str = "analytic") -> np.ndarray:
    """mu_{i,n}: closed form when available and requested, else a Monte Carlo mean.

    Oracle draws use streams (seed, MU_STREAM, r), disjoint from experiment streams.
    """
    if mode not in ("analytic", "mc_oracle"):
        raise ValueError(f"unknown mu mode {mode!r}")
    if mode == "analytic":
        mu = analytic_mu(spec, n)
        if mu is not None:
            return mu
    if reps_mu < 1000:
        raise ValueError("the Monte Carlo mean needs at least 1000 draws")
    acc = np.zeros(n)
    for r in range(int(reps_mu)):
        acc += draw(spec, n, seed, (MU_STREAM, r)).v
    return acc / reps_mu

