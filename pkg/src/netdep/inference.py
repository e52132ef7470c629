"""Block sums, the blocked variance estimator, studentized statistics and the CLT checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .blocking import BlockPartition
from .mixingale import SE_MULT, model_bounds
from .netstats import StatVector
from .simulate import ModelSpec, draw, mu_oracle

__all__ = [
    "BlockSums",
    "DegenerateError",
    "InferenceResult",
    "Z975",
    "block_sums",
    "clt_condition_diagnostics",
    "eta_hat_sq",
    "maximal_inequality_check",
    "standardized_stat",
]

Z975 = 1.959964
CENTERINGS = ("local", "global", "known")


class DegenerateError(ArithmeticError):
    pass


@dataclass(frozen=True)
class BlockSums:
    x: np.ndarray
    u: np.ndarray


@dataclass(frozen=True)
class InferenceResult:
    s_n: float
    eta_hat_sq: float
    t_stat: float
    ci_low: float
    ci_high: float
    target: float
    diagnostics: dict = field(default_factory=dict)


def _dev(v: StatVector) -> np.ndarray:
    if v.mu is None:
        raise ValueError("block sums need the means mu")
    return v.v - v.mu


def block_sums(v: StatVector, p: BlockPartition) -> BlockSums:
    """X_i = sum over J(q_i) of (v - mu), U_i = the same over T(q_i)."""
    dev = _dev(v)
    covered = sum(len(j) + len(t) for j, t in zip(p.j_sets, p.t_sets))
    if covered != v.n:
        raise ValueError(f"partition covers {covered} nodes, statistics have {v.n}")
    x = np.array([dev[j].sum() for j in p.j_sets])
    u = np.array([dev[t].sum() for t in p.t_sets])
    return BlockSums(x, u)


def eta_hat_sq(v: StatVector, p: BlockPartition, centering: str = "local") -> float:
    """n^-1 sum_i Xtilde_i^2 with Xtilde_i = sum_{j in J(q_i)} (v_j - m_i); empty J-sets skipped.

    centering picks m_i: "local" is the mean of v over J(q_i) itself, which
    makes every Xtilde_i vanish; "global" is the sample mean of v; "known"
    uses mu_j.
    """
    if centering not in CENTERINGS:
        raise ValueError(f"centering must be one of {CENTERINGS}")
    vals = v.v
    if centering == "known" and v.mu is None:
        raise ValueError("known centering needs mu")
    vbar = vals.mean()
    tot = 0.0
    for j in p.j_sets:
        if len(j) == 0:
            continue
        if centering == "local":
            xt = np.sum(vals[j] - vals[j].mean())
        elif centering == "global":
            xt = np.sum(vals[j] - vbar)
        else:
            xt = np.sum(vals[j] - v.mu[j])
        tot += xt * xt
    return float(tot / v.n)


def clt_condition_diagnostics(b: BlockSums, n: int) -> dict:
    rn = math.sqrt(n)
    return {
        "max": float(np.max(np.abs(b.x)) / rn) if b.x.size else 0.0,
        "sumsq": float(np.sum(b.x**2) / n),
        "buffer": float(abs(np.sum(b.u)) / rn),
    }


def standardized_stat(v: StatVector, p: BlockPartition, centering: str = "known") -> InferenceResult:
    """t = n^-1/2 S_n / eta_hat and the CI vbar -/+ 1.959964 eta_hat / sqrt(n) for mean(mu).

    The default centers the J-block sums at the known means, since the
    local centering in ``eta_hat_sq`` is identically zero.
    """
    n = v.n
    dev = _dev(v)
    s_n = float(dev.sum())
    e2 = eta_hat_sq(v, p, centering)
    if not e2 > 0:
        raise DegenerateError("eta_hat_sq is zero; the studentized statistic is undefined")
    eta = math.sqrt(e2)
    rn = math.sqrt(n)
    vbar = float(v.v.mean())
    half = Z975 * eta / rn
    diag = clt_condition_diagnostics(block_sums(v, p), n)
    return InferenceResult(
        s_n=s_n,
        eta_hat_sq=e2,
        t_stat=s_n / (rn * eta),
        ci_low=vbar - half,
        ci_high=vbar + half,
        target=float(v.mu.mean()),
        diagnostics=diag,
    )


def maximal_inequality_check(spec: ModelSpec, a: int, n: int, reps: int, seed, c=1.0) -> dict:
    """Monte Carlo E[M^2] for M = max_{k<=n} |sum_{i=a+1}^{a+k} (v_i - mu_i)| against the bound.

    bound = (log(2n)/log 2)^2 sum_{i,j} c_i c_j sum_m psi_{i,m} P(A_m(i, j)).
    """
    a, n, reps = int(a), int(n), int(reps)
    if n < 1 or a < 0 or reps < 2:
        raise ValueError("need n >= 1, a >= 0 and reps >= 2")
    size = a + n
    mu = mu_oracle(spec, size, 10 * reps, seed)
    psi, probs = model_bounds(spec, size, c=c)
    idx = np.arange(a, size)
    inner = 0.0
    for i in idx:
        inner += float(np.sum((probs(i, idx) @ psi.bounds[i]) * psi.c[i] * psi.c[idx]))
    bound = (math.log(2 * n) / math.log(2)) ** 2 * inner
    m2 = np.empty(reps)
    for r in range(reps):
        dev = draw(spec, size, seed, r).v[a:] - mu[a:]
        m2[r] = np.max(np.abs(np.cumsum(dev))) ** 2
    emp = float(m2.mean())
    se = float(m2.std(ddof=1) / math.sqrt(reps))
    return {"emp_max_sq": emp, "bound": bound, "se": se, "holds": bool(emp <= bound + SE_MULT * se)}
