"""Monte Carlo experiments for the LLN and CLT claims, plus config handling and file output."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
from scipy.special import ndtr

from . import blocking, inference, models, netstats, proximity
from .simulate import ModelSpec, draw, mu_oracle

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExperimentSummary",
    "emit",
    "ks_statistic",
    "load_config",
    "run_clt",
    "run_lln",
]

KS_MAX = 0.05
COVERAGE = (0.93, 0.97)
ETA_RATIO = (0.7, 1.3)
LLN_RATIO = (0.12, 0.5)

CLT_COLUMNS = ("rep", "n", "S_n", "eta_hat_sq", "t_stat", "ci_low", "ci_high",
               "diag_max", "diag_sumsq", "diag_buffer")
LLN_COLUMNS = ("rep", "n", "S_n", "abs_mean_dev")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "neighborhood"
    alpha0: float = 0.0
    alpha_zeta: float = -1.0
    kappa_u: float = 1.0
    spacing: float = 1.0
    stat: str = "degree"
    n_grid: tuple = (256, 4096)
    reps: int = 200
    seed: int = 20240601
    c_J: float = 1.0
    c_T: float = 1.0
    epsilon: float = 0.05
    mu_mode: str = "analytic"
    reps_mu: int = 0
    padded: bool = True
    lam: float = 0.5
    beta: float = 1.0
    centering: str = "known"
    threads: int = 1
    out_dir: str = "out"

    def __post_init__(self):
        grid = tuple(int(x) for x in (self.n_grid if isinstance(self.n_grid, (list, tuple)) else [self.n_grid]))
        object.__setattr__(self, "n_grid", grid)
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 1:
            raise ConfigError("n_grid must be a nonempty ascending list of positive counts")
        if int(self.reps) < 1:
            raise ConfigError("reps must be >= 1")
        if self.mu_mode not in ("analytic", "mc_oracle"):
            raise ConfigError(f"mu_mode must be analytic or mc_oracle, got {self.mu_mode!r}")
        if self.centering not in inference.CENTERINGS:
            raise ConfigError(f"centering must be one of {inference.CENTERINGS}")
        if int(self.threads) < 1:
            raise ConfigError("threads must be >= 1")
        if int(self.seed) < 0:
            raise ConfigError("seed must be a nonnegative integer")
        try:
            self.spec()
            blocking.bandwidths(max(grid[0], 4), self.c_J, self.c_T, self.epsilon)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def params(self) -> models.ModelParams:
        return models.ModelParams(self.alpha0, self.alpha_zeta, self.kappa_u, self.spacing)

    def spec(self) -> ModelSpec:
        return ModelSpec(self.model, self.params(), self.stat, self.padded, self.lam, self.beta)

    @property
    def mu_reps(self) -> int:
        return int(self.reps_mu) if self.reps_mu else max(10 * int(self.reps), 1000)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_grid"] = list(self.n_grid)
        return d


# config-file key -> field name
_ALIASES = {"lambda": "lam"}


def config_from_mapping(raw: dict, **overrides) -> ExperimentConfig:
    names = {f.name for f in fields(ExperimentConfig)}
    kw = {}
    for key, val in raw.items():
        name = _ALIASES.get(key, key)
        if name not in names:
            raise ConfigError(f"unknown config key {key!r}")
        kw[name] = val
    for key, val in overrides.items():
        if val is not None:
            kw[_ALIASES.get(key, key)] = val
    try:
        return ExperimentConfig(**kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path, **overrides) -> ExperimentConfig:
    """Read a flat TOML file; nested tables and unknown keys are errors."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    for key, val in raw.items():
        if isinstance(val, dict):
            raise ConfigError(f"{path}: config must be flat, found table {key!r}")
    return config_from_mapping(raw, **overrides)


def ks_statistic(sample) -> float:
    """sup |F_R - Phi| evaluated on both sides of every order statistic."""
    x = np.sort(np.asarray(sample, dtype=float))
    r = x.size
    if r == 0:
        raise ValueError("empty sample")
    f = ndtr(x)
    k = np.arange(1, r + 1)
    return float(max(np.max(k / r - f), np.max(f - (k - 1) / r)))


@dataclass
class ExperimentSummary:
    kind: str
    config: ExperimentConfig
    rows: list
    per_n: dict
    passed: bool
    checks: dict
    wall_time: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "config": self.config.to_dict(),
            "per_n": {str(n): v for n, v in self.per_n.items()},
            "checks": self.checks,
            "pass": self.passed,
            "seeds": {"master": int(self.config.seed), "replication_streams": "(seed, rep)",
                      "mu_oracle_stream": "(seed, 4294967295, r)"},
            "thresholds": {"ks_max": KS_MAX, "coverage": list(COVERAGE), "eta_ratio": list(ETA_RATIO),
                           "lln_median_ratio": list(LLN_RATIO)},
            "ci_target": "mean of mu_i over the observed nodes",
        }


def _pool_map(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * threads))))


class _LLNJob:
    def __init__(self, cfg, n, mu):
        self.spec, self.n, self.mu, self.seed = cfg.spec(), n, mu, cfg.seed

    def __call__(self, rep):
        v = draw(self.spec, self.n, self.seed, rep).v
        s = float(np.sum(v - self.mu))
        return (rep, self.n, s, abs(s) / self.n)


def run_lln(cfg: ExperimentConfig) -> ExperimentSummary:
    rows, per_n, walls = [], {}, {}
    for n in cfg.n_grid:
        t0 = time.perf_counter()
        mu = mu_oracle(cfg.spec(), n, cfg.mu_reps, cfg.seed, cfg.mu_mode)
        res = _pool_map(_LLNJob(cfg, n, mu), list(range(cfg.reps)), cfg.threads)
        res.sort()
        rows += res
        dev = np.array([r[3] for r in res])
        per_n[n] = {"mean_abs_dev": float(dev.mean()), "median_abs_dev": float(np.median(dev)),
                    "mean_v_minus_mu": float(np.mean([r[2] for r in res]) / n)}
        walls[n] = time.perf_counter() - t0
    meds = [per_n[n]["median_abs_dev"] for n in cfg.n_grid]
    checks = {"median_decreasing": bool(all(b < a for a, b in zip(meds, meds[1:])))}
    if len(cfg.n_grid) > 1 and meds[0] > 0:
        ratio = meds[-1] / meds[0]
        checks["median_ratio"] = ratio
        if cfg.n_grid[-1] >= 16 * cfg.n_grid[0]:
            checks["median_ratio_in_range"] = bool(LLN_RATIO[0] <= ratio <= LLN_RATIO[1])
    passed = all(v for k, v in checks.items() if isinstance(v, bool))
    return ExperimentSummary("lln", cfg, rows, per_n, passed, checks, walls)


def _to_radius(params: models.ModelParams):
    def f(g):
        g = np.asarray(g, dtype=float)
        out = np.full(g.shape, np.inf)
        out[g >= 1] = 0.0
        mid = (g > 0) & (g < 1)
        out[mid] = proximity.g_to_distance(g[mid], params)
        return out

    return f


class _CLTJob:
    def __init__(self, cfg, n, mu):
        self.spec, self.n, self.mu, self.seed = cfg.spec(), n, mu, cfg.seed
        self.L, self.R = blocking.bandwidths(n, cfg.c_J, cfg.c_T, cfg.epsilon)
        self.width = int(self.L) + int(self.R) + 2
        self.centering = cfg.centering

    def __call__(self, rep):
        d = draw(self.spec, self.n, self.seed, rep, self.width, with_proximity=True)
        cut = blocking.adaptive_cutoffs(d.g, self.L, self.R, _to_radius(self.spec.params))
        part = blocking.build_partition(d.g, cut, self.L, self.R)
        sv = netstats.StatVector(d.v, self.mu)
        res = inference.standardized_stat(sv, part, self.centering)
        dg = res.diagnostics
        return (rep, self.n, res.s_n, res.eta_hat_sq, res.t_stat, res.ci_low, res.ci_high,
                dg["max"], dg["sumsq"], dg["buffer"], part.ties, part.n_kept)


def run_clt(cfg: ExperimentConfig) -> ExperimentSummary:
    L0, _ = blocking.bandwidths(max(cfg.n_grid[0], 4), cfg.c_J, cfg.c_T, cfg.epsilon)
    if int(L0) < 2:
        raise ConfigError(f"blocking infeasible at n={cfg.n_grid[0]}: floor(L) < 2")
    rows, per_n, walls, checks = [], {}, {}, {}
    for n in cfg.n_grid:
        t0 = time.perf_counter()
        mu = mu_oracle(cfg.spec(), n, cfg.mu_reps, cfg.seed, cfg.mu_mode)
        target = float(mu.mean())
        res = _pool_map(_CLTJob(cfg, n, mu), list(range(cfg.reps)), cfg.threads)
        res.sort()
        rows += [r[:10] for r in res]
        t = np.array([r[4] for r in res])
        e2 = np.array([r[3] for r in res])
        scaled = np.array([r[2] for r in res]) / math.sqrt(n)
        cover = np.mean([(r[5] <= target <= r[6]) for r in res])
        var_s = float(np.var(scaled, ddof=1)) if len(res) > 1 else float("nan")
        row = {
            "mean_abs_dev": float(np.mean(np.abs(scaled)) / math.sqrt(n)),
            "median_abs_dev": float(np.median(np.abs(scaled)) / math.sqrt(n)),
            "ks": ks_statistic(t),
            "coverage": float(cover),
            "mean_eta_hat_sq": float(e2.mean()),
            "var_scaled_S_n": var_s,
            "eta_ratio": float(e2.mean() / var_s) if var_s > 0 else float("nan"),
            "median_diag_max": float(np.median([r[7] for r in res])),
            "median_diag_sumsq": float(np.median([r[8] for r in res])),
            "median_diag_buffer": float(np.median([r[9] for r in res])),
            "tie_events": int(sum(r[10] for r in res)),
            "kept_blocks_min": int(min(r[11] for r in res)),
            "kept_blocks_max": int(max(r[11] for r in res)),
        }
        per_n[n] = row
        checks[str(n)] = {
            "ks": bool(row["ks"] < KS_MAX),
            "coverage": bool(COVERAGE[0] <= row["coverage"] <= COVERAGE[1]),
            "eta_ratio": bool(ETA_RATIO[0] <= row["eta_ratio"] <= ETA_RATIO[1]),
        }
        walls[n] = time.perf_counter() - t0
    passed = all(all(c.values()) for c in checks.values())
    return ExperimentSummary("clt", cfg, rows, per_n, passed, checks, walls)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _json_ready(obj):
    if isinstance(obj, dict):
        return {str(k): _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return float(format(x, ".17g")) if math.isfinite(x) else str(x)
    return obj


def emit(summary: ExperimentSummary, out_dir) -> dict:
    """Write <kind>_rows.csv, <kind>_summary.json and <kind>_timing.json under out_dir."""
    out = Path(out_dir)
    cols = CLT_COLUMNS if summary.kind == "clt" else LLN_COLUMNS
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in summary.rows:
        w.writerow([_fmt(x) for x in r[: len(cols)]])
    text = json.dumps(_json_ready(summary.to_json_dict()), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    timing = json.dumps({str(k): v for k, v in summary.wall_time.items()}, sort_keys=True, indent=2) + "\n"
    paths = {
        "rows": out / f"{summary.kind}_rows.csv",
        "summary": out / f"{summary.kind}_summary.json",
        "timing": out / f"{summary.kind}_timing.json",
    }
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths["rows"].write_text(buf.getvalue(), encoding="utf-8", newline="")
        paths["summary"].write_text(text, encoding="utf-8", newline="")
        paths["timing"].write_text(timing, encoding="utf-8", newline="")
    except OSError as exc:
        raise OSError(f"cannot write results under {out}: {exc}") from exc
    return paths


def default_threads() -> int:
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1))
