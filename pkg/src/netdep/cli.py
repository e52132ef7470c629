"""Command-line front end: simulate, blocks, diagnose, lln, clt.

Exit codes: 0 success, 1 experiment FAIL, 2 config error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import blocking, harness, mixingale, models
from .harness import ConfigError, ExperimentConfig
from .simulate import ModelSpec, draw, mu_oracle

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat TOML experiment config")
    common.add_argument("--seed", type=int)
    common.add_argument("--n", type=int, action="append", help="sample size; repeat for a grid")
    common.add_argument("--reps", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--model", choices=("distance", "neighborhood", "utility"))
    common.add_argument("--stat", choices=("degree", "clustering", "peer_avg", "peer_shock", "reduced_form_mean"))
    common.add_argument("--threads", type=int)
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--padded", dest="padded", action="store_true", default=None,
                      help="observe the interior of a padded network (default)")
    mode.add_argument("--sample-based", dest="padded", action="store_false",
                      help="form the network on the observed nodes only")

    p = argparse.ArgumentParser(prog="netdep", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="one network and its statistics as CSV")
    sub.add_parser("blocks", parents=[common], help="print the block partition of one draw")
    sub.add_parser("diagnose", parents=[common], help="summability, dispersion and covariance reports")
    sub.add_parser("lln", parents=[common], help="law of large numbers experiment")
    sub.add_parser("clt", parents=[common], help="central limit experiment")
    return p


def _config(args) -> ExperimentConfig:
    over = {
        "seed": args.seed,
        "n_grid": args.n,
        "reps": args.reps,
        "out_dir": args.out,
        "model": args.model,
        "stat": args.stat,
        "threads": args.threads,
        "padded": args.padded,
    }
    if args.config:
        return harness.load_config(args.config, **over)
    return harness.config_from_mapping({}, **over)


def _write(text: str, out, name: str):
    if out is None:
        sys.stdout.write(text)
        return
    from pathlib import Path

    path = Path(out) / name
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def cmd_simulate(cfg: ExperimentConfig, args) -> int:
    n = cfg.n_grid[-1]
    spec = cfg.spec()
    v = draw(spec, n, cfg.seed, 0).v
    try:
        mu = mu_oracle(spec, n, cfg.mu_reps, cfg.seed, cfg.mu_mode)
    except ValueError:
        mu = None
    lines = ["node,v,mu"]
    for i in range(n):
        m = "" if mu is None else format(float(mu[i]), ".17g")
        lines.append(f"{i + 1},{float(v[i]):.17g},{m}")
    _write("\n".join(lines) + "\n", args.out, "simulate.csv")
    return EXIT_OK


def cmd_blocks(cfg: ExperimentConfig, args) -> int:
    n = cfg.n_grid[-1]
    L, R = blocking.bandwidths(n, cfg.c_J, cfg.c_T, cfg.epsilon)
    if int(L) < 2:
        raise ConfigError(f"blocking infeasible at n={n}: floor(L) < 2")
    spec = cfg.spec()
    d = draw(spec, n, cfg.seed, 0, int(L) + int(R) + 2, with_proximity=True)
    cut = blocking.adaptive_cutoffs(d.g, L, R, harness._to_radius(spec.params))
    part = blocking.build_partition(d.g, cut, L, R)
    _write("\n".join(part.format_lines()) + "\n", args.out, "blocks.txt")
    return EXIT_OK


def _uniform_sampler(n, rng):
    return rng.random(n)


class _LatticeSampler:
    def __init__(self, params):
        self.params = params

    def __call__(self, n, rng):
        return models.sample_node_characteristics(n, self.params, rng)


def cmd_diagnose(cfg: ExperimentConfig, args) -> int:
    """Summability for the configured model, dispersion for lattice and iid-uniform characteristics."""
    spec = cfg.spec()
    n_max = cfg.n_grid[-1]
    grid = sorted({max(n_max // 8, 2), max(n_max // 4, 2), max(n_max // 2, 2), n_max})
    report = {"model": spec.model, "stat": spec.stat}
    try:
        psi, probs = mixingale.model_bounds(spec, n_max)
        report["summability"] = mixingale.summability_diagnostic(psi, probs, grid)
    except ValueError as exc:
        report["summability"] = {"error": str(exc)}
    reps = min(cfg.reps, 50)
    report["dispersion_lattice"] = mixingale.dispersion_check(
        _LatticeSampler(cfg.params()), 1.0, grid, reps, cfg.seed)
    report["dispersion_iid_uniform"] = mixingale.dispersion_check(_uniform_sampler, 1.0, grid, reps, cfg.seed)
    text = json.dumps(harness._json_ready(report), sort_keys=True, indent=2) + "\n"
    _write(text, args.out, "diagnose.json")
    return EXIT_OK


def _experiment(run, cfg: ExperimentConfig) -> int:
    summary = run(cfg)
    paths = harness.emit(summary, cfg.out_dir)
    for n, row in summary.per_n.items():
        parts = ", ".join(f"{k}={v:.6g}" for k, v in row.items())
        print(f"n={n}: {parts}")
    print(f"{summary.kind}: {'PASS' if summary.passed else 'FAIL'} ({paths['summary']})")
    return EXIT_OK if summary.passed else EXIT_FAIL


COMMANDS = {
    "simulate": cmd_simulate,
    "blocks": cmd_blocks,
    "diagnose": cmd_diagnose,
    "lln": lambda cfg, args: _experiment(harness.run_lln, cfg),
    "clt": lambda cfg, args: _experiment(harness.run_clt, cfg),
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _config(args)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
