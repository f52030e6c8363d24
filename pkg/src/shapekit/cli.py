"""Command-line front end: ``shapekit run`` executes one experiment preset
and writes its MSE curve as CSV.

Exit codes: 0 on success, 2 on configuration errors (including bad usage),
3 on experiment-level failures.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError, ExperimentError
from .harness import PRESETS, apply_param, emit_csv, preset_config, run_experiment


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="shapekit",
        description="Monte Carlo benchmarking of robust shape-matrix estimators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment preset and write a CSV")
    run.add_argument("--preset", choices=sorted(PRESETS), default="custom")
    run.add_argument("--trials", type=int, default=None, help="Monte Carlo trials per sweep value")
    run.add_argument("--seed", type=int, default=None, help="master seed")
    run.add_argument("--out", default=None, help="output CSV path")
    run.add_argument(
        "--param",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a model parameter (lambda, L, nu, upsilon, epsilon, "
        "outlier_frac, s, sigma2, rho_mod, rho_arg, N); a comma-separated "
        "list replaces the sweep when KEY is the swept parameter",
    )
    run.add_argument(
        "--estimators",
        default=None,
        help="comma-separated estimator labels, e.g. scm,tyler,r:tyler:vdw",
    )
    run.add_argument("--workers", type=int, default=None, help="parallel worker processes")
    run.add_argument(
        "--dump-config",
        action="store_true",
        help="print the fully resolved configuration as JSON and exit",
    )
    return parser


def _resolve_config(args):
    overrides = {}
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.estimators is not None:
        labels = tuple(tok for tok in args.estimators.split(",") if tok)
        if not labels:
            raise ConfigError("--estimators must name at least one estimator")
        overrides["estimators"] = labels
    config = preset_config(args.preset, **overrides)
    for item in args.param:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--param expects KEY=VALUE, got {item!r}")
        config = apply_param(config, key, value)
    return config.validate()


def _config_json(config):
    return {
        "preset": config.preset,
        "N": config.n_dim,
        "rho_mod": config.rho_mod,
        "rho_arg": config.rho_arg,
        "sigma2": config.sigma2,
        "data_model": config.data_model,
        "sweep_param": config.sweep_param,
        "sweep": list(config.sweep),
        "lambda": config.lam,
        "L": config.n_obs,
        "nu": config.nu,
        "upsilon": config.upsilon,
        "s": config.gg_shape,
        "outlier_frac": config.outlier_frac,
        "epsilon": config.epsilon,
        "estimators": list(config.estimators),
        "trials": config.trials,
        "seed": config.seed,
        "workers": config.workers,
        "tyler_tol": config.tyler_tol,
        "tyler_max_iter": config.tyler_max_iter,
    }


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _resolve_config(args)
    except ConfigError as exc:
        print(f"shapekit: configuration error: {exc}", file=sys.stderr)
        return 2
    if args.dump_config:
        json.dump(_config_json(config), sys.stdout, indent=2)
        print()
        return 0
    if args.out is None:
        print("shapekit: configuration error: --out is required to run", file=sys.stderr)
        return 2
    try:
        curve = run_experiment(config)
    except ExperimentError as exc:
        print(f"shapekit: experiment failed: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"shapekit: configuration error: {exc}", file=sys.stderr)
        return 2
    emit_csv(curve, args.out)
    for row in curve.rows:
        wall = curve.detail[(row.sweep, row.estimator)].wall_seconds
        print(
            f"sweep={row.sweep:g} estimator={row.estimator} "
            f"mse_index={row.mse_index:.6e} trials={row.trials} "
            f"nonpd_rate={row.nonpd_rate:.4f} cell_seconds={wall:.1f}"
        )
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
