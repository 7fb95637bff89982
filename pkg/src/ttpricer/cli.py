"""Command line interface.

Subcommands: ``price``, ``sweep-single``, ``table1``, ``bond-sweep``.
Each takes an optional JSON or TOML config document plus a few overriding
flags, runs the corresponding experiment, prints a short summary, and
writes CSV/JSON artifacts when ``--out`` is given.

Exit codes: 0 on success, 2 on a config error, 3 on a numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .bench import (
    ExperimentConfig,
    run_bond_dim_sweep,
    run_price_once,
    run_single_asset_sweep,
    run_table1,
)
from .errors import CapacityError, NumericsError, StripConditionError

_SUBCOMMANDS = {
    "price": "price_once",
    "sweep-single": "single_asset_sweep",
    "table1": "table1",
    "bond-sweep": "bond_dim_sweep",
}


def _load_config(path):
    if path is None:
        return {}
    if path.endswith(".toml"):
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ttpricer",
        description="Tensor-train Fourier pricing of multi-asset European options",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, experiment in _SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"run the {experiment} experiment")
        p.add_argument("--config", help="JSON or TOML config document")
        p.add_argument("--out", help="output directory for CSV + manifest")
        p.add_argument("--seed", type=int, help="override the cross/run seed")
        p.add_argument("--threads", type=int, default=1,
                       help="parallel row workers (default 1)")
        p.set_defaults(experiment=experiment)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        raw = _load_config(args.config)
        raw["experiment"] = args.experiment
        cfg = ExperimentConfig.from_dict(raw)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.out is not None:
            cfg.out = args.out
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        if cfg.experiment == "price_once":
            payload = run_price_once(cfg)
            print(json.dumps(payload, sort_keys=True, indent=2))
        elif cfg.experiment == "single_asset_sweep":
            rows = run_single_asset_sweep(cfg, threads=args.threads)
            worst = rows[-1]
            print(f"{len(rows)} rows; at N={worst['N']}: "
                  f"err_direct={worst['err_direct']:.3e} "
                  f"err_fourier={worst['err_fourier']:.3e}")
        elif cfg.experiment == "table1":
            rows = run_table1(cfg, threads=args.threads)
            for row in rows:
                eps = row["eps_trunc"]
                print(f"d={row['d']:>2}  price={_fmt(row['price'])}  "
                      f"r_comp={_fmt(row['r_comp'])}  "
                      f"eps_trunc={_fmt(eps)}  "
                      f"converged={row['converged']}  {row['error']}")
        else:
            rows = run_bond_dim_sweep(cfg, threads=args.threads)
            for row in rows:
                print(f"beta={row['beta']}  D_phi={row['D_phi']:>3}  "
                      f"mean_log10_eps={row['mean_log_eps_trunc']:+.2f}")
        if cfg.out:
            print(f"artifacts written to {cfg.out}")
    except (NumericsError, StripConditionError, CapacityError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


def _fmt(value):
    return "-" if value is None else f"{value:.6g}"


if __name__ == "__main__":
    sys.exit(main())
