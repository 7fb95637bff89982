"""Experiment harness: config parsing, runners, CSV and manifest output.

Four experiments are provided, mirroring the library's validation story:
a single-asset accuracy sweep of direct vs Fourier integration, a
multi-asset benchmark table of the tensor-train pricer, a bond-dimension
sweep of the truncation error, and a one-shot pricing call.  Every runner
returns its rows and, when an output directory is configured, writes a CSV
plus a ``manifest.json`` (config hash, seeds, library version).  Reruns
with an identical manifest produce identical CSV bytes except for the
wall-time columns, which are hardware dependent and never asserted.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .cross import CrossConfig, tt_cross
from .errors import NumericsError
from .market import MarketModel
from .pricers import (
    GridSpec,
    phi_grid_oracle,
    payoff_grid_oracle,
    price_black_scholes,
    price_direct_grid,
    price_fourier_dense,
    price_fourier_tt,
    price_monte_carlo,
    table1_hyperparams,
)
from .tensor_train import tt_inner

__all__ = [
    "ExperimentConfig",
    "run_single_asset_sweep",
    "run_table1",
    "run_bond_dim_sweep",
    "run_price_once",
    "run_strike_sweep",
    "run_experiment",
]

EXPERIMENTS = ("price_once", "single_asset_sweep", "table1", "bond_dim_sweep")

# CSV schemas, version 1.  Columns are append-only within a major version.
SCHEMAS = {
    "single_asset_sweep": ["N", "err_direct", "err_fourier", "ratio"],
    "table1": [
        "d", "t_wall", "t_rel", "r_comp", "eps_trunc",
        "D_v", "D_phi", "eta", "price", "converged", "error",
    ],
    "bond_dim_sweep": [
        "beta", "D_phi", "mean_log_eps_trunc", "n_repeats", "converged_fraction",
    ],
    "strike_sweep": [
        "method", "d", "beta", "K", "price", "err_estimate",
        "wall_time_s", "oracle_calls",
    ],
}

_EPS_FLOOR = 1e-16  # keeps log10 finite if a repeat lands on the dense price


@dataclass
class ExperimentConfig:
    """Resolved settings for one experiment run.

    Build from a nested mapping with :meth:`from_dict`; sections are
    ``model``, ``grid``, ``cross``, ``mc``, ``sweep`` plus the top-level
    ``experiment``, ``method`` and ``out`` keys.  ``None`` means "use the
    benchmark default for the dimension at hand".
    """

    experiment: str = "price_once"
    # model
    r: float = 0.3
    sigma: float = 0.5
    T: float = 1.0
    s0: float = 100.0
    strike: float = 100.0
    beta: float = 0.5
    d: int = 1
    d_list: tuple = (2, 3, 4, 5, 6, 7, 8, 9, 10, 15)
    # grid
    n_grid: int = 50
    eta: float | None = None
    alpha: float | None = None
    # cross
    bond_v: int | None = None
    bond_phi: int | None = None
    eps_tol: float = 0.005
    max_sweeps: int = 4
    n_conv_samples: int = 50_000
    seed: int = 1234
    n_repeats: int = 20
    bond_phi_list: tuple = (2, 4, 6, 8, 10, 12)
    beta_list: tuple = (0.2, 0.5, 1.0)
    # mc baseline
    mc_samples: int = 50_000_000
    mc_seed: int = 99
    # single-asset sweep
    n_values: tuple = tuple(range(10, 101, 2))
    # price_once
    method: str = "bs_exact"
    out: str | None = None

    _SECTIONS = {
        "model": {
            "r": float, "sigma": float, "T": float, "s0": float,
            "strike": float, "beta": float, "d": int, "d_list": tuple,
        },
        "grid": {"N": int, "eta": float, "alpha": float},
        "cross": {
            "D_v": int, "D_phi": int, "eps_tol": float, "max_sweeps": int,
            "n_conv_samples": int, "seed": int, "n_repeats": int,
            "D_phi_list": tuple, "beta_list": tuple,
        },
        "mc": {"n_samples": int, "seed": int},
        "sweep": {"n_values": tuple},
    }
    _RENAME = {
        ("grid", "N"): "n_grid",
        ("cross", "D_v"): "bond_v",
        ("cross", "D_phi"): "bond_phi",
        ("cross", "D_phi_list"): "bond_phi_list",
        ("mc", "n_samples"): "mc_samples",
        ("mc", "seed"): "mc_seed",
    }

    @classmethod
    def from_dict(cls, raw):
        """Parse and validate a nested config mapping.

        Raises ``ValueError`` with the offending field path on bad input.
        """
        cfg = cls()
        known_top = {"experiment", "method", "out"} | set(cls._SECTIONS)
        unknown = set(raw) - known_top
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "experiment" in raw:
            if raw["experiment"] not in EXPERIMENTS:
                raise ValueError(
                    f"experiment: must be one of {EXPERIMENTS}, got {raw['experiment']!r}"
                )
            cfg.experiment = raw["experiment"]
        if "method" in raw:
            cfg.method = str(raw["method"])
        if "out" in raw and raw["out"] is not None:
            cfg.out = str(raw["out"])
        for section, keys in cls._SECTIONS.items():
            sub = raw.get(section, {})
            if not isinstance(sub, dict):
                raise ValueError(f"{section}: must be a mapping")
            bad = set(sub) - set(keys)
            if bad:
                raise ValueError(f"{section}: unknown keys {sorted(bad)}")
            for key, kind in keys.items():
                if key not in sub or sub[key] is None:
                    continue
                attr = cls._RENAME.get((section, key), key)
                value = sub[key]
                try:
                    if kind is tuple:
                        value = tuple(value)
                    else:
                        value = kind(value)
                except (TypeError, ValueError) as exc:
                    raise ValueError(f"{section}.{key}: {exc}") from exc
                setattr(cfg, attr, value)
        cfg.validate()
        return cfg

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"experiment: unknown experiment {self.experiment!r}")
        checks = [
            ("model.sigma", self.sigma > 0), ("model.T", self.T > 0),
            ("model.s0", self.s0 > 0), ("model.strike", self.strike > 0),
            ("model.beta", 0 <= self.beta <= 1), ("model.d", self.d >= 1),
            ("grid.N", self.n_grid >= 2 and self.n_grid % 2 == 0),
            ("cross.eps_tol", self.eps_tol > 0),
            ("cross.max_sweeps", self.max_sweeps >= 1),
            ("cross.n_repeats", self.n_repeats >= 1),
            ("mc.n_samples", self.mc_samples >= 0),
        ]
        for path, ok in checks:
            if not ok:
                raise ValueError(f"{path}: invalid value")
        for label, values in [
            ("model.d_list", self.d_list),
            ("cross.D_phi_list", self.bond_phi_list),
        ]:
            if any(int(v) < 1 for v in values):
                raise ValueError(f"{label}: entries must be >= 1")
        if self.experiment == "table1" and any(int(v) < 2 for v in self.d_list):
            raise ValueError("model.d_list: table runs need d >= 2")
        if any(not 0 <= b <= 1 for b in self.beta_list):
            raise ValueError("cross.beta_list: entries must lie in [0, 1]")

    def to_dict(self):
        """Resolved flat dict, used for hashing and the manifest."""
        out = {}
        for key, value in self.__dict__.items():
            out[key] = list(value) if isinstance(value, tuple) else value
        return out

    def model_for(self, d, beta=None):
        return MarketModel.with_plus_correlation(
            d=d, beta=self.beta if beta is None else beta,
            r=self.r, sigma=self.sigma, T=self.T, s0=self.s0, strike=self.strike,
        )

    def grid_for(self, d):
        if d == 1:
            eta = 0.5 if self.eta is None else self.eta
            alpha = 3.0 if self.alpha is None else self.alpha
        else:
            eta = table1_hyperparams(d)[0] if self.eta is None else self.eta
            alpha = 5.0 / d if self.alpha is None else self.alpha
        return GridSpec(n=self.n_grid, eta=eta, alpha=alpha, d=d)

    def bonds_for(self, d):
        if d == 1:
            # a single-site train stores the grid vector exactly
            table_v = table_phi = 1
        else:
            _, table_v, table_phi = table1_hyperparams(d)
        return (
            table_v if self.bond_v is None else self.bond_v,
            table_phi if self.bond_phi is None else self.bond_phi,
        )


def _format_cell(value):
    if value is None or value == "":
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        # plain shortest-roundtrip text, also for numpy float subclasses
        return repr(float(value))
    return str(value)


def _write_csv(path, fieldnames, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_format_cell(row.get(name)) for name in fieldnames])


def _write_manifest(out_dir, cfg, seeds):
    resolved = cfg.to_dict()
    blob = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    manifest = {
        "experiment": cfg.experiment,
        "config": resolved,
        "config_hash": hashlib.sha256(blob.encode()).hexdigest(),
        "seeds": seeds,
        "version": __version__,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _emit(cfg, rows, seeds):
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        _write_csv(
            os.path.join(cfg.out, f"{cfg.experiment}.csv"),
            SCHEMAS[cfg.experiment],
            rows,
        )
        _write_manifest(cfg.out, cfg, seeds)


def run_single_asset_sweep(cfg, threads=1):
    """Relative errors of direct vs Fourier integration against the closed form.

    One row per grid parameter N: both engines priced at the benchmark
    single-asset parameters, errors taken relative to Black-Scholes, plus
    their ratio.
    """
    model = cfg.model_for(1)
    exact = price_black_scholes(model).price

    def one(n):
        direct = price_direct_grid(model, n_points=n).price
        grid = GridSpec(n=n, eta=0.5 if cfg.eta is None else cfg.eta,
                        alpha=3.0 if cfg.alpha is None else cfg.alpha, d=1)
        fourier = price_fourier_dense(model, grid).price
        err_d = abs(direct - exact) / exact
        err_f = abs(fourier - exact) / exact
        return {
            "N": n,
            "err_direct": err_d,
            "err_fourier": err_f,
            "ratio": err_d / err_f if err_f > 0 else math.inf,
        }

    rows = _map_rows(one, list(cfg.n_values), threads)
    _emit(cfg, rows, seeds=[])
    return rows


def run_table1(cfg, threads=1):
    """Tensor-train pricer benchmark across asset counts.

    Per dimension: Table-style hyperparameters (overridable), one cross run
    per vector with seed ``cfg.seed + d``, truncation error against the
    dense sum when that is feasible, and wall time relative to a Monte
    Carlo baseline timed at d=2 and extrapolated linearly in d.  Cross
    failures are recorded in the row and the run continues.
    """
    t_mc2 = None
    if cfg.mc_samples > 0:
        mc = price_monte_carlo(cfg.model_for(2), cfg.mc_samples, cfg.mc_seed)
        t_mc2 = mc.wall_time_s

    def one(d):
        bond_v, bond_phi = cfg.bonds_for(d)
        grid = cfg.grid_for(d)
        row = {
            "d": d, "D_v": bond_v, "D_phi": bond_phi, "eta": grid.eta,
            "t_wall": None, "t_rel": None, "r_comp": None, "eps_trunc": None,
            "price": None, "converged": None, "error": "",
        }
        try:
            common = dict(eps_tol=cfg.eps_tol, max_sweeps=cfg.max_sweeps,
                          n_conv_samples=cfg.n_conv_samples, seed=cfg.seed + d)
            result = price_fourier_tt(
                cfg.model_for(d), grid,
                cfg_phi=CrossConfig(bond_dim=bond_phi, **common),
                cfg_v=CrossConfig(bond_dim=bond_v, **common),
            )
        except NumericsError as exc:
            row["error"] = str(exc)
            return row
        diag = result.diagnostics
        row["price"] = result.price
        row["t_wall"] = result.wall_time_s
        row["r_comp"] = diag["oracle_calls_total"] / grid.n_terms
        row["eps_trunc"] = diag.get("eps_trunc")
        row["converged"] = diag["cross_phi"].converged and diag["cross_v"].converged
        if t_mc2 is not None:
            row["t_rel"] = result.wall_time_s / (t_mc2 * d / 2.0)
        return row

    rows = _map_rows(one, [int(d) for d in cfg.d_list], threads)
    _emit(cfg, rows, seeds=[cfg.seed + int(d) for d in cfg.d_list])
    return rows


def run_bond_dim_sweep(cfg, threads=1):
    """Truncation error versus characteristic-function bond dimension.

    For each correlation strength and each bond dimension, the truncation
    error against the dense price is averaged (in log10) over
    ``cfg.n_repeats`` seeded repeats.  The payoff train is held at a large
    fixed rank (default 30) so the characteristic-function truncation
    dominates; repeats that fail to converge still contribute their
    achieved error.  Runs at d = 3 by default.
    """
    d = cfg.d if cfg.d > 1 else 3
    grid = cfg.grid_for(d)
    bond_v = 30 if cfg.bond_v is None else cfg.bond_v
    shape = (grid.points_per_axis,) * d
    seeds = [cfg.seed + i for i in range(cfg.n_repeats)]
    prefactor = grid.eta**d / (2.0 * np.pi) ** d

    # the payoff train depends on the seed but not on beta or D_phi
    v_model = cfg.model_for(d, beta=0.0)
    v_cache = {}
    for s in seeds:
        v_cfg = CrossConfig(bond_dim=bond_v, eps_tol=cfg.eps_tol,
                            max_sweeps=cfg.max_sweeps,
                            n_conv_samples=cfg.n_conv_samples, seed=s)
        v_cache[s] = tt_cross(payoff_grid_oracle(v_model, grid), shape, v_cfg)[0]

    dense_cache = {}
    for beta in cfg.beta_list:
        dense_cache[beta] = price_fourier_dense(cfg.model_for(d, beta=beta), grid)

    def one(task):
        beta, bond_phi = task
        model = cfg.model_for(d, beta=beta)
        dense = dense_cache[beta].price
        disc = np.exp(-model.r * model.T)
        logs = []
        converged = 0
        for s in seeds:
            phi_cfg = CrossConfig(bond_dim=bond_phi, eps_tol=cfg.eps_tol,
                                  max_sweeps=cfg.max_sweeps,
                                  n_conv_samples=cfg.n_conv_samples, seed=s)
            phi_tt, report = tt_cross(phi_grid_oracle(model, grid), shape, phi_cfg)
            converged += report.converged
            price = disc * prefactor * tt_inner(v_cache[s], phi_tt).real
            eps = abs(price - dense) / abs(dense)
            logs.append(math.log10(max(eps, _EPS_FLOOR)))
        return {
            "beta": beta,
            "D_phi": bond_phi,
            "mean_log_eps_trunc": float(np.mean(logs)),
            "n_repeats": cfg.n_repeats,
            "converged_fraction": converged / cfg.n_repeats,
        }

    tasks = [(beta, int(bp)) for beta in cfg.beta_list for bp in cfg.bond_phi_list]
    rows = _map_rows(one, tasks, threads)
    _emit(cfg, rows, seeds=seeds)
    return rows


def _dispatch_price(cfg):
    """Run the configured pricing method once."""
    model = cfg.model_for(cfg.d) if cfg.d > 1 else MarketModel(
        r=cfg.r, sigma=cfg.sigma, T=cfg.T, s0=cfg.s0, strike=cfg.strike, d=1
    )
    method = cfg.method
    if method == "bs_exact":
        return price_black_scholes(model)
    if method == "direct_grid":
        return price_direct_grid(model, n_points=cfg.n_grid)
    if method == "fourier_dense":
        return price_fourier_dense(model, cfg.grid_for(model.d))
    if method == "fourier_tt":
        bond_v, bond_phi = cfg.bonds_for(model.d)
        common = dict(eps_tol=cfg.eps_tol, max_sweeps=cfg.max_sweeps,
                      n_conv_samples=cfg.n_conv_samples, seed=cfg.seed)
        return price_fourier_tt(
            model, cfg.grid_for(model.d),
            cfg_phi=CrossConfig(bond_dim=bond_phi, **common),
            cfg_v=CrossConfig(bond_dim=bond_v, **common),
        )
    if method == "monte_carlo":
        return price_monte_carlo(model, cfg.mc_samples, cfg.mc_seed)
    raise ValueError(f"method: unknown pricing method {method!r}")


def _err_estimate(result):
    diag = result.diagnostics
    if result.method == "bs_exact":
        return 0.0
    if result.method == "fourier_dense":
        return diag["imag_residue"]
    if result.method == "fourier_tt":
        if "eps_trunc" in diag:
            return diag["eps_trunc"]
        return max(diag["cross_phi"].final_diff, diag["cross_v"].final_diff)
    if result.method == "monte_carlo":
        return diag["std_error"]
    return None  # direct_grid carries no internal estimate


def _evaluation_count(result):
    diag = result.diagnostics
    return {
        "bs_exact": 0,
        "direct_grid": diag.get("n_points"),
        "fourier_dense": diag.get("n_terms"),
        "fourier_tt": diag.get("oracle_calls_total"),
        "monte_carlo": diag.get("n_samples"),
    }[result.method]


def run_strike_sweep(cfg, strikes, methods=None):
    """Price a ladder of strikes with one or more methods.

    Emits plot-ready rows (and a CSV when an output directory is set) with
    one method-specific error estimate per row: the Monte Carlo standard
    error, the tensor-train truncation error (or its sampled proxy), the
    dense sum's imaginary residue, and zero for the closed form.
    """
    methods = [cfg.method] if methods is None else list(methods)
    rows = []
    for method in methods:
        for strike in strikes:
            sub = replace(cfg, method=method, strike=float(strike))
            result = _dispatch_price(sub)
            rows.append({
                "method": method,
                "d": sub.d,
                "beta": sub.beta,
                "K": sub.strike,
                "price": result.price,
                "err_estimate": _err_estimate(result),
                "wall_time_s": result.wall_time_s,
                "oracle_calls": _evaluation_count(result),
            })
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        _write_csv(
            os.path.join(cfg.out, "strike_sweep.csv"),
            SCHEMAS["strike_sweep"],
            rows,
        )
        _write_manifest(cfg.out, cfg, seeds=[cfg.seed, cfg.mc_seed])
    return rows


def run_price_once(cfg):
    """Single pricing call; returns a JSON-ready dict.

    The ``result`` block is bit-reproducible for a fixed config; timing is
    reported separately under ``timing``.
    """
    result = _dispatch_price(cfg)
    payload = {
        "result": result.to_dict(include_timing=False),
        "timing": {"wall_time_s": result.wall_time_s},
    }
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        with open(os.path.join(cfg.out, "price_once.json"), "w",
                  encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, indent=2)
            fh.write("\n")
        _write_manifest(cfg.out, cfg, seeds=[cfg.seed, cfg.mc_seed])
    return payload


def run_experiment(cfg, threads=1):
    """Dispatch on ``cfg.experiment``."""
    if cfg.experiment == "price_once":
        return run_price_once(cfg)
    runner = {
        "single_asset_sweep": run_single_asset_sweep,
        "table1": run_table1,
        "bond_dim_sweep": run_bond_dim_sweep,
    }[cfg.experiment]
    return runner(cfg, threads=threads)


def _map_rows(fn, items, threads):
    """Run independent row tasks, optionally in a thread pool, keeping order."""
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]
