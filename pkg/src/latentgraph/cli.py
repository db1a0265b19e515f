"""Command-line interface: fit, simulate, cv, variogram, presets.

Configuration comes from flags, optionally layered over an INI-style config
file (sections [run], [penalty], [grid], [admm]; keys match the flag names
with dashes replaced by underscores). Flags win over the file. Every output
directory gets a manifest that echoes the full resolved configuration, so a
run is reproducible from its manifest alone.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 divergence or
non-convergence.
"""

import argparse
import configparser
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import dataio, plots
from .exceptions import ConfigError, DataError, DivergenceError
from .extremes import (
    empirical_variogram,
    is_conditionally_negative_definite,
    sample_hr_pareto,
)
from .gauss_admm import AdmmParams, solve_latent_gaussian
from .lap_admm import solve_latent_laplacian
from .matcore import psd_project
from .penalty import PENALTY_KINDS, PenaltySpec, compile_penalty
from .select import (
    EDGE_TOL,
    RANK_TOL,
    GridSpec,
    count_edges,
    estimate_rank,
    holdout_cv,
    kfold_cv,
)
from .simgen import (
    latent_cycle_hr,
    observed_cov,
    sample_gaussian,
    spawn_seeds,
    two_cycle_gaussian,
)

_SECTIONS = {
    "run": (
        "mode", "input", "input_kind", "output", "seed", "cv", "folds",
        "val_fraction", "hr_threshold", "edge_tol", "rank_tol", "figures",
        "model", "p_per_cycle", "k_diag", "k_edge", "k_hidden", "p", "h",
        "n_samples", "dim",
    ),
    "penalty": ("penalty", "gamma", "lambda_n", "zero_edges", "zero_base", "weights"),
    "grid": ("lam_min", "lam_max", "lam_count", "lam_scale"),
    "admm": ("sigma", "alpha", "varsigma", "rho", "eps1", "eps2", "max_iter"),
}

_BOOLS = {"figures"}
_INTS = {"seed", "folds", "max_iter", "p_per_cycle", "p", "h", "n_samples", "lam_count", "dim"}
_FLOATS = {
    "val_fraction", "hr_threshold", "edge_tol", "rank_tol", "gamma", "lambda_n",
    "lam_min", "lam_max", "sigma", "alpha", "varsigma", "rho", "eps1", "eps2",
    "k_diag", "k_edge", "k_hidden",
}


@dataclass
class RunConfig:
    command: str
    mode: str = "gaussian"
    input: Optional[str] = None
    input_kind: str = "samples"
    output: str = "."
    seed: int = 0
    penalty: List[str] = field(default_factory=lambda: ["lasso"])
    gamma: float = 0.5
    lambda_n: float = 0.1
    zero_edges: Optional[str] = None
    zero_base: str = "lasso"
    weights: Optional[str] = None
    lam_min: float = 1e-8
    lam_max: float = 1.0
    lam_count: int = 20
    lam_scale: str = "log"
    cv: str = "kfold"
    folds: int = 5
    val_fraction: float = 0.5
    hr_threshold: float = 0.95
    sigma: float = 1.0
    alpha: float = 1.0
    varsigma: float = 1.01
    rho: float = 0.0
    eps1: float = 1e-5
    eps2: float = 1e-5
    max_iter: int = 10000
    edge_tol: float = EDGE_TOL
    rank_tol: float = RANK_TOL
    figures: bool = True
    model: str = "two-cycle"
    p_per_cycle: int = 25
    k_diag: float = 5.0
    k_edge: float = -2.0
    k_hidden: Optional[float] = None
    p: int = 30
    h: int = 3
    n_samples: int = 1000
    dim: int = 5


def _read_config_file(path: str) -> dict:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    flat = {}
    for section, keys in _SECTIONS.items():
        if not parser.has_section(section):
            continue
        for key, raw in parser.items(section):
            if key not in keys:
                raise ConfigError(f"unknown key {key!r} in config section [{section}]")
            flat[key] = raw
    return flat


def _coerce(key: str, raw: str):
    if key in _BOOLS:
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"cannot parse boolean config value {key}={raw!r}")
    try:
        if key in _INTS:
            return int(raw)
        if key in _FLOATS:
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"cannot parse config value {key}={raw!r}") from exc
    if key == "penalty":
        return [tok.strip() for tok in raw.split(",") if tok.strip()]
    return raw


def _resolve(args: argparse.Namespace, command: str) -> RunConfig:
    cfg = RunConfig(command=command)
    file_values = {}
    if getattr(args, "config", None):
        for key, raw in _read_config_file(args.config).items():
            file_values[key] = _coerce(key, raw)
    for key in vars(cfg):
        if key == "command":
            continue
        flag = getattr(args, key, None)
        if flag is not None:
            setattr(cfg, key, flag)
        elif key in file_values:
            setattr(cfg, key, file_values[key])
    return cfg


def _admm_params(cfg: RunConfig, lambda_n: Optional[float] = None) -> AdmmParams:
    try:
        return AdmmParams(
            lambda_n=cfg.lambda_n if lambda_n is None else lambda_n,
            sigma=cfg.sigma,
            alpha=cfg.alpha,
            varsigma=cfg.varsigma,
            rho=cfg.rho,
            eps1=cfg.eps1,
            eps2=cfg.eps2,
            max_iter=cfg.max_iter,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _penalty_specs(cfg: RunConfig) -> List[PenaltySpec]:
    specs = []
    zero_edges = None
    if cfg.zero_edges:
        try:
            with open(cfg.zero_edges) as handle:
                pairs = json.load(handle)
            zero_edges = [(int(i), int(j)) for i, j in pairs]
        except (OSError, ValueError, TypeError) as exc:
            raise DataError(f"cannot read zero-edge file {cfg.zero_edges}: {exc}") from exc
    weights = None
    if cfg.weights:
        weights = dataio.read_matrix_csv(cfg.weights)
    for kind in cfg.penalty:
        if kind not in PENALTY_KINDS:
            raise ConfigError(f"unknown penalty kind {kind!r}")
        try:
            if kind == "zero_pattern":
                specs.append(PenaltySpec(kind=kind, zero_edges=zero_edges or [], base=cfg.zero_base))
            elif kind == "asymmetric":
                specs.append(PenaltySpec(kind=kind, weights=weights))
            else:
                specs.append(PenaltySpec(kind=kind))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if len({s.label for s in specs}) != len(specs):
        raise ConfigError("penalty kinds must be distinct within one run")
    return specs


def _config_echo(cfg: RunConfig) -> dict:
    echo = asdict(cfg)
    echo["penalty"] = list(echo["penalty"])
    return echo


def _load_solver_input(cfg: RunConfig):
    """Return (solver_input, diagnostics) for the configured mode and input kind."""
    if cfg.input is None:
        raise ConfigError("an input file is required")
    diag = {"psd_repaired": False}
    kind, mode = cfg.input_kind, cfg.mode
    if mode not in ("gaussian", "hr", "lcggm"):
        raise ConfigError(f"unknown mode {mode!r}")
    if kind == "covariance" and mode != "gaussian":
        raise ConfigError("covariance input is only valid in gaussian mode")
    if kind == "variogram" and mode == "gaussian":
        raise ConfigError("variogram input is only valid in hr or lcggm modes")

    if kind == "samples":
        x = dataio.read_samples_csv(cfg.input)
        diag["n_rows"] = int(x.shape[0])
        if mode == "hr":
            k = max(math.ceil((1.0 - cfg.hr_threshold) * x.shape[0]), 2)
            gamma_bar = empirical_variogram(x, k)
            diag["k"] = k
            diag["variogram_cnd"] = is_conditionally_negative_definite(gamma_bar)
            return -gamma_bar / 2.0, diag
        return observed_cov(x), diag
    if kind == "covariance":
        s = dataio.read_matrix_csv(cfg.input)
        if s.shape[0] != s.shape[1]:
            raise DataError(f"covariance file must be square, got {s.shape}")
        eigs = np.linalg.eigvalsh((s + s.T) / 2.0)
        if eigs[0] < -1e-8 * max(1.0, float(np.max(np.abs(s)))):
            print(
                f"warning: covariance input is not PSD (min eigenvalue {eigs[0]:.3e}); "
                "projecting onto the PSD cone",
                file=sys.stderr,
            )
            s = psd_project(s)
            diag["psd_repaired"] = True
        return (s + s.T) / 2.0, diag
    if kind == "variogram":
        gamma_bar = dataio.read_matrix_csv(cfg.input)
        diag["variogram_cnd"] = is_conditionally_negative_definite(gamma_bar)
        return -gamma_bar / 2.0, diag
    raise ConfigError(f"unknown input kind {kind!r}")


def _edge_list(a: np.ndarray, tol: float) -> list:
    cut = tol * max(1.0, float(np.max(np.abs(a))))
    edges = []
    d = a.shape[0]
    for i in range(d):
        for j in range(i + 1, d):
            if abs(a[i, j]) > cut:
                edges.append([i, j, float(a[i, j])])
    return edges


def cmd_fit(cfg: RunConfig) -> int:
    solver_input, diag = _load_solver_input(cfg)
    d = solver_input.shape[0]
    specs = _penalty_specs(cfg)
    if len(specs) != 1:
        raise ConfigError("fit takes exactly one penalty kind")
    bounds = compile_penalty(specs[0], d, cfg.lambda_n, cfg.gamma)
    params = _admm_params(cfg)

    outdir = Path(cfg.output)
    outdir.mkdir(parents=True, exist_ok=True)
    if cfg.mode == "gaussian":
        res = solve_latent_gaussian(solver_input, bounds, params)
        estimate_name = "M"
        estimate = res.M
    else:
        res = solve_latent_laplacian(solver_input, bounds, params)
        estimate_name = "theta"
        estimate = res.theta

    outputs = [f"{estimate_name}.csv", "A.csv", "B.csv", "edges.json", "manifest.json"]
    dataio.write_matrix_csv(outdir / f"{estimate_name}.csv", estimate)
    dataio.write_matrix_csv(outdir / "A.csv", res.A)
    dataio.write_matrix_csv(outdir / "B.csv", res.B)
    edges = _edge_list(res.A, cfg.edge_tol)
    dataio.write_json(outdir / "edges.json", {"tol": cfg.edge_tol, "edges": edges})
    if cfg.figures:
        outputs.append(
            plots.save_estimate_figure(
                {estimate_name: estimate, "A": res.A, "B": res.B}, outdir / "estimates.png"
            )
        )
    positive_offdiag = int(np.count_nonzero(np.triu(res.A, k=1) > 0))
    manifest = {
        "command": "fit",
        "config": _config_echo(cfg),
        "diagnostics": {
            **diag,
            "iterations": res.iterations,
            "converged": res.converged,
            "rel_chg": res.rel_chg,
            "ier": res.ier,
            "objective": res.objective,
            "edges": len(edges),
            "rank": estimate_rank(res.B, cfg.rank_tol),
            "positive_offdiagonals": positive_offdiag,
        },
        "outputs": sorted(outputs),
    }
    dataio.write_json(outdir / "manifest.json", manifest)
    print(
        f"fit: {'converged' if res.converged else 'NOT converged'} in {res.iterations} "
        f"iterations, {len(edges)} edges, rank {manifest['diagnostics']['rank']} -> {outdir}"
    )
    return 0 if res.converged else 4


def cmd_simulate(cfg: RunConfig) -> int:
    outdir = Path(cfg.output)
    outdir.mkdir(parents=True, exist_ok=True)
    model_seed, sample_seed = spawn_seeds(cfg.seed, 2)
    if cfg.model == "two-cycle":
        model = two_cycle_gaussian(cfg.p_per_cycle, cfg.k_diag, cfg.k_edge, cfg.k_hidden)
        x = sample_gaussian(model.full, cfg.n_samples, sample_seed)[:, model.obs]
        dataio.write_matrix_csv(outdir / "K.csv", model.full)
        matrix_file = "K.csv"
    elif cfg.model == "hr-cycle":
        model = latent_cycle_hr(cfg.p, cfg.h, model_seed)
        x = sample_hr_pareto(model.gamma_obs, cfg.n_samples, sample_seed)
        dataio.write_matrix_csv(outdir / "theta.csv", model.full)
        dataio.write_matrix_csv(outdir / "gamma_obs.csv", model.gamma_obs)
        matrix_file = "theta.csv"
    else:
        raise ConfigError(f"unknown simulation model {cfg.model!r}")
    dataio.write_samples_csv(outdir / "samples.csv", x)
    dataio.write_json(
        outdir / "model.json",
        {
            "kind": model.kind,
            "observed": [int(i) for i in model.obs],
            "hidden": [int(i) for i in model.hidden],
            "edges_true": [[int(i), int(j)] for i, j in model.edges_true],
        },
    )
    manifest = {
        "command": "simulate",
        "config": _config_echo(cfg),
        "diagnostics": {"n_rows": int(x.shape[0]), "n_cols": int(x.shape[1])},
        "outputs": sorted([matrix_file, "samples.csv", "model.json", "manifest.json"]
                          + (["gamma_obs.csv"] if cfg.model == "hr-cycle" else [])),
    }
    dataio.write_json(outdir / "manifest.json", manifest)
    print(f"simulate: wrote {x.shape[0]}x{x.shape[1]} samples -> {outdir}")
    return 0


def cmd_cv(cfg: RunConfig) -> int:
    if cfg.input_kind != "samples":
        raise ConfigError("cross-validation requires raw samples as input")
    x = dataio.read_samples_csv(cfg.input) if cfg.input else None
    if x is None:
        raise ConfigError("an input file is required")
    specs = _penalty_specs(cfg)
    try:
        grid = GridSpec(cfg.lam_min, cfg.lam_max, cfg.lam_count, cfg.lam_scale, cfg.gamma)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    params = _admm_params(cfg, lambda_n=cfg.lam_min)
    if cfg.cv == "kfold":
        report = kfold_cv(x, cfg.folds, grid, specs, cfg.mode, params,
                          seed=cfg.seed, hr_quantile=cfg.hr_threshold)
    elif cfg.cv == "holdout":
        report = holdout_cv(x, grid, specs, cfg.mode, params, seed=cfg.seed,
                            val_fraction=cfg.val_fraction, hr_quantile=cfg.hr_threshold)
    else:
        raise ConfigError(f"unknown cv protocol {cfg.cv!r}")

    outdir = Path(cfg.output)
    outdir.mkdir(parents=True, exist_ok=True)
    cell_header = ["spec", "lam", "fold", "score", "edges", "rank", "iterations", "converged", "ok"]
    cell_rows = [
        [c.spec_label, c.lam, c.fold, c.score, c.edges, c.rank, c.iterations,
         int(c.converged), int(c.ok)]
        for c in report.cells
    ]
    dataio.write_csv_rows(outdir / "cells.csv", cell_header, cell_rows)
    summary = report.summary()
    sum_header = ["spec", "lam", "mean_score", "mean_edges", "mean_rank", "n_used", "n_cells"]
    sum_rows = [
        [r["spec"], r["lam"], r["mean_score"], r["mean_edges"], r["mean_rank"],
         r["n_used"], r["n_cells"]]
        for r in summary
    ]
    dataio.write_csv_rows(outdir / "summary.csv", sum_header, sum_rows)
    dataio.write_json(outdir / "summary.json", summary)
    outputs = ["cells.csv", "summary.csv", "summary.json", "manifest.json"]
    if cfg.figures:
        outputs.extend(plots.save_summary_figures(summary, outdir))
    n_ok = sum(1 for c in report.cells if c.ok and c.converged)
    manifest = {
        "command": "cv",
        "config": _config_echo(cfg),
        "diagnostics": {
            "n_rows": int(x.shape[0]),
            "n_cells": len(report.cells),
            "n_converged": n_ok,
        },
        "outputs": sorted(outputs),
    }
    dataio.write_json(outdir / "manifest.json", manifest)
    print(f"cv: {n_ok}/{len(report.cells)} cells converged -> {outdir}")
    return 0 if n_ok > 0 else 4


def cmd_variogram(cfg: RunConfig) -> int:
    if cfg.input is None:
        raise ConfigError("an input file is required")
    x = dataio.read_samples_csv(cfg.input)
    k = max(math.ceil((1.0 - cfg.hr_threshold) * x.shape[0]), 2)
    gamma_bar = empirical_variogram(x, k)
    outdir = Path(cfg.output)
    outdir.mkdir(parents=True, exist_ok=True)
    dataio.write_matrix_csv(outdir / "variogram.csv", gamma_bar)
    manifest = {
        "command": "variogram",
        "config": _config_echo(cfg),
        "diagnostics": {
            "n_rows": int(x.shape[0]),
            "k": k,
            "variogram_cnd": is_conditionally_negative_definite(gamma_bar),
        },
        "outputs": ["manifest.json", "variogram.csv"],
    }
    dataio.write_json(outdir / "manifest.json", manifest)
    print(f"variogram: k={k} from {x.shape[0]} rows -> {outdir}")
    return 0


def cmd_presets(cfg: RunConfig) -> int:
    specs = _penalty_specs(cfg)
    for spec in specs:
        bounds = compile_penalty(spec, cfg.dim, cfg.lambda_n, cfg.gamma)
        print(f"# {spec.label}: lower bounds")
        for row in bounds.L:
            print(",".join("%g" % v for v in row))
        print(f"# {spec.label}: upper bounds")
        for row in bounds.U:
            print(",".join("%g" % v for v in row))
    return 0


def _add_common(parser):
    parser.add_argument("--config", help="INI config file; flags override it")
    parser.add_argument("--output", help="output directory")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--figures", dest="figures", action="store_const", const=True)
    parser.add_argument("--no-figures", dest="figures", action="store_const", const=False)


def _add_penalty(parser, repeatable: bool):
    if repeatable:
        parser.add_argument("--penalty", action="append", choices=PENALTY_KINDS,
                            help="penalty kind; repeat to compare several")
    else:
        parser.add_argument("--penalty", type=lambda s: [s], choices=None,
                            metavar="KIND", help="penalty kind")
    parser.add_argument("--gamma", type=float, help="sparsity/trace tradeoff")
    parser.add_argument("--zero-edges", dest="zero_edges",
                        help="JSON file with [i, j] pairs forced to zero")
    parser.add_argument("--zero-base", dest="zero_base",
                        help="preset the zero pattern is layered on")
    parser.add_argument("--weights", help="CSV weight matrix for the asymmetric kind")


def _add_admm(parser):
    parser.add_argument("--sigma", type=float)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--varsigma", type=float)
    parser.add_argument("--rho", type=float)
    parser.add_argument("--eps1", type=float)
    parser.add_argument("--eps2", type=float)
    parser.add_argument("--max-iter", dest="max_iter", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latentgraph",
        description="Penalized structure learning for latent Gaussian and "
                    "extremal graphical models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit a single penalized model")
    _add_common(fit)
    fit.add_argument("--mode", choices=("gaussian", "hr", "lcggm"))
    fit.add_argument("--input", help="input file (CSV)")
    fit.add_argument("--input-kind", dest="input_kind",
                     choices=("samples", "covariance", "variogram"))
    fit.add_argument("--lambda-n", dest="lambda_n", type=float)
    fit.add_argument("--hr-threshold", dest="hr_threshold", type=float,
                     help="quantile level a; effective size k = ceil((1-a) n)")
    fit.add_argument("--edge-tol", dest="edge_tol", type=float)
    fit.add_argument("--rank-tol", dest="rank_tol", type=float)
    _add_penalty(fit, repeatable=False)
    _add_admm(fit)

    sim = sub.add_parser("simulate", help="generate a synthetic dataset")
    _add_common(sim)
    sim.add_argument("--model", choices=("two-cycle", "hr-cycle"))
    sim.add_argument("--p-per-cycle", dest="p_per_cycle", type=int)
    sim.add_argument("--k-diag", dest="k_diag", type=float)
    sim.add_argument("--k-edge", dest="k_edge", type=float)
    sim.add_argument("--k-hidden", dest="k_hidden", type=float)
    sim.add_argument("--p", type=int, help="observed cycle length (hr-cycle)")
    sim.add_argument("--h", type=int, help="hidden node count (hr-cycle)")
    sim.add_argument("--n-samples", dest="n_samples", type=int)

    cv = sub.add_parser("cv", help="cross-validate penalties over a lambda grid")
    _add_common(cv)
    cv.add_argument("--mode", choices=("gaussian", "hr", "lcggm"))
    cv.add_argument("--input", help="sample CSV file")
    cv.add_argument("--input-kind", dest="input_kind", choices=("samples",))
    cv.add_argument("--cv", dest="cv", choices=("kfold", "holdout"))
    cv.add_argument("--folds", type=int)
    cv.add_argument("--val-fraction", dest="val_fraction", type=float)
    cv.add_argument("--hr-threshold", dest="hr_threshold", type=float)
    cv.add_argument("--lam-min", dest="lam_min", type=float)
    cv.add_argument("--lam-max", dest="lam_max", type=float)
    cv.add_argument("--lam-count", dest="lam_count", type=int)
    cv.add_argument("--lam-scale", dest="lam_scale", choices=("log", "linear"))
    _add_penalty(cv, repeatable=True)
    _add_admm(cv)

    vario = sub.add_parser("variogram", help="estimate an empirical variogram")
    _add_common(vario)
    vario.add_argument("--input", help="sample CSV file")
    vario.add_argument("--hr-threshold", dest="hr_threshold", type=float)

    pre = sub.add_parser("presets", help="print compiled penalty bounds")
    _add_common(pre)
    pre.add_argument("--dim", type=int)
    pre.add_argument("--lambda-n", dest="lambda_n", type=float)
    _add_penalty(pre, repeatable=True)

    return parser


_COMMANDS = {
    "fit": cmd_fit,
    "simulate": cmd_simulate,
    "cv": cmd_cv,
    "variogram": cmd_variogram,
    "presets": cmd_presets,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args, args.command)
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except DivergenceError as exc:
        print(f"solver diverged: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
