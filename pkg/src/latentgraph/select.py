"""Model selection: penalty grids, cross-validation and structure diagnostics."""

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import DataError, DivergenceError
from .extremes import empirical_variogram
from .gauss_admm import AdmmParams, gaussian_loglik, solve_latent_gaussian
from .lap_admm import solve_latent_laplacian, surrogate_loglik
from .penalty import PenaltySpec, compile_penalty
from .simgen import observed_cov

EDGE_TOL = 1e-4
RANK_TOL = 1e-6

LAMBDA_FLOOR = 1e-10  # the solvers get unstable in the exact-zero limit


@dataclass(frozen=True)
class GridSpec:
    """Penalty-level grid; `gamma` is the fixed sparsity/trace tradeoff."""

    lam_min: float
    lam_max: float
    count: int
    scale: str = "log"
    gamma: float = 0.5

    def __post_init__(self):
        if not 0 < self.lam_min <= self.lam_max:
            raise ValueError("grid bounds must satisfy 0 < lam_min <= lam_max")
        if self.count < 1:
            raise ValueError("grid needs at least one point")
        if self.scale not in ("log", "linear"):
            raise ValueError(f"unknown grid scale {self.scale!r}")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")


def lambda_grid(spec: GridSpec) -> np.ndarray:
    """Grid values, endpoints included, floored at a small positive level."""
    if spec.count == 1:
        vals = np.array([spec.lam_min])
    elif spec.scale == "log":
        vals = np.geomspace(spec.lam_min, spec.lam_max, spec.count)
    else:
        vals = np.linspace(spec.lam_min, spec.lam_max, spec.count)
    return np.maximum(vals, LAMBDA_FLOOR)


@dataclass
class CvCell:
    spec_label: str
    lam: float
    fold: int
    score: float = math.nan
    edges: int = -1
    rank: int = -1
    iterations: int = 0
    converged: bool = False
    ok: bool = False
    message: str = ""


@dataclass
class CvReport:
    """All per-(penalty, lambda, fold) fit results plus per-lambda means."""

    cells: List[CvCell] = field(default_factory=list)

    def summary(self) -> List[dict]:
        """Per (spec, lambda) means over valid converged cells, with counts."""
        keys: List[Tuple[str, float]] = []
        groups: Dict[Tuple[str, float], List[CvCell]] = {}
        for cell in self.cells:
            key = (cell.spec_label, cell.lam)
            if key not in groups:
                groups[key] = []
                keys.append(key)
            groups[key].append(cell)
        rows = []
        for key in keys:
            cells = groups[key]
            used = [c for c in cells if c.ok and c.converged]
            row = {
                "spec": key[0],
                "lam": key[1],
                "n_cells": len(cells),
                "n_used": len(used),
                "mean_score": float(np.mean([c.score for c in used])) if used else math.nan,
                "mean_edges": float(np.mean([c.edges for c in used])) if used else math.nan,
                "mean_rank": float(np.mean([c.rank for c in used])) if used else math.nan,
            }
            rows.append(row)
        return rows


def count_edges(a: np.ndarray, tol: float = EDGE_TOL) -> int:
    """Number of upper-triangular entries exceeding a scale-aware threshold."""
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    a = np.asarray(a, dtype=float)
    cut = tol * max(1.0, float(np.max(np.abs(a))))
    iu = np.triu_indices(a.shape[0], k=1)
    return int(np.count_nonzero(np.abs(a[iu]) > cut))


def estimate_rank(b: np.ndarray, tol: float = RANK_TOL) -> int:
    """Number of eigenvalues exceeding a spectral-norm-aware threshold."""
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    values = np.linalg.eigvalsh(np.asarray(b, dtype=float))
    cut = tol * max(1.0, float(np.max(np.abs(values))) if values.size else 0.0)
    return int(np.count_nonzero(values > cut))


def grid_eval(
    stat_train: np.ndarray,
    stat_val: np.ndarray,
    specs: Sequence[PenaltySpec],
    grid: GridSpec,
    mode: str,
    params: AdmmParams,
    fold: int = 0,
    basis: Optional[np.ndarray] = None,
) -> List[CvCell]:
    """Fit every (penalty, lambda) pair on a training statistic and score it.

    `stat_train`/`stat_val` are sample covariances in gaussian/lcggm modes and
    empirical variograms in hr mode. Failures (divergence, non-PD validation
    score) are recorded in the cell rather than raised.
    """
    if mode not in ("gaussian", "hr", "lcggm"):
        raise ValueError(f"unknown mode {mode!r}")
    d = stat_train.shape[0]
    cells = []
    for spec in specs:
        for lam in lambda_grid(grid):
            cell = CvCell(spec_label=spec.label, lam=float(lam), fold=fold)
            bounds = compile_penalty(spec, d, float(lam), grid.gamma)
            run = replace(params, lambda_n=float(lam))
            try:
                if mode == "gaussian":
                    res = solve_latent_gaussian(stat_train, bounds, run)
                    score = gaussian_loglik(res.A - res.B, stat_val)
                elif mode == "lcggm":
                    res = solve_latent_laplacian(stat_train, bounds, run, p=basis)
                    score = surrogate_loglik(res.theta, stat_val)
                else:
                    res = solve_latent_laplacian(-stat_train / 2.0, bounds, run, p=basis)
                    score = surrogate_loglik(res.theta, stat_val)
            except (DivergenceError, ValueError) as exc:
                cell.message = str(exc)
                cells.append(cell)
                continue
            cell.score = float(score)
            cell.edges = count_edges(res.A)
            cell.rank = estimate_rank(res.B)
            cell.iterations = res.iterations
            cell.converged = res.converged
            cell.ok = bool(np.isfinite(score))
            cells.append(cell)
    return cells


def _fold_indices(n: int, folds: int, seed) -> List[np.ndarray]:
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    return [np.sort(part) for part in np.array_split(perm, folds)]


def _statistic(rows: np.ndarray, mode: str, hr_quantile: float) -> np.ndarray:
    if mode == "hr":
        k = math.ceil((1.0 - hr_quantile) * rows.shape[0])
        return empirical_variogram(rows, max(k, 2))
    return observed_cov(rows)


def kfold_cv(
    data: np.ndarray,
    folds: int,
    grid: GridSpec,
    specs: Sequence[PenaltySpec],
    mode: str,
    params: AdmmParams,
    seed=None,
    hr_quantile: float = 0.95,
) -> CvReport:
    """Seeded k-fold cross-validation over a penalty grid.

    Rows are shuffled once and split into `folds` parts; for each held-out
    part the summary statistic is recomputed from the raw training rows
    (the variogram estimator is nonlinear in the data) and every
    (penalty, lambda) fit is scored on the held-out statistic.
    """
    data = np.asarray(data, dtype=float)
    if folds < 2:
        raise ValueError("cross-validation needs at least 2 folds")
    n = data.shape[0]
    if n < folds:
        raise DataError(f"cannot split {n} rows into {folds} folds")
    report = CvReport()
    parts = _fold_indices(n, folds, seed)
    for f, val_idx in enumerate(parts):
        train_idx = np.setdiff1d(np.arange(n), val_idx)
        try:
            stat_train = _statistic(data[train_idx], mode, hr_quantile)
            stat_val = _statistic(data[val_idx], mode, hr_quantile)
        except DataError as exc:
            for spec in specs:
                for lam in lambda_grid(grid):
                    report.cells.append(
                        CvCell(spec_label=spec.label, lam=float(lam), fold=f, message=str(exc))
                    )
            continue
        report.cells.extend(grid_eval(stat_train, stat_val, specs, grid, mode, params, fold=f))
    return report


def holdout_cv(
    data: np.ndarray,
    grid: GridSpec,
    specs: Sequence[PenaltySpec],
    mode: str,
    params: AdmmParams,
    seed=None,
    val_fraction: float = 0.5,
    hr_quantile: float = 0.95,
) -> CvReport:
    """Single seeded train/validation split evaluated like one CV fold."""
    data = np.asarray(data, dtype=float)
    n = data.shape[0]
    if not 0 < val_fraction < 1:
        raise ValueError("validation fraction must lie in (0, 1)")
    n_val = max(int(round(val_fraction * n)), 1)
    if n_val >= n:
        raise DataError("holdout split leaves no training rows")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    val_idx = np.sort(perm[:n_val])
    train_idx = np.sort(perm[n_val:])
    stat_train = _statistic(data[train_idx], mode, hr_quantile)
    stat_val = _statistic(data[val_idx], mode, hr_quantile)
    return CvReport(cells=grid_eval(stat_train, stat_val, specs, grid, mode, params, fold=0))
