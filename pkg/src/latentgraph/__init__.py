"""Penalized structure learning for latent Gaussian and extremal graphical models.

The library estimates a sparse-plus-low-rank split of an observed-margin
precision matrix under flexible lower/upper bound penalties, for ordinary
Gaussian models and for Laplacian-constrained / extremal (multivariate
Pareto) models driven by empirical variograms.
"""

from .exceptions import ConfigError, DataError, DivergenceError, NumericalError
from .gauss_admm import AdmmParams, AdmmResult, gaussian_loglik, solve_latent_gaussian
from .lap_admm import LaplacianResult, solve_latent_laplacian, surrogate_loglik
from .matcore import (
    ones_complement_basis,
    pseudo_det,
    psd_project,
    schur_complement,
    sym_eig,
)
from .extremes import (
    empirical_variogram,
    gamma_to_theta,
    is_conditionally_negative_definite,
    sample_hr_pareto,
    theta_to_gamma,
)
from .penalty import GolazoBounds, PenaltySpec, compile_penalty, golazo_prox, golazo_value
from .select import (
    CvCell,
    CvReport,
    GridSpec,
    count_edges,
    estimate_rank,
    grid_eval,
    holdout_cv,
    kfold_cv,
    lambda_grid,
)
from .simgen import (
    LatentModel,
    latent_cycle_hr,
    observed_cov,
    sample_gaussian,
    two_cycle_gaussian,
)

__version__ = "0.1.0"

__all__ = [
    "AdmmParams",
    "AdmmResult",
    "ConfigError",
    "CvCell",
    "CvReport",
    "DataError",
    "DivergenceError",
    "GolazoBounds",
    "GridSpec",
    "LaplacianResult",
    "LatentModel",
    "NumericalError",
    "PenaltySpec",
    "compile_penalty",
    "count_edges",
    "empirical_variogram",
    "estimate_rank",
    "gamma_to_theta",
    "gaussian_loglik",
    "golazo_prox",
    "golazo_value",
    "grid_eval",
    "holdout_cv",
    "is_conditionally_negative_definite",
    "kfold_cv",
    "lambda_grid",
    "latent_cycle_hr",
    "observed_cov",
    "ones_complement_basis",
    "psd_project",
    "pseudo_det",
    "sample_gaussian",
    "sample_hr_pareto",
    "schur_complement",
    "solve_latent_gaussian",
    "solve_latent_laplacian",
    "surrogate_loglik",
    "sym_eig",
    "theta_to_gamma",
    "two_cycle_gaussian",
]
