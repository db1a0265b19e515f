"""Extreme-value pipeline: variogram estimation, variogram/precision
transforms, and a multivariate Pareto sampler for simulation studies.

The variogram matrix Gamma (zero diagonal, symmetric, conditionally negative
definite) and the row-sum-zero precision matrix Theta are two parameterizations
of the same model, linked through a bordered-matrix inverse. The empirical
estimator is rank-based and therefore invariant to strictly monotone marginal
transformations.
"""

from typing import NamedTuple, Optional, Union

import numpy as np
from scipy.stats import rankdata

from . import matcore
from .exceptions import DataError

SeedLike = Optional[Union[int, np.random.Generator]]


def check_variogram(gamma: np.ndarray) -> np.ndarray:
    """Validate symmetry, zero diagonal and nonnegativity; return as float array."""
    gamma = np.asarray(gamma, dtype=float)
    if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1]:
        raise ValueError(f"variogram must be square, got shape {gamma.shape}")
    if not np.all(np.isfinite(gamma)):
        raise ValueError("variogram contains non-finite entries")
    if not np.allclose(gamma, gamma.T, rtol=0.0, atol=1e-10 * max(1.0, np.max(np.abs(gamma)))):
        raise ValueError("variogram is not symmetric")
    if np.max(np.abs(np.diag(gamma))) > 0:
        raise ValueError("variogram diagonal must be zero")
    if np.any(gamma < 0):
        raise ValueError("variogram entries must be nonnegative")
    return matcore.sym(gamma)


def is_conditionally_negative_definite(gamma: np.ndarray) -> bool:
    """True when v' Gamma v < 0 for every v orthogonal to the ones vector."""
    gamma = np.asarray(gamma, dtype=float)
    p = matcore.ones_complement_basis(gamma.shape[0])
    top = np.linalg.eigvalsh(matcore.sym(p.T @ gamma @ p))[-1]
    return bool(top < 0)


def empirical_variogram(x: np.ndarray, k: int) -> np.ndarray:
    """Rank-based variogram estimate from an n x d sample block.

    Each column is mapped through its empirical distribution function with
    denominator n+1 (keeping log(1 - F) finite; ties get average ranks). For
    every anchor coordinate m, the rows whose m-th rank transform reaches the
    1 - k/n level are kept and the sample variance (unbiased divisor) of each
    log-transform difference is taken; the result averages over anchors.

    The estimate is symmetric, zero-diagonal and nonnegative but need not be
    conditionally negative definite at small sample sizes; check separately
    with `is_conditionally_negative_definite` where that matters.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise DataError(f"sample block must be 2-dimensional, got shape {x.shape}")
    n, d = x.shape
    if d < 2:
        raise DataError("variogram estimation needs at least 2 columns")
    if not 2 <= k <= n:
        raise DataError(f"effective sample size k must lie in [2, {n}], got {k}")
    if not np.all(np.isfinite(x)):
        raise DataError("sample block contains non-finite entries")

    cdf = np.column_stack([rankdata(x[:, j], method="average") for j in range(d)]) / (n + 1.0)
    z = np.log1p(-cdf)
    level = 1.0 - k / n
    acc = np.zeros((d, d))
    for m in range(d):
        sel = cdf[:, m] >= level
        count = int(np.count_nonzero(sel))
        if count < 2:
            raise DataError(
                f"insufficient exceedances for coordinate {m}: {count} rows at k={k}"
            )
        cov = np.atleast_2d(np.cov(z[sel], rowvar=False, ddof=1))
        dg = np.diag(cov)
        acc += dg[:, None] + dg[None, :] - 2.0 * cov
    gamma = matcore.sym(acc / d)
    np.fill_diagonal(gamma, 0.0)
    return gamma


class BorderedInverse(NamedTuple):
    theta: np.ndarray
    p: np.ndarray
    sigma2: float


def fiedler_bapat(gamma: np.ndarray) -> BorderedInverse:
    """Invert [[-Gamma/2, 1], [1', 0]]; the leading block is the precision Theta."""
    gamma = check_variogram(gamma)
    d = gamma.shape[0]
    bordered = np.zeros((d + 1, d + 1))
    bordered[:d, :d] = -gamma / 2.0
    bordered[:d, d] = 1.0
    bordered[d, :d] = 1.0
    try:
        inv = np.linalg.solve(bordered, np.eye(d + 1))
    except np.linalg.LinAlgError as exc:
        raise ValueError(
            "bordered variogram matrix is singular; the variogram is not "
            "strictly conditionally negative definite"
        ) from exc
    theta = matcore.sym(inv[:d, :d])
    return BorderedInverse(theta=theta, p=inv[:d, d].copy(), sigma2=float(inv[d, d]))


def gamma_to_theta(gamma: np.ndarray) -> np.ndarray:
    """Row-sum-zero precision matrix of the model with variogram `gamma`."""
    return fiedler_bapat(gamma).theta


def theta_to_gamma(theta: np.ndarray) -> np.ndarray:
    """Variogram of the model with precision `theta` via its pseudoinverse."""
    theta = np.asarray(theta, dtype=float)
    values = matcore._laplacian_spectrum(theta)  # validates row sums and rank
    _, vectors = matcore.sym_eig(matcore.sym(theta), role="precision matrix")
    pinv = (vectors[:, 1:] / values[1:]) @ vectors[:, 1:].T
    dg = np.diag(pinv)
    gamma = dg[:, None] + dg[None, :] - 2.0 * pinv
    gamma = matcore.sym(gamma)
    np.fill_diagonal(gamma, 0.0)
    return gamma


def _increment_factors(gamma: np.ndarray):
    """Per-anchor mean vectors and covariance factors of the log-scale increments."""
    d = gamma.shape[0]
    means, factors = [], []
    for m in range(d):
        idx = np.array([i for i in range(d) if i != m])
        gm = gamma[np.ix_(idx, [m])].ravel()
        cov = (gm[:, None] + gm[None, :] - gamma[np.ix_(idx, idx)]) / 2.0
        values, vectors = matcore.sym_eig(matcore.sym(cov), role="increment covariance")
        if values[0] < -1e-8 * max(1.0, abs(values[-1])):
            raise ValueError(
                f"increment covariance for anchor {m} is not positive semidefinite; "
                "the variogram is invalid"
            )
        factors.append(vectors * np.sqrt(np.clip(values, 0.0, None)))
        means.append(-gm / 2.0)
    return means, factors


def sample_hr_pareto(gamma: np.ndarray, n: int, seed: SeedLike = None) -> np.ndarray:
    """Draw n rows of the multivariate Pareto vector with variogram `gamma`.

    Uses the one-component construction: pick an anchor coordinate uniformly,
    set it to a standard exponential, add Gaussian increments with mean
    -Gamma_.m / 2 and covariance (Gamma_im + Gamma_jm - Gamma_ij) / 2, and
    accept each proposal with probability 1 / #(positive coordinates), which
    corrects the anchor mixture to the target restricted to its support.
    Every returned row has at least one positive coordinate.
    """
    gamma = check_variogram(gamma)
    if n < 1:
        raise ValueError("sample count must be at least 1")
    d = gamma.shape[0]
    rng = np.random.default_rng(seed)
    means, factors = _increment_factors(gamma)
    offdiag = [np.array([i for i in range(d) if i != m]) for m in range(d)]

    out = np.empty((n, d))
    filled = 0
    while filled < n:
        batch = max(2 * (n - filled), 64)
        anchors = rng.integers(0, d, size=batch)
        expo = rng.standard_exponential(batch)
        normals = rng.standard_normal((batch, d - 1))
        unif = rng.random(batch)
        y = np.empty((batch, d))
        for m in range(d):
            rows = anchors == m
            if not np.any(rows):
                continue
            y[np.ix_(rows, offdiag[m])] = means[m] + normals[rows] @ factors[m].T
            y[rows, m] = 0.0
        y += expo[:, None]
        npos = np.count_nonzero(y > 0, axis=1)
        accept = unif < 1.0 / npos
        took = y[accept]
        take = min(len(took), n - filled)
        out[filled:filled + take] = took[:take]
        filled += take
    return out
