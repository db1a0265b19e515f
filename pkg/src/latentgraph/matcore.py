"""Dense symmetric matrix primitives used by the solvers.

Everything here operates on plain numpy arrays. Symmetry is enforced by
averaging with the transpose at construction points, because dual updates
elsewhere can introduce 1-ulp asymmetry that would otherwise leak into the
eigensolvers.
"""

from typing import NamedTuple

import numpy as np

from .exceptions import NumericalError


class EigenPair(NamedTuple):
    values: np.ndarray   # ascending
    vectors: np.ndarray  # column i pairs with values[i]


def sym(a: np.ndarray) -> np.ndarray:
    """Symmetrize by averaging with the transpose."""
    return (a + a.T) / 2.0


def check_symmetric(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Validate that `a` is a finite square symmetric matrix; return it symmetrized."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-8 * max(1.0, np.max(np.abs(a)))):
        raise ValueError(f"{name} is not symmetric")
    return sym(a)


def sym_eig(s: np.ndarray, role: str = "symmetric matrix") -> EigenPair:
    """Full eigendecomposition of a symmetric matrix, eigenvalues ascending."""
    try:
        values, vectors = np.linalg.eigh(s)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed for {role}") from exc
    return EigenPair(values, vectors)


def psd_project(s: np.ndarray) -> np.ndarray:
    """Nearest (Frobenius) positive semidefinite matrix: clip negative eigenvalues."""
    s = sym(np.asarray(s, dtype=float))
    values, vectors = sym_eig(s, role="PSD projection input")
    return sym((vectors * np.maximum(values, 0.0)) @ vectors.T)


def ones_complement_basis(d: int, flavor: str = "helmert") -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the all-ones vector.

    Returns a d x (d-1) matrix P with P^T P = I and P^T 1 = 0. The Helmert
    flavor is closed form and reproducible across platforms; the Householder
    flavor exists to check that downstream results do not depend on the basis.
    """
    if d < 2:
        raise ValueError(f"basis requires dimension >= 2, got {d}")
    if flavor == "helmert":
        p = np.zeros((d, d - 1))
        for k in range(1, d):
            c = 1.0 / np.sqrt(k * (k + 1.0))
            p[:k, k - 1] = c
            p[k, k - 1] = -k * c
        return p
    if flavor == "householder":
        # reflection mapping 1/sqrt(d) to e_1; its remaining columns span 1-perp
        u = np.full(d, 1.0 / np.sqrt(d))
        v = u - np.eye(d)[0]
        h = np.eye(d) - 2.0 * np.outer(v, v) / (v @ v)
        return h[:, 1:]
    raise ValueError(f"unknown basis flavor {flavor!r}")


def _laplacian_spectrum(theta: np.ndarray) -> np.ndarray:
    """Eigenvalues of a PSD matrix with row sums zero and rank d-1 (ascending)."""
    theta = np.asarray(theta, dtype=float)
    d = theta.shape[0]
    rowsum = np.max(np.abs(theta @ np.ones(d)))
    if rowsum >= 1e-8:
        raise ValueError(f"row sums must vanish, max |row sum| = {rowsum:.3e}")
    values, _ = sym_eig(sym(theta), role="row-sum-zero precision matrix")
    tol = 1e-10 * max(np.max(np.abs(theta)), 1e-300)
    if values[1] < tol:
        raise ValueError(
            f"singular beyond the forced zero eigenvalue (second eigenvalue {values[1]:.3e})"
        )
    return values


def pseudo_det(theta: np.ndarray) -> float:
    """Product of the nonzero eigenvalues of a rank d-1 PSD matrix."""
    values = _laplacian_spectrum(theta)
    return float(np.prod(values[1:]))


def log_pseudo_det(theta: np.ndarray) -> float:
    """Logarithm of `pseudo_det`, computed as a sum of logs."""
    values = _laplacian_spectrum(theta)
    return float(np.sum(np.log(values[1:])))


def schur_complement(m: np.ndarray, obs, hid) -> np.ndarray:
    """Schur complement M_OO - M_OH (M_HH)^-1 M_HO of the block indexed by `hid`."""
    m = np.asarray(m, dtype=float)
    d = m.shape[0]
    obs = np.asarray(obs, dtype=int)
    hid = np.asarray(hid, dtype=int)
    if np.intersect1d(obs, hid).size > 0:
        raise ValueError("observed and hidden index sets overlap")
    if np.union1d(obs, hid).size != d:
        raise ValueError("observed and hidden index sets must partition the dimension")
    m_oo = m[np.ix_(obs, obs)]
    m_oh = m[np.ix_(obs, hid)]
    m_hh = m[np.ix_(hid, hid)]
    if np.linalg.cond(m_hh) >= 1e12:
        raise ValueError("hidden block is singular or too ill-conditioned to invert")
    return sym(m_oo - m_oh @ np.linalg.solve(m_hh, m_oh.T))
