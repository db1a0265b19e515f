"""Reproducible generators for the simulation studies."""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from . import matcore
from .extremes import theta_to_gamma, SeedLike


@dataclass
class LatentModel:
    """A ground-truth model on observed plus hidden variables.

    `full` is the complete concentration matrix (Gaussian case) or the
    complete row-sum-zero precision matrix (extremal case). `a_true` is its
    observed block and `b_true` the Schur subtrahend, so the observed-margin
    precision is a_true - b_true. `gamma_obs` carries the marginal variogram
    in the extremal case.
    """

    kind: str
    full: np.ndarray
    obs: np.ndarray
    hidden: np.ndarray
    a_true: np.ndarray
    b_true: np.ndarray
    edges_true: List[Tuple[int, int]]
    gamma_obs: Optional[np.ndarray] = None

    @property
    def n_obs(self) -> int:
        return len(self.obs)


def _split_blocks(full: np.ndarray, obs: np.ndarray, hidden: np.ndarray):
    a_true = full[np.ix_(obs, obs)].copy()
    f_oh = full[np.ix_(obs, hidden)]
    f_hh = full[np.ix_(hidden, hidden)]
    b_true = matcore.sym(f_oh @ np.linalg.solve(f_hh, f_oh.T))
    return a_true, b_true


def two_cycle_gaussian(
    p_per_cycle: int,
    k_diag: float = 5.0,
    k_edge: float = -2.0,
    k_hidden: Optional[float] = None,
) -> LatentModel:
    """Two disjoint observed cycles plus one hidden hub node.

    With `p_per_cycle` observed nodes per cycle the dimension is
    2*p_per_cycle + 1; the hidden node (last index) couples to every observed
    node. `k_hidden` defaults to k_diag / (2*p_per_cycle), the coupling that
    keeps the default matrix diagonally dominant.
    """
    if p_per_cycle < 3:
        raise ValueError("a cycle needs at least 3 nodes")
    p = 2 * p_per_cycle
    d = p + 1
    if k_hidden is None:
        k_hidden = k_diag / p
    k = np.zeros((d, d))
    np.fill_diagonal(k, k_diag)
    edges = []
    for c in range(2):
        base = c * p_per_cycle
        for i in range(p_per_cycle):
            a = base + i
            b = base + (i + 1) % p_per_cycle
            k[a, b] = k[b, a] = k_edge
            edges.append((min(a, b), max(a, b)))
    k[:p, p] = k[p, :p] = k_hidden
    min_eig = float(np.linalg.eigvalsh(k)[0])
    if min_eig <= 0:
        raise ValueError(f"generated concentration matrix is not PD (min eigenvalue {min_eig:.3e})")
    obs = np.arange(p)
    hidden = np.array([p])
    a_true, b_true = _split_blocks(k, obs, hidden)
    return LatentModel(
        kind="gaussian",
        full=k,
        obs=obs,
        hidden=hidden,
        a_true=a_true,
        b_true=b_true,
        edges_true=sorted(set(edges)),
    )


def latent_cycle_hr(p: int, h: int, seed: SeedLike = None) -> LatentModel:
    """Observed cycle with round-robin attachments to `h` hidden nodes.

    Cycle edges get weight 2; observed node i attaches to hidden node
    p + (i mod h) with a weight drawn uniformly from
    [50/sqrt(p/h), 75/sqrt(p/h)]. The full precision matrix is the graph
    Laplacian, and `gamma_obs` is the observed block of its variogram.
    """
    if p < 3:
        raise ValueError("the observed cycle needs at least 3 nodes")
    if not 1 <= h < p:
        raise ValueError("hidden count must satisfy 1 <= h < p")
    rng = np.random.default_rng(seed)
    d = p + h
    w = np.zeros((d, d))
    edges = []
    for i in range(p):
        j = (i + 1) % p
        w[i, j] = w[j, i] = 2.0
        edges.append((min(i, j), max(i, j)))
    lo = 50.0 / np.sqrt(p / h)
    hi = 75.0 / np.sqrt(p / h)
    hidden_weights = rng.uniform(lo, hi, size=p)
    for i in range(p):
        j = p + (i % h)
        w[i, j] = w[j, i] = hidden_weights[i]
    theta = np.diag(w.sum(axis=1)) - w
    obs = np.arange(p)
    hidden = np.arange(p, d)
    a_true, b_true = _split_blocks(theta, obs, hidden)
    gamma_full = theta_to_gamma(theta)
    return LatentModel(
        kind="hr",
        full=theta,
        obs=obs,
        hidden=hidden,
        a_true=a_true,
        b_true=b_true,
        edges_true=sorted(set(edges)),
        gamma_obs=gamma_full[np.ix_(obs, obs)].copy(),
    )


def sample_gaussian(k: np.ndarray, n: int, seed: SeedLike = None) -> np.ndarray:
    """n i.i.d. centered Gaussian rows with concentration matrix `k`."""
    k = np.asarray(k, dtype=float)
    if n < 1:
        raise ValueError("sample count must be at least 1")
    if np.linalg.eigvalsh(k)[0] <= 0:
        raise ValueError("concentration matrix must be positive definite")
    rng = np.random.default_rng(seed)
    cov = np.linalg.inv(k)
    chol = np.linalg.cholesky(matcore.sym(cov))
    z = rng.standard_normal((n, k.shape[0]))
    return z @ chol.T


def observed_cov(x: np.ndarray, obs=None) -> np.ndarray:
    """Gram matrix X'X / n of the observed columns; no mean subtraction."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError(f"sample block must be a nonempty 2-d array, got shape {x.shape}")
    if obs is not None:
        x = x[:, np.asarray(obs, dtype=int)]
    return matcore.sym(x.T @ x / x.shape[0])


def spawn_seeds(seed, count: int):
    """Independent child seeds for parallel or repeated trials."""
    return np.random.SeedSequence(seed).spawn(count)
