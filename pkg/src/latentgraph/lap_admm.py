"""ADMM specialized to row-sum-zero (signed Laplacian) precision targets.

The target is reparameterized as Theta = P Xi P^T with P an orthonormal basis
of the complement of the all-ones vector, so every iterate has exact row sums
zero and the pseudo-determinant becomes det(Xi). The same solver serves two
inputs: an observed sample covariance (degenerate Gaussian estimation) and
minus half an empirical variogram (extremal graphical model estimation).
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import matcore
from .exceptions import DivergenceError
from .gauss_admm import AdmmParams, b_update, _quad_eig_map
from .penalty import GolazoBounds, golazo_prox, golazo_value


@dataclass
class LaplacianResult:
    theta: np.ndarray
    A: np.ndarray
    B: np.ndarray
    xi: np.ndarray
    iterations: int
    converged: bool
    rel_chg_trace: np.ndarray = field(repr=False)
    ier_trace: np.ndarray = field(repr=False)
    objective_trace: np.ndarray = field(repr=False)

    @property
    def rel_chg(self) -> float:
        return float(self.rel_chg_trace[-1])

    @property
    def ier(self) -> float:
        return float(self.ier_trace[-1])

    @property
    def objective(self) -> float:
        return float(self.objective_trace[-1])


def xi_update(s_in, a_k, b_k, lam_k, xi_k, p, params: AdmmParams):
    """Closed-form update of the reduced block; returns (Xi_next, Theta_next, eigs)."""
    inner = matcore.sym(
        p.T @ s_in @ p
        + params.sigma * p.T @ (b_k - a_k) @ p
        - p.T @ lam_k @ p
        - params.rho * params.sigma * xi_k
    )
    v, c = matcore.sym_eig(inner, role="reduced likelihood-block update")
    x = _quad_eig_map(v, params.sigma, params.rho)
    xi_next = matcore.sym((c * x) @ c.T)
    theta_next = matcore.sym(p @ xi_next @ p.T)
    return xi_next, theta_next, x


def surrogate_loglik(theta: np.ndarray, gamma_bar: np.ndarray) -> float:
    """log pseudo-det(Theta) + tr(Theta Gamma)/2, the penalty-free fit score."""
    theta = np.asarray(theta, dtype=float)
    gamma_bar = np.asarray(gamma_bar, dtype=float)
    if theta.shape != gamma_bar.shape:
        raise ValueError("precision and variogram dimensions do not match")
    return matcore.log_pseudo_det(theta) + 0.5 * float(np.sum(theta * gamma_bar))


def solve_latent_laplacian(
    s_in: np.ndarray,
    bounds: GolazoBounds,
    params: AdmmParams,
    p: Optional[np.ndarray] = None,
    callback=None,
) -> LaplacianResult:
    """Run the Laplacian-constrained ADMM.

    Parameters
    ----------
    s_in : symmetric data input. Pass the observed sample covariance for a
        degenerate Gaussian fit, or -Gamma_bar/2 for an extremal fit.
    bounds : penalty bound matrices. The EMTP2 preset (L=0, U=inf) keeps the
        candidate off-diagonals nonpositive, i.e. a diagonally loaded Laplacian.
    params : shared ADMM hyperparameters.
    p : optional d x (d-1) orthonormal basis of the ones-complement; defaults
        to the Helmert basis. Results are basis-invariant.
    callback : optional, called as callback(iteration, theta, A, B).

    Starts from Xi = I (hence Theta equal to the centering matrix, the identity
    on the ones-complement), A = I, B = 0, dual = 0.
    """
    s = matcore.check_symmetric(s_in, name="solver input")
    d = s.shape[0]
    if bounds.dim != d:
        raise ValueError(f"bounds dimension {bounds.dim} does not match input dimension {d}")
    if p is None:
        p = matcore.ones_complement_basis(d)
    else:
        p = np.asarray(p, dtype=float)
        if p.shape != (d, d - 1):
            raise ValueError(f"basis must be {d}x{d - 1}, got {p.shape}")

    sigma, alpha = params.sigma, params.alpha
    tau, r1 = params.tau, params.r1
    psp = matcore.sym(p.T @ s @ p)

    xi = np.eye(d - 1)
    theta = matcore.sym(p @ p.T)
    a = np.eye(d)
    b = np.zeros((d, d))
    lam = np.zeros((d, d))

    rel_trace, ier_trace, obj_trace = [], [], []
    converged = False
    iterations = 0
    for k in range(params.max_iter):
        xi_next, theta_next, x = xi_update(s, a, b, lam, xi, p, params)
        lam_half = matcore.sym(lam - alpha * sigma * (theta_next - a + b))
        a_next = golazo_prox(a - lam_half / (tau * r1), bounds, 1.0 / (tau * r1))
        b_next = b_update(b, lam_half, params)
        lam_next = matcore.sym(lam_half + sigma * (a_next - a) - sigma * (b_next - b))

        rel_chg = max(
            np.linalg.norm(theta_next - theta) / (1.0 + np.linalg.norm(theta)),
            np.linalg.norm(a_next - a) / (1.0 + np.linalg.norm(a)),
            np.linalg.norm(b_next - b) / (1.0 + np.linalg.norm(b)),
        )
        ier = float(np.linalg.norm(theta_next - a_next + b_next))
        gap = theta_next - a_next + b_next
        objective = (
            -float(np.sum(np.log(x)))
            + float(np.sum(xi_next * psp))
            + golazo_value(a_next, bounds)
            + params.lambda_n * float(np.trace(b_next))
            + 0.5 * sigma * float(np.sum(gap * gap))
        )
        if not (np.isfinite(rel_chg) and np.isfinite(ier)):
            raise DivergenceError(f"non-finite iterate at iteration {k + 1}")
        rel_trace.append(rel_chg)
        ier_trace.append(ier)
        obj_trace.append(objective)

        xi, theta, a, b, lam = xi_next, theta_next, a_next, b_next, lam_next
        iterations = k + 1
        if callback is not None:
            callback(iterations, theta, a, b)
        if rel_chg < params.eps1 and ier < params.eps2:
            converged = True
            break

    return LaplacianResult(
        theta=theta,
        A=a,
        B=b,
        xi=xi,
        iterations=iterations,
        converged=converged,
        rel_chg_trace=np.asarray(rel_trace),
        ier_trace=np.asarray(ier_trace),
        objective_trace=np.asarray(obj_trace),
    )
