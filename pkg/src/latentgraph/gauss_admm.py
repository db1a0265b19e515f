"""Multi-block ADMM for latent Gaussian precision estimation.

Solves

    min  -log det M + tr(M S) + ||A||_LU + lambda_n tr(B)
    s.t. M = A - B,  M > 0,  B >= 0

by alternating closed-form updates of M (eigenvalue quadratic), A (penalty
prox) and B (trace-shrunk PSD projection), with two dual updates per sweep.
"""

from dataclasses import dataclass, field

import numpy as np

from . import matcore
from .exceptions import DivergenceError
from .penalty import GolazoBounds, golazo_prox, golazo_value


@dataclass(frozen=True)
class AdmmParams:
    """Solver hyperparameters.

    The derived step sizes tau = varsigma*(2+alpha)/2 and r1 = r2 =
    varsigma*sigma satisfy the sufficient convergence conditions
    tau > (2+alpha)/2 and r1, r2 > sigma whenever varsigma > 1.
    """

    lambda_n: float
    sigma: float = 1.0
    alpha: float = 1.0
    varsigma: float = 1.01
    rho: float = 0.0
    eps1: float = 1e-5
    eps2: float = 1e-5
    max_iter: int = 10000

    def __post_init__(self):
        if self.lambda_n < 0:
            raise ValueError("lambda_n must be nonnegative")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if not 0 < self.alpha < 2:
            raise ValueError("alpha must lie in (0, 2)")
        if self.varsigma <= 1:
            raise ValueError("varsigma must exceed 1")
        if self.rho < 0:
            raise ValueError("rho must be nonnegative")
        if self.eps1 < 0 or self.eps2 < 0:
            raise ValueError("tolerances must be nonnegative")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")

    @property
    def tau(self) -> float:
        return self.varsigma * (2.0 + self.alpha) / 2.0

    @property
    def r1(self) -> float:
        return self.varsigma * self.sigma

    @property
    def r2(self) -> float:
        return self.varsigma * self.sigma


@dataclass
class AdmmResult:
    M: np.ndarray
    A: np.ndarray
    B: np.ndarray
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


def gaussian_loglik(k: np.ndarray, s: np.ndarray) -> float:
    """log det(K) - tr(K S) for positive definite K."""
    k = np.asarray(k, dtype=float)
    s = np.asarray(s, dtype=float)
    sign, logdet = np.linalg.slogdet(k)
    if sign <= 0 or not np.isfinite(logdet):
        raise ValueError("concentration matrix is not positive definite")
    return float(logdet - np.sum(k * s))


def _quad_eig_map(v: np.ndarray, sigma: float, rho: float) -> np.ndarray:
    """Positive root of (rho+1) sigma x^2 + v x - 1 = 0, elementwise.

    Uses the conjugate form for positive v to avoid cancellation.
    """
    c = 4.0 * (rho + 1.0) * sigma
    s = np.sqrt(v * v + c)
    return np.where(v > 0, 2.0 / (v + s), (s - v) / (2.0 * (rho + 1.0) * sigma))


def m_update(s, a_k, b_k, lam_k, m_k, params: AdmmParams):
    """Closed-form likelihood-block update; returns (M_next, eigenvalues of M_next)."""
    inner = matcore.sym(s + params.sigma * (b_k - a_k) - lam_k - params.rho * params.sigma * m_k)
    v, c = matcore.sym_eig(inner, role="likelihood-block update")
    x = _quad_eig_map(v, params.sigma, params.rho)
    return matcore.sym((c * x) @ c.T), x


def b_update(b_k, lam_half, params: AdmmParams) -> np.ndarray:
    """Trace-shrunk PSD projection of the low-rank block."""
    d = b_k.shape[0]
    target = b_k + (lam_half - params.lambda_n * np.eye(d)) / (params.tau * params.r2)
    return matcore.psd_project(target)


def solve_latent_gaussian(
    s_oo: np.ndarray,
    bounds: GolazoBounds,
    params: AdmmParams,
    callback=None,
) -> AdmmResult:
    """Run the ADMM to convergence or `params.max_iter` sweeps.

    Parameters
    ----------
    s_oo : observed sample covariance, symmetric PSD.
    bounds : penalty bound matrices matching the dimension of `s_oo`.
    params : solver hyperparameters; `lambda_n` scales the trace penalty.
    callback : optional, called as callback(iteration, M, A, B) after each sweep.

    The run starts from M = A = I, B = 0, dual = 0 and stops once the maximum
    relative iterate change drops below eps1 and the infeasibility
    ||M - A + B||_F drops below eps2.
    """
    s = matcore.check_symmetric(s_oo, name="sample covariance")
    d = s.shape[0]
    if bounds.dim != d:
        raise ValueError(f"bounds dimension {bounds.dim} does not match input dimension {d}")
    if np.linalg.eigvalsh(s)[0] < -1e-8 * max(1.0, np.max(np.abs(s))):
        raise ValueError("sample covariance must be positive semidefinite")

    sigma, alpha = params.sigma, params.alpha
    tau, r1 = params.tau, params.r1
    eye = np.eye(d)
    m = eye.copy()
    a = eye.copy()
    b = np.zeros((d, d))
    lam = np.zeros((d, d))

    rel_trace, ier_trace, obj_trace = [], [], []
    converged = False
    iterations = 0
    for k in range(params.max_iter):
        m_next, x = m_update(s, a, b, lam, m, params)
        lam_half = matcore.sym(lam - alpha * sigma * (m_next - a + b))
        a_next = golazo_prox(a - lam_half / (tau * r1), bounds, 1.0 / (tau * r1))
        b_next = b_update(b, lam_half, params)
        lam_next = matcore.sym(lam_half + sigma * (a_next - a) - sigma * (b_next - b))

        rel_chg = max(
            np.linalg.norm(m_next - m) / (1.0 + np.linalg.norm(m)),
            np.linalg.norm(a_next - a) / (1.0 + np.linalg.norm(a)),
            np.linalg.norm(b_next - b) / (1.0 + np.linalg.norm(b)),
        )
        ier = float(np.linalg.norm(m_next - a_next + b_next))
        gap = m_next - a_next + b_next
        objective = (
            -float(np.sum(np.log(x)))
            + float(np.sum(m_next * s))
            + golazo_value(a_next, bounds)
            + params.lambda_n * float(np.trace(b_next))
            + 0.5 * sigma * float(np.sum(gap * gap))
        )
        if not (np.isfinite(rel_chg) and np.isfinite(ier)):
            raise DivergenceError(f"non-finite iterate at iteration {k + 1}")
        rel_trace.append(rel_chg)
        ier_trace.append(ier)
        obj_trace.append(objective)

        m, a, b, lam = m_next, a_next, b_next, lam_next
        iterations = k + 1
        if callback is not None:
            callback(iterations, m, a, b)
        if rel_chg < params.eps1 and ier < params.eps2:
            converged = True
            break

    return AdmmResult(
        M=m,
        A=a,
        B=b,
        iterations=iterations,
        converged=converged,
        rel_chg_trace=np.asarray(rel_trace),
        ier_trace=np.asarray(ier_trace),
        objective_trace=np.asarray(obj_trace),
    )
