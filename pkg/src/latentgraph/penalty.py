"""Flexible bound penalty on symmetric matrices.

The penalty of a matrix K under bound matrices (L, U) with L <= 0 <= U is

    sum_ij max{ L_ij * K_ij, U_ij * K_ij }

under the convention 0 * (+-inf) = 0. Infinite bounds turn soft penalties
into hard sign or zero constraints, which the proximal operator enforces
exactly. Presets cover the usual cases: symmetric lasso, adaptive weights,
positive lasso, MTP2 / EMTP2 positivity, positivity plus sparsity, and
predetermined zero patterns.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

PENALTY_KINDS = (
    "lasso",
    "asymmetric",
    "positive_lasso",
    "mtp2",
    "sparse_positive",
    "zero_pattern",
    "custom",
)


@dataclass(frozen=True)
class GolazoBounds:
    """Bound matrices defining the penalty. Entries may be +-inf, never NaN."""

    L: np.ndarray
    U: np.ndarray

    def __post_init__(self):
        L = np.asarray(self.L, dtype=float)
        U = np.asarray(self.U, dtype=float)
        if L.ndim != 2 or L.shape[0] != L.shape[1] or L.shape != U.shape:
            raise ValueError(f"bound matrices must be square and matching, got {L.shape} / {U.shape}")
        if np.any(np.isnan(L)) or np.any(np.isnan(U)):
            raise ValueError("bound matrices contain NaN")
        if not (np.array_equal(L, L.T) and np.array_equal(U, U.T)):
            raise ValueError("bound matrices must be symmetric")
        if np.any(L > 0) or np.any(U < 0):
            raise ValueError("bounds must satisfy L <= 0 <= U entrywise")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "U", U)

    @property
    def dim(self) -> int:
        return self.L.shape[0]


@dataclass(frozen=True)
class PenaltySpec:
    """Declarative penalty preset, compiled into `GolazoBounds`.

    `zero_edges` is only valid for kinds zero_pattern / custom, `weights`
    only for asymmetric, and explicit (L, U) only for custom. `base` names
    the preset a zero pattern is layered on.
    """

    kind: str
    zero_edges: Optional[Sequence[Tuple[int, int]]] = None
    weights: Optional[np.ndarray] = None
    base: str = "lasso"
    L: Optional[np.ndarray] = None
    U: Optional[np.ndarray] = None
    label: str = field(default="")

    def __post_init__(self):
        if self.kind not in PENALTY_KINDS:
            raise ValueError(f"unknown penalty kind {self.kind!r}")
        if self.zero_edges is not None and self.kind not in ("zero_pattern", "custom"):
            raise ValueError("zero_edges is only valid with zero_pattern or custom kinds")
        if self.weights is not None and self.kind != "asymmetric":
            raise ValueError("weights are only valid with the asymmetric kind")
        if self.kind == "zero_pattern" and self.base in ("zero_pattern", "custom"):
            raise ValueError("zero_pattern must be layered on a plain preset")
        if not self.label:
            object.__setattr__(self, "label", self.kind)


def golazo_value(k: np.ndarray, bounds: GolazoBounds) -> float:
    """Penalty value of K; +inf exactly when an infinite bound is violated."""
    k = np.asarray(k, dtype=float)
    if k.shape != bounds.L.shape:
        raise ValueError(f"dimension mismatch: K {k.shape}, bounds {bounds.L.shape}")
    with np.errstate(invalid="ignore"):
        term = np.maximum(bounds.L * k, bounds.U * k)
    # 0 * inf produced NaN exactly where K_ij == 0; the convention makes it 0
    term = np.where(k == 0.0, 0.0, term)
    return float(np.sum(term))


def golazo_prox(z: np.ndarray, bounds: GolazoBounds, t: float) -> np.ndarray:
    """Proximal map of t * penalty at z, entrywise.

    result_ij = min{z_ij - t L_ij, 0} + max{z_ij - t U_ij, 0}

    An infinite L makes the min term 0 and an infinite U makes the max term 0
    (IEEE arithmetic does this without special cases), so entries with one-sided
    infinite bounds land exactly on the feasible side and entries with both
    bounds infinite are exactly zero. With L = -lam, U = lam this is
    soft-thresholding at level t*lam.
    """
    if t <= 0:
        raise ValueError(f"prox step must be positive, got {t}")
    z = np.asarray(z, dtype=float)
    if z.shape != bounds.L.shape:
        raise ValueError(f"dimension mismatch: z {z.shape}, bounds {bounds.L.shape}")
    return np.minimum(z - t * bounds.L, 0.0) + np.maximum(z - t * bounds.U, 0.0)


def _offdiag_fill(d: int, lo: float, hi: float) -> Tuple[np.ndarray, np.ndarray]:
    L = np.full((d, d), lo)
    U = np.full((d, d), hi)
    np.fill_diagonal(L, 0.0)
    np.fill_diagonal(U, 0.0)
    return L, U


def compile_penalty(spec: PenaltySpec, dim: int, lam: float, gamma: float) -> GolazoBounds:
    """Compile a preset into bound matrices at penalty level lam * gamma.

    The diagonal is left unpenalized by every preset; callers wanting a
    penalized diagonal can construct `GolazoBounds` directly.
    """
    if lam < 0 or gamma < 0:
        raise ValueError("penalty scales must be nonnegative")
    scale = lam * gamma
    kind = spec.kind
    if kind == "lasso":
        L, U = _offdiag_fill(dim, -scale, scale)
    elif kind == "positive_lasso":
        L, U = _offdiag_fill(dim, 0.0, scale)
    elif kind == "mtp2":
        L, U = _offdiag_fill(dim, 0.0, np.inf)
    elif kind == "sparse_positive":
        L, U = _offdiag_fill(dim, -scale, np.inf)
    elif kind == "asymmetric":
        if spec.weights is None:
            raise ValueError("asymmetric kind requires a weight matrix")
        w = np.asarray(spec.weights, dtype=float)
        if w.shape != (dim, dim):
            raise ValueError(f"weight matrix must be {dim}x{dim}, got {w.shape}")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        w = (w + w.T) / 2.0
        L = -scale * w
        U = scale * w
        np.fill_diagonal(L, 0.0)
        np.fill_diagonal(U, 0.0)
    elif kind == "zero_pattern":
        base = PenaltySpec(kind=spec.base)
        bounds = compile_penalty(base, dim, lam, gamma)
        L = bounds.L.copy()
        U = bounds.U.copy()
        for i, j in spec.zero_edges or ():
            if not (0 <= i < dim and 0 <= j < dim) or i == j:
                raise ValueError(f"zero edge ({i}, {j}) out of range for dimension {dim}")
            L[i, j] = L[j, i] = -np.inf
            U[i, j] = U[j, i] = np.inf
    elif kind == "custom":
        if spec.L is None or spec.U is None:
            raise ValueError("custom kind requires explicit L and U matrices")
        L = np.asarray(spec.L, dtype=float).copy()
        U = np.asarray(spec.U, dtype=float).copy()
        if L.shape != (dim, dim):
            raise ValueError(f"custom bounds must be {dim}x{dim}, got {L.shape}")
        for i, j in spec.zero_edges or ():
            if not (0 <= i < dim and 0 <= j < dim) or i == j:
                raise ValueError(f"zero edge ({i}, {j}) out of range for dimension {dim}")
            L[i, j] = L[j, i] = -np.inf
            U[i, j] = U[j, i] = np.inf
    else:  # pragma: no cover - guarded by PenaltySpec
        raise ValueError(f"unknown penalty kind {kind!r}")
    return GolazoBounds(L=L, U=U)
