"""Quadratic penalties on spline coordinates.

The curvature energy of a C^2 cubic spline is a quadratic form in its second
derivative vector, J2(u) = sum_i (h_i/3)(u_i^2 + u_i u_{i+1} + u_{i+1}^2),
because s'' is piecewise linear.  Composing with the coordinate-to-u map U
gives the (n+3)x(n+3) curvature matrix C.  More general penalties
int |a2 s'' + a1 s' + a0 s|^2 are assembled from the Gram matrices of the
basis functions and their derivatives; those integrals are evaluated in
closed form, interval by interval, since every integrand is a polynomial of
degree at most six in the local variable x = t - t_i.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve as sym_solve

from .basis import BasisMatrices, build_basis
from .core import KnotGrid
from .errors import (
    AllCoefficientsZero,
    InconsistentConstraint,
    InvalidDerivativeOrder,
    OverlappingNullspaces,
    ShapeMismatch,
)


@dataclass(frozen=True)
class PenaltyMatrix:
    """Symmetric non-negative penalty with its measured null-space dimension."""

    M: np.ndarray
    nullspace_dim: int
    kind: str


@dataclass(frozen=True)
class LinearTrend:
    """Design matrix of the affine model and the orthogonal projector onto it."""

    L: np.ndarray           # (n+1) x 2, columns (1, t)
    projector: np.ndarray   # (n+1) x (n+1)


def _numerical_nullity(M: np.ndarray) -> int:
    # Spectral rank rule: eigenvalues below dim * eps * lambda_max count as zero.
    w = np.linalg.eigvalsh(M)
    lam_max = max(float(w[-1]), 0.0)
    tau = M.shape[0] * np.finfo(np.float64).eps * lam_max
    return int(np.sum(w <= tau))


def j2(grid: KnotGrid, u) -> float:
    """Curvature energy of the piecewise-linear second derivative u."""
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 1 or u.size != grid.npoints:
        raise ShapeMismatch(f"u has length {u.size}, expected {grid.npoints}")
    h = grid.spacings
    a, b = u[:-1], u[1:]
    return float(np.sum(h / 3.0 * (a * a + a * b + b * b)))


def build_C(grid: KnotGrid, basis: BasisMatrices | None = None) -> PenaltyMatrix:
    """Curvature matrix C: x^T C x = J2(U x) for every coordinate vector x.

    Accumulated per interval from pairs of adjacent U rows, so the identity
    holds on arbitrary (non-uniform) grids.
    """
    if basis is None:
        basis = build_basis(grid)
    h = grid.spacings
    W1, W2 = basis.U[:-1], basis.U[1:]
    C = (W1.T @ ((h / 3.0)[:, None] * W1)
         + W2.T @ ((h / 3.0)[:, None] * W2)
         + W1.T @ ((h / 6.0)[:, None] * W2)
         + W2.T @ ((h / 6.0)[:, None] * W1))
    C = 0.5 * (C + C.T)
    return PenaltyMatrix(M=C, nullspace_dim=_numerical_nullity(C), kind="curvature")


def _local_poly(grid: KnotGrid, basis: BasisMatrices) -> np.ndarray:
    """Coefficient tensor a[l, i, p]: basis function l restricted to interval i
    is sum_p a[l,i,p] x^p in the local variable x = t - t_i."""
    n = grid.n
    m = n + 3
    a = np.zeros((m, n, 4))
    a[np.arange(1, n + 1), np.arange(n), 0] = 1.0   # cardinal values at left knots
    a[:, :, 1] = basis.Q.T
    a[:, :, 2] = basis.U[:-1].T / 2.0
    a[:, :, 3] = basis.V.T / 6.0
    return a


def _derive(a: np.ndarray, r: int) -> np.ndarray:
    # d^r/dx^r of sum_p a[..., p] x^p, coefficients again low-to-high.
    for _ in range(r):
        a = a[..., 1:] * np.arange(1, a.shape[-1])
    return a


def build_gram(grid: KnotGrid, basis: BasisMatrices | None, r: int, s: int) -> np.ndarray:
    """Gram matrix of int phi_l^(r) phi_k^(s) over the grid, exactly.

    Each product is a polynomial of degree <= 6 per interval; the integral of
    x^d over [0, h_i] is h_i^{d+1}/(d+1), so the entries are finite coefficient
    convolutions (no quadrature).  For r > s the transpose of (s, r) is
    returned.
    """
    if r not in (0, 1, 2) or s not in (0, 1, 2):
        raise InvalidDerivativeOrder(f"derivative orders must be 0..2, got ({r}, {s})")
    if r > s:
        return build_gram(grid, basis, s, r).T
    if basis is None:
        basis = build_basis(grid)
    h = grid.spacings
    a = _local_poly(grid, basis)
    dr = _derive(a, r)
    ds = _derive(a, s)
    m = grid.n + 3
    G = np.zeros((m, m))
    for p1 in range(dr.shape[-1]):
        for p2 in range(ds.shape[-1]):
            d = p1 + p2
            w = h ** (d + 1) / (d + 1)
            G += np.einsum("li,i,ki->lk", dr[:, :, p1], w, ds[:, :, p2])
    return G


def build_Ppen(grid: KnotGrid, basis: BasisMatrices | None,
               a0: float, a1: float, a2: float) -> PenaltyMatrix:
    """Penalty matrix of int |a2 s'' + a1 s' + a0 s|^2 as a coordinate form."""
    if a0 == 0.0 and a1 == 0.0 and a2 == 0.0:
        raise AllCoefficientsZero("at least one of a0, a1, a2 must be nonzero")
    if basis is None:
        basis = build_basis(grid)
    G = {}
    for i in range(3):
        for j in range(i, 3):
            G[i, j] = build_gram(grid, basis, i, j)
    coef = (a0, a1, a2)
    P = sum(coef[i] ** 2 * G[i, i] for i in range(3))
    for i in range(3):
        for j in range(i + 1, 3):
            P = P + coef[i] * coef[j] * (G[i, j] + G[i, j].T)
    P = 0.5 * (P + P.T)
    return PenaltyMatrix(M=P, nullspace_dim=_numerical_nullity(P),
                         kind=f"combined({a0},{a1},{a2})")


def solve_constrained_quadratic(M: np.ndarray, A: np.ndarray, c) -> tuple[np.ndarray, np.ndarray]:
    """Minimize x^T M x subject to A x = c.

    Solves the stationarity system M x = A^T l, A x = c through the symmetric
    indefinite KKT matrix.  Requires N(A) and N(M) to meet only at zero.
    """
    M = np.asarray(M, dtype=np.float64)
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    c = np.atleast_1d(np.asarray(c, dtype=np.float64))
    m = M.shape[0]
    k = A.shape[0]
    if M.shape != (m, m) or A.shape[1] != m or c.size != k:
        raise ShapeMismatch("M, A, c shapes are inconsistent")
    if np.linalg.matrix_rank(np.vstack([M, A])) < m:
        raise OverlappingNullspaces("null spaces of M and A overlap")
    rank_a = np.linalg.matrix_rank(A)
    if rank_a < k and np.linalg.matrix_rank(np.hstack([A, c[:, None]])) > rank_a:
        raise InconsistentConstraint("c is not in the range of A")
    kkt = np.zeros((m + k, m + k))
    kkt[:m, :m] = M
    kkt[:m, m:] = A.T
    kkt[m:, :m] = A
    rhs = np.concatenate([np.zeros(m), c])
    try:
        sol = sym_solve(kkt, rhs, assume_a="sym")
    except np.linalg.LinAlgError:
        sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
    # KKT was assembled with +A^T, so the stored multiplier is -l.
    return sol[:m], -sol[m:]


def linear_trend(grid: KnotGrid) -> LinearTrend:
    """Affine design L = (1, t) with its orthogonal projector L(L^T L)^{-1} L^T."""
    L = np.column_stack([np.ones(grid.npoints), grid.knots])
    Qm, _ = np.linalg.qr(L)
    return LinearTrend(L=L, projector=Qm @ Qm.T)
