"""Penalized spline estimators and their hat matrices.

For the curvature penalty the minimizer of lam * x^T C x + ||p - y||^2 is a
natural spline: the boundary curvatures vanish and the knot values solve
(I + lam * K) p = y, with K the middle (n+1)x(n+1) block of C.  The inverse
H(lam) = (I + lam K)^{-1} is the hat matrix.  A general symmetric non-negative
penalty P yields fitted coordinates (lam P + Pi^T Pi)^{-1} (0, y, 0), which is
generally *not* natural; its small-lam limit interpolates y with boundary
curvatures solving a 2x2 corner system, and its large-lam limit is least
squares over the null space of P.
"""

from dataclasses import dataclass

import numpy as np

from .basis import build_basis, coefficients_for
from .core import KnotGrid, NaturalCoordinates, Observations, SplineCoefficients
from .errors import EmptyNullspace, NegativeLambda, NonPositiveLambda, SingularCorner
from .penalty import PenaltyMatrix, build_C, linear_trend


@dataclass(frozen=True)
class HatMatrix:
    """Symmetric smoother matrix mapping observations to fitted knot values."""

    H: np.ndarray
    lam: float


@dataclass(frozen=True)
class SmoothFit:
    coords: NaturalCoordinates
    lam: float
    rss: float
    fitted_coeffs: SplineCoefficients


def _middle_block(C: PenaltyMatrix) -> np.ndarray:
    return C.M[1:-1, 1:-1]


def _solve_natural(K: np.ndarray, lam: float, rhs: np.ndarray) -> np.ndarray:
    """Apply (I + lam K)^{-1} through the eigendecomposition of K.

    K is non-negative with an exact affine null space; eigenvalues below the
    spectral roundoff threshold are therefore zeroed, which keeps the route
    accurate for arbitrarily large lam (a direct factorization of I + lam K
    has condition ~ lam * mu_max and loses several digits already at 1e8).
    """
    mu, V = np.linalg.eigh(K)
    tau = K.shape[0] * np.finfo(np.float64).eps * max(float(mu[-1]), 0.0)
    mu = np.where(mu <= tau, 0.0, mu)
    f = 1.0 / (1.0 + lam * mu)
    z = V.T @ rhs
    return V @ (f[:, None] * z if z.ndim == 2 else f * z)


def hat_matrix(grid: KnotGrid, C: PenaltyMatrix, lam: float) -> HatMatrix:
    """H(lam) = (I + lam * C_middle)^{-1}; exactly the identity at lam = 0."""
    if lam < 0:
        raise NegativeLambda(f"lambda must be >= 0, got {lam!r}")
    K = _middle_block(C)
    if lam == 0.0:
        return HatMatrix(H=np.eye(K.shape[0]), lam=0.0)
    H = _solve_natural(K, lam, np.eye(K.shape[0]))
    return HatMatrix(H=0.5 * (H + H.T), lam=float(lam))


def smooth_natural(obs: Observations, lam: float) -> SmoothFit:
    """Curvature-penalized fit; solves against y directly, never forming H."""
    if lam < 0:
        raise NegativeLambda(f"lambda must be >= 0, got {lam!r}")
    grid = obs.grid
    basis = build_basis(grid)
    if lam == 0.0:
        p_hat = obs.y.copy()
    else:
        K = _middle_block(build_C(grid, basis))
        p_hat = _solve_natural(K, lam, obs.y)
    coords = NaturalCoordinates(u_first=0.0, values=p_hat, u_last=0.0)
    rss = float(np.sum((obs.y - p_hat) ** 2))
    return SmoothFit(coords=coords, lam=float(lam), rss=rss,
                     fitted_coeffs=coefficients_for(grid, coords, basis=basis))


def decompose_fit(obs: Observations, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Split the fit into the affine regression part and the penalized remainder.

    The two pieces are orthogonal and sum to H(lam) y: the trend is the plain
    linear regression of y, the remainder lives in its orthogonal complement.
    """
    fit = smooth_natural(obs, lam)
    trend = linear_trend(obs.grid).projector @ obs.y
    return trend, np.asarray(fit.coords.values) - trend


def _scaled_general_system(Ppen: PenaltyMatrix, lam: float) -> np.ndarray:
    """lam * P + Pi^T Pi with boundary rows divided by lam.

    The scaling leaves the fit path unchanged (those right-hand-side entries
    are zero) and keeps the matrix well conditioned as lam -> 0, where the
    plain assembly degenerates.
    """
    if not lam > 0:
        raise NonPositiveLambda(f"lambda must be > 0, got {lam!r}")
    M = Ppen.M
    m = M.shape[0]
    w = np.linalg.eigvalsh(M[np.ix_([0, -1], [0, -1])])
    if w[0] <= m * np.finfo(np.float64).eps * max(abs(w[1]), np.abs(M).max()):
        raise SingularCorner(
            "boundary-curvature corner of the penalty is singular; the "
            "penalized minimizer is not unique")
    A = lam * M
    A[1:-1, 1:-1] += np.eye(m - 2)
    A[0, :] /= lam
    A[-1, :] /= lam
    return A


def general_hat(Ppen: PenaltyMatrix, lam: float) -> np.ndarray:
    """Full-coordinate hat matrix (lam * P + Pi^T Pi)^{-1} of a general penalty.

    Unique exactly when the 2x2 boundary-curvature corner of P is invertible.
    """
    A = _scaled_general_system(Ppen, lam)
    H = np.linalg.solve(A, np.eye(A.shape[0]))
    H[:, 0] /= lam
    H[:, -1] /= lam
    return H


def general_fit(Ppen: PenaltyMatrix, y, lam: float) -> np.ndarray:
    """Fitted coordinates H_P(lam) (0, y, 0) without forming the full matrix."""
    A = _scaled_general_system(Ppen, lam)
    b = np.zeros(A.shape[0])
    b[1:-1] = np.asarray(y, dtype=np.float64)
    return np.linalg.solve(A, b)


def general_limit_infinity(Ppen: PenaltyMatrix, y) -> np.ndarray:
    """Infinite-smoothing limit: least squares of y over the null space of P."""
    y = np.asarray(y, dtype=np.float64)
    M = Ppen.M
    w, vecs = np.linalg.eigh(M)
    tau = M.shape[0] * np.finfo(np.float64).eps * max(float(w[-1]), 0.0)
    null = vecs[:, w <= tau]
    if null.shape[1] == 0:
        raise EmptyNullspace(
            "penalty is positive definite; its infinite-smoothing limit is "
            "the zero fit, not a regression")
    F = null[1:-1, :]
    z, *_ = np.linalg.lstsq(F, y, rcond=None)
    return null @ z
