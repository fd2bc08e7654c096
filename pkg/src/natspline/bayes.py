"""Mixed-model reading of penalized spline estimation.

Splitting the coordinate space into the null space of a penalty (columns of
P0) and a complement scaled so that P1^T P P1 = I turns the observation model
into y = F beta + R eta + w with F = Pi P0, R = Pi P1.  The penalized least
squares problem with lam = sigma_w^2 / sigma_s^2 then coincides with the
Henderson closed forms: beta_hat is the BLUE of the fixed effects and eta_hat
the BLUP of the random effects, and P0 beta_hat + P1 eta_hat reproduces the
general penalized fit.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve as sym_solve

from .core import NaturalCoordinates, unflatten
from .errors import ShapeMismatch, SingularGLS
from .penalty import PenaltyMatrix
from .smoother import general_fit


@dataclass(frozen=True)
class PenaltyFactorization:
    """Null-space basis P0 and a complement P1 normalized to P1^T P P1 = I."""

    P0: np.ndarray   # (n+3) x d0
    P1: np.ndarray   # (n+3) x (n+3-d0)


@dataclass(frozen=True)
class MixedModel:
    F: np.ndarray    # (n+1) x d0 fixed-effects design
    R: np.ndarray    # (n+1) x (n+3-d0) random-effects design
    sigma_w2: float
    sigma_s2: float


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    # Deterministic eigenvector orientation: first entry of noticeable size
    # made positive.
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        nz = np.flatnonzero(np.abs(col) > 1e-12 * np.linalg.norm(col))
        if nz.size and col[nz[0]] < 0:
            out[:, k] = -col
    return out


def factorize_penalty(Ppen: PenaltyMatrix) -> PenaltyFactorization:
    """Spectral split of a symmetric non-negative penalty.

    Eigenvalues at or below dim * eps * lambda_max count as zero; the positive
    part is rescaled by 1/sqrt(eigenvalue) so the penalty is the plain squared
    norm of the eta coordinates.  d0 = 0 simply yields an empty P0.
    """
    M = Ppen.M
    w, vecs = np.linalg.eigh(M)
    vecs = _fix_signs(vecs)
    tau = M.shape[0] * np.finfo(np.float64).eps * max(float(w[-1]), 0.0)
    null = w <= tau
    P0 = vecs[:, null]
    wp = w[~null]
    P1 = vecs[:, ~null] / np.sqrt(wp)
    return PenaltyFactorization(P0=P0, P1=P1)


def mixed_model(fact: PenaltyFactorization, sigma_w2: float,
                sigma_s2: float) -> MixedModel:
    """Designs F = Pi P0 and R = Pi P1 (middle rows select knot values)."""
    return MixedModel(F=fact.P0[1:-1, :], R=fact.P1[1:-1, :],
                      sigma_w2=float(sigma_w2), sigma_s2=float(sigma_s2))


def blue_blup(model: MixedModel, y) -> tuple[np.ndarray, np.ndarray]:
    """Henderson closed forms for (BLUE of beta, BLUP of eta).

    beta_hat is generalized least squares under Sigma = sigma_s^2 R R^T +
    sigma_w^2 I; eta_hat shrinks the GLS residual through
    (R^T R / sigma_w^2 + I / sigma_s^2)^{-1} R^T / sigma_w^2.
    """
    y = np.asarray(y, dtype=np.float64)
    F, R = model.F, model.R
    if y.size != F.shape[0]:
        raise ShapeMismatch(f"y has length {y.size}, expected {F.shape[0]}")
    if model.sigma_w2 <= 0 or model.sigma_s2 <= 0:
        raise SingularGLS("blue_blup needs sigma_w2 > 0 and sigma_s2 > 0")
    npts = y.size
    Sigma = model.sigma_s2 * (R @ R.T) + model.sigma_w2 * np.eye(npts)
    try:
        chol = cho_factor(Sigma)
        SiF = cho_solve(chol, F)
        G = F.T @ SiF
        beta = np.linalg.solve(G, SiF.T @ y)
    except np.linalg.LinAlgError as exc:
        raise SingularGLS(str(exc)) from exc
    resid = y - F @ beta
    B = R.T @ R / model.sigma_w2 + np.eye(R.shape[1]) / model.sigma_s2
    eta = cho_solve(cho_factor(B), R.T @ resid / model.sigma_w2)
    return beta, eta


def equivalence(Ppen: PenaltyMatrix, y, sigma_w2: float, sigma_s2: float
                ) -> tuple[np.ndarray, np.ndarray, NaturalCoordinates]:
    """Penalized route: argmin (sigma_w2/sigma_s2) ||eta||^2 + ||y - F beta - R eta||^2.

    Returns (beta_hat, eta_hat, coords) with coords = P0 beta_hat + P1 eta_hat;
    for sigma_w2 > 0 the coordinates equal the general penalized fit at
    lam = sigma_w2 / sigma_s2.  sigma_w2 = 0 degenerates to interpolation: the
    minimum-norm eta with F beta + R eta = y.
    """
    if sigma_s2 <= 0:
        raise SingularGLS("sigma_s2 must be > 0")
    if sigma_w2 < 0:
        raise SingularGLS("sigma_w2 must be >= 0")
    y = np.asarray(y, dtype=np.float64)
    fact = factorize_penalty(Ppen)
    F = fact.P0[1:-1, :]
    R = fact.P1[1:-1, :]
    d0 = F.shape[1]
    k = R.shape[1]
    if sigma_w2 == 0.0:
        # KKT for min ||eta||^2 s.t. F beta + R eta = y.
        A = np.hstack([F, R])
        kkt = np.zeros((d0 + k + y.size, d0 + k + y.size))
        kkt[d0:d0 + k, d0:d0 + k] = np.eye(k)
        kkt[:d0 + k, d0 + k:] = A.T
        kkt[d0 + k:, :d0 + k] = A
        rhs = np.concatenate([np.zeros(d0 + k), y])
        sol = sym_solve(kkt, rhs, assume_a="sym")
        beta, eta = sol[:d0], sol[d0:d0 + k]
    else:
        lam = sigma_w2 / sigma_s2
        # Normal equations of the penalized objective.
        A = np.zeros((d0 + k, d0 + k))
        A[:d0, :d0] = F.T @ F
        A[:d0, d0:] = F.T @ R
        A[d0:, :d0] = R.T @ F
        A[d0:, d0:] = R.T @ R + lam * np.eye(k)
        rhs = np.concatenate([F.T @ y, R.T @ y])
        try:
            sol = sym_solve(A, rhs, assume_a="sym")
        except np.linalg.LinAlgError as exc:
            raise SingularGLS(str(exc)) from exc
        beta, eta = sol[:d0], sol[d0:]
    coords = fact.P0 @ beta + fact.P1 @ eta
    return beta, eta, unflatten(coords)


def penalized_fit_coords(Ppen: PenaltyMatrix, y, sigma_w2: float,
                         sigma_s2: float) -> np.ndarray:
    """General-penalty fit at lam = sigma_w2/sigma_s2, for cross-checking."""
    return general_fit(Ppen, y, sigma_w2 / sigma_s2)
