"""Smoothing-parameter selection.

The residual curve psi(lam) = ||y - H(lam) y||^2 grows monotonically from 0
(interpolation) to ||y - Lreg y||^2 (linear regression), so any target value
strictly below that supremum has a unique matching lam; targets at or above it
have none, which is reported as the NO_SOLUTION value rather than an error.
Selection rules implemented on top of psi: deterministic noise matching,
Gaussian-band endpoints lam- / lam+, and SURE (equivalently PE) minimization.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import KnotGrid, Observations
from .errors import BracketTooNarrow, IndexOutOfRange, NegativeLambda
from .penalty import build_C, linear_trend
from .smoother import _solve_natural


class _NoSolution:
    """Marker for 'the criterion equation has no root' (large-noise regime)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NoSolution"

    def __bool__(self):
        return False


NO_SOLUTION = _NoSolution()


@dataclass(frozen=True)
class SelectionConfig:
    sigma2: float = 0.0
    epsilon: float = 0.2
    lambda_bracket: tuple[float, float] = (1e-10, 1e10)
    tol: float = 1e-9

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be >= 0")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must be in (0, 1)")
        lo, hi = self.lambda_bracket
        if not (0 < lo < hi):
            raise ValueError("lambda bracket must satisfy 0 < lower < upper")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")


@dataclass(frozen=True)
class SelectionResult:
    lam: "float | _NoSolution"
    criterion_value: "float | None"
    method: str

    @property
    def found(self) -> bool:
        return self.lam is not NO_SOLUTION


def _middle_K(obs: Observations) -> np.ndarray:
    return build_C(obs.grid).M[1:-1, 1:-1]


def _psi_given(K: np.ndarray, y: np.ndarray, lam: float) -> float:
    if lam == 0.0:
        return 0.0
    p_hat = _solve_natural(K, lam, y)
    return float(np.sum((y - p_hat) ** 2))


def psi(obs: Observations, lam: float) -> float:
    """Residual sum of squares ||y - H(lam) y||^2."""
    if lam < 0:
        raise NegativeLambda(f"lambda must be >= 0, got {lam!r}")
    return _psi_given(_middle_K(obs), obs.y, lam)


def _residual_sup(obs: Observations) -> float:
    r = obs.y - linear_trend(obs.grid).projector @ obs.y
    return float(r @ r)


def _solve_psi_equals(obs: Observations, target: float, cfg: SelectionConfig,
                      method: str) -> SelectionResult:
    """Root of psi(lam) = target by bisection on log-lambda.

    Exploits monotonicity; the stopping rule is on the criterion residual, not
    on lam, because psi flattens toward its supremum.  The bracket expands
    automatically when the root falls outside it.
    """
    sup = _residual_sup(obs)
    if not sup > target:
        return SelectionResult(lam=NO_SOLUTION, criterion_value=None, method=method)
    if target <= 0.0:
        return SelectionResult(lam=0.0, criterion_value=0.0, method=method)
    K = _middle_K(obs)
    y = obs.y
    lo, hi = cfg.lambda_bracket
    while _psi_given(K, y, lo) > target and lo > 1e-280:
        lo *= 1e-10
    while _psi_given(K, y, hi) < target and hi < 1e280:
        hi *= 1e10
    tol = cfg.tol * max(1.0, target)
    best_lam, best_res = hi, abs(_psi_given(K, y, hi) - target)
    for _ in range(240):
        mid = math.sqrt(lo * hi)
        val = _psi_given(K, y, mid)
        res = abs(val - target)
        if res < best_res:
            best_lam, best_res = mid, res
        if res <= tol or hi <= lo * (1.0 + 4.0 * np.finfo(np.float64).eps):
            break
        if val < target:
            lo = mid
        else:
            hi = mid
    return SelectionResult(lam=float(best_lam),
                           criterion_value=_psi_given(K, y, best_lam),
                           method=method)


def solve_noise_match(obs: Observations, w_norm2: float,
                      cfg: SelectionConfig | None = None) -> SelectionResult:
    """lam with psi(lam) = ||w||^2, when ||y - Lreg y||^2 > ||w||^2.

    NO_SOLUTION (a value, not an error) otherwise: the residual curve then
    never reaches the noise level.
    """
    if w_norm2 < 0:
        raise ValueError("w_norm2 must be >= 0")
    cfg = cfg or SelectionConfig()
    return _solve_psi_equals(obs, float(w_norm2), cfg, "noise_match")


def lambda_band(obs: Observations,
                cfg: SelectionConfig) -> tuple[SelectionResult, SelectionResult]:
    """Band endpoints: psi(lam) = (n+1)(1 -/+ eps) sigma^2.

    Whenever the upper endpoint exists the lower one does too, since its
    target is smaller.
    """
    npts = obs.grid.npoints
    lower = _solve_psi_equals(
        obs, npts * (1.0 - cfg.epsilon) * cfg.sigma2, cfg, "band_lower")
    upper = _solve_psi_equals(
        obs, npts * (1.0 + cfg.epsilon) * cfg.sigma2, cfg, "band_upper")
    return lower, upper


def _clipped_spectrum(K: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Same spectral zero rule as the penalty module: K has an exact affine
    # null space, so eigenvalues at roundoff scale are true zeros.
    mu, V = np.linalg.eigh(K)
    tau = K.shape[0] * np.finfo(np.float64).eps * max(float(mu[-1]), 0.0)
    return np.where(mu <= tau, 0.0, mu), V


def _trace_hat(K: np.ndarray, lam: float) -> float:
    mu, _ = _clipped_spectrum(K)
    return float(np.sum(1.0 / (1.0 + lam * mu)))


def pe_estimate(obs: Observations, lam: float, sigma2: float) -> float:
    """Unbiased prediction-error estimate RSS(lam) + 2 sigma^2 trace H(lam)."""
    if lam < 0:
        raise NegativeLambda(f"lambda must be >= 0, got {lam!r}")
    if sigma2 < 0:
        raise ValueError("sigma2 must be >= 0")
    K = _middle_K(obs)
    mu, V = _clipped_spectrum(K)
    shrink = (lam * mu) / (1.0 + lam * mu)
    rss = float(np.sum((shrink * (V.T @ obs.y)) ** 2))
    return rss + 2.0 * sigma2 * float(np.sum(1.0 / (1.0 + lam * mu)))


def sure(obs: Observations, lam: float, sigma2: float) -> float:
    """Stein's unbiased risk estimate; PE shifted down by (n+1) sigma^2."""
    return pe_estimate(obs, lam, sigma2) - obs.grid.npoints * sigma2


def minimize_sure(obs: Observations, sigma2: float,
                  bracket: tuple[float, float] | None = None,
                  cfg: SelectionConfig | None = None) -> SelectionResult:
    """Minimize SURE over lam by a coarse log scan plus golden-section refine.

    The 64-point scan guards against picking the wrong basin; an argmin on the
    bracket edge raises BracketTooNarrow instead of being clipped.  sigma2 = 0
    reduces SURE to the monotone residual curve, minimized at lam = 0.
    """
    cfg = cfg or SelectionConfig()
    if bracket is None:
        bracket = cfg.lambda_bracket
    if sigma2 < 0:
        raise ValueError("sigma2 must be >= 0")
    if sigma2 == 0.0:
        return SelectionResult(lam=0.0, criterion_value=0.0, method="sure")
    K = _middle_K(obs)
    y = obs.y
    npts = obs.grid.npoints

    def crit(lam):
        return (_psi_given(K, y, lam) + 2.0 * sigma2 * _trace_hat(K, lam)
                - npts * sigma2)

    grid = np.logspace(math.log10(bracket[0]), math.log10(bracket[1]), 64)
    vals = np.array([crit(g) for g in grid])
    k = int(np.argmin(vals))
    if k == 0 or k == grid.size - 1:
        raise BracketTooNarrow(
            f"SURE minimizer at bracket edge lam={grid[k]:g}; widen the bracket")
    lo, hi = math.log10(grid[k - 1]), math.log10(grid[k + 1])
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = crit(10.0 ** x1), crit(10.0 ** x2)
    for _ in range(200):
        if b - a < 1e-12:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = crit(10.0 ** x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = crit(10.0 ** x2)
    lam = 10.0 ** ((a + b) / 2.0)
    return SelectionResult(lam=float(lam), criterion_value=crit(lam), method="sure")


def leverage_linear(grid: KnotGrid, i: int, j: int) -> float:
    """Closed-form residual leverages of the affine regression (1-based i, j).

    i == j gives ||e_i - Lreg e_i||^2, otherwise the inner product
    <e_i - Lreg e_i, e_j - Lreg e_j>.
    """
    npts = grid.npoints
    if not (1 <= i <= npts and 1 <= j <= npts):
        raise IndexOutOfRange(f"indices must lie in 1..{npts}, got ({i}, {j})")
    t = grid.knots
    tbar = float(np.mean(t))
    ss = float(np.sum((t - tbar) ** 2))
    di = (t[i - 1] - tbar)
    dj = (t[j - 1] - tbar)
    if i == j:
        return float((npts - 1) / npts - di * di / ss)
    return float(-1.0 / npts - di * dj / ss)


def nsr_column(grid: KnotGrid, i: int, lam: float) -> float:
    """||e_i - H(lam) e_i||^2: noise-to-signal weight of observation i (1-based)."""
    if not 1 <= i <= grid.npoints:
        raise IndexOutOfRange(f"index must lie in 1..{grid.npoints}, got {i}")
    if lam < 0:
        raise NegativeLambda(f"lambda must be >= 0, got {lam!r}")
    e = np.zeros(grid.npoints)
    e[i - 1] = 1.0
    if lam == 0.0:
        return 0.0
    K = build_C(grid).M[1:-1, 1:-1]
    col = _solve_natural(K, lam, e)
    return float(np.sum((e - col) ** 2))


def estimate_sigma2(obs: Observations) -> float:
    """Unbiased noise-variance estimate ||y - Lreg y||^2 / (n - 1)."""
    return _residual_sup(obs) / (obs.grid.n - 1)
