"""Construction and evaluation of the natural coordinate basis.

The continuity equations of a C^2 cubic spline let the first, second and third
derivative coordinates (q, u, v) be recovered linearly from (u_1, p, u_{n+1}):
u through a bordered tridiagonal system, q and v by substitution.  The three
maps are materialized as the matrices Q ((n)x(n+3)), U ((n+1)x(n+3)) and
V ((n)x(n+3)); basis function number j (0..n+2) is the spline whose coordinate
vector is the j-th canonical unit vector.  Functions phi_1..phi_{n+1} are the
cardinal natural interpolants; phi_0 and phi_{n+2} carry a unit boundary
second derivative and vanish at every knot.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .core import KnotGrid, NaturalCoordinates, SplineCoefficients, flatten
from .errors import (
    IndexOutOfRange,
    InvalidOrder,
    OutOfDomain,
    ShapeMismatch,
    SingularSystem,
)


@dataclass(frozen=True)
class SystemMatrices:
    """Raw continuity-system matrices, before elimination."""

    Q1: np.ndarray          # n x (n+1): divided differences of p
    Q2: np.ndarray          # n x (n+1): curvature weights entering q
    S: np.ndarray           # (n-1) x (n+1): tridiagonal curvature rows
    Delta: np.ndarray       # (n-1) x (n+1): second divided differences
    S_bordered: np.ndarray  # (n+1) x (n+1): S with e_1^T on top, e_{n+1}^T below
    Vtilde: np.ndarray      # n x (n+1): first differences of u
    D: np.ndarray           # n x (n+1): divided-difference rows


@dataclass(frozen=True)
class BasisMatrices:
    """Coordinate-to-derivative maps; columns are per-basis-function data."""

    Q: np.ndarray           # n x (n+3)
    U: np.ndarray           # (n+1) x (n+3)
    V: np.ndarray           # n x (n+3)


def build_system(grid: KnotGrid) -> SystemMatrices:
    """Assemble the sparse continuity-system matrices for a grid."""
    h = grid.spacings
    n = grid.n
    rows = np.arange(n)
    Q1 = np.zeros((n, n + 1))
    Q1[rows, rows] = -1.0 / h
    Q1[rows, rows + 1] = 1.0 / h
    Q2 = np.zeros((n, n + 1))
    Q2[rows, rows] = -h / 3.0
    Q2[rows, rows + 1] = -h / 6.0
    Vtilde = np.zeros((n, n + 1))
    Vtilde[rows, rows] = -1.0 / h
    Vtilde[rows, rows + 1] = 1.0 / h
    D = Vtilde.copy()

    irows = np.arange(n - 1)
    S = np.zeros((n - 1, n + 1))
    S[irows, irows] = h[:-1] / 6.0
    S[irows, irows + 1] = (h[:-1] + h[1:]) / 3.0
    S[irows, irows + 2] = h[1:] / 6.0
    Delta = np.zeros((n - 1, n + 1))
    Delta[irows, irows] = 1.0 / h[:-1]
    Delta[irows, irows + 1] = -(1.0 / h[:-1] + 1.0 / h[1:])
    Delta[irows, irows + 2] = 1.0 / h[1:]

    S_bordered = np.zeros((n + 1, n + 1))
    S_bordered[0, 0] = 1.0
    S_bordered[1:n, :] = S
    S_bordered[n, n] = 1.0
    return SystemMatrices(Q1=Q1, Q2=Q2, S=S, Delta=Delta,
                          S_bordered=S_bordered, Vtilde=Vtilde, D=D)


def _banded_form(S_bordered: np.ndarray) -> np.ndarray:
    # (3, n+1) diagonal-ordered form for solve_banded; the bordered system is
    # tridiagonal with unit corners.
    m = S_bordered.shape[0]
    ab = np.zeros((3, m))
    idx = np.arange(m)
    ab[1, :] = S_bordered[idx, idx]
    ab[0, 1:] = S_bordered[idx[:-1], idx[:-1] + 1]
    ab[2, :-1] = S_bordered[idx[:-1] + 1, idx[:-1]]
    return ab


def build_basis(grid: KnotGrid) -> BasisMatrices:
    """Solve for U, then substitute to get Q and V.

    The bordered system is factorized once (tridiagonal) and reused for all
    n+3 right-hand-side columns.
    """
    sys = build_system(grid)
    n = grid.n
    rhs = np.zeros((n + 1, n + 3))
    rhs[0, 0] = 1.0
    rhs[1:n, 1:n + 2] = sys.Delta
    rhs[n, n + 2] = 1.0
    try:
        U = solve_banded((1, 1), _banded_form(sys.S_bordered), rhs)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - structural
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(U)):
        raise SingularSystem("bordered tridiagonal solve produced non-finite u")
    Q = np.zeros((n, n + 3))
    Q[:, 1:n + 2] = sys.Q1
    Q += sys.Q2 @ U
    V = sys.Vtilde @ U
    return BasisMatrices(Q=Q, U=U, V=V)


def coefficients_for(grid: KnotGrid, coords: NaturalCoordinates,
                     basis: BasisMatrices | None = None) -> SplineCoefficients:
    """Piecewise coefficients of the spline with the given coordinates."""
    x = flatten(coords)
    if x.size != grid.n + 3:
        raise ShapeMismatch(
            f"coordinate vector has length {x.size}, expected {grid.n + 3}")
    if basis is None:
        basis = build_basis(grid)
    return SplineCoefficients(
        p=np.array(coords.values, dtype=np.float64),
        q=basis.Q @ x,
        u=basis.U @ x,
        v=basis.V @ x,
    )


def _piece_indices(grid: KnotGrid, t: np.ndarray) -> np.ndarray:
    # t == t_{n+1} maps to the last piece (left limit); pieces are otherwise
    # the half-open intervals [t_i, t_{i+1}).
    idx = np.searchsorted(grid.knots, t, side="right") - 1
    return np.clip(idx, 0, grid.n - 1)


def eval_spline(coeffs: SplineCoefficients, grid: KnotGrid, t, order: int = 0):
    """Evaluate the spline (or a derivative up to order 3) at t.

    Accepts a scalar or an array of points inside [t_1, t_{n+1}]; the order-3
    value is the piecewise-constant right limit.
    """
    if order not in (0, 1, 2, 3):
        raise InvalidOrder(f"order must be 0..3, got {order!r}")
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr < grid.knots[0]) or np.any(t_arr > grid.knots[-1]):
        raise OutOfDomain(
            f"t outside [{grid.knots[0]!r}, {grid.knots[-1]!r}]")
    i = _piece_indices(grid, t_arr)
    x = t_arr - grid.knots[i]
    p, q, u, v = coeffs.p[i], coeffs.q[i], coeffs.u[i], coeffs.v[i]
    if order == 0:
        out = p + x * (q + x * (u / 2.0 + x * v / 6.0))
    elif order == 1:
        out = q + x * (u + x * v / 2.0)
    elif order == 2:
        out = u + x * v
    else:
        out = v + np.zeros_like(x)
    # At t_{n+1} the left-limit polynomial agrees with the stored boundary
    # coordinates only to roundoff; return the exact stored values instead.
    if order == 0:
        out = np.where(t_arr == grid.knots[-1], coeffs.p[-1], out)
    elif order == 2:
        out = np.where(t_arr == grid.knots[-1], coeffs.u[-1], out)
    return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


def eval_basis(grid: KnotGrid, j: int, t, order: int = 0,
               basis: BasisMatrices | None = None):
    """Evaluate basis function phi_j (or a derivative) at t."""
    if not 0 <= j <= grid.n + 2:
        raise IndexOutOfRange(f"basis index {j} outside 0..{grid.n + 2}")
    e = np.zeros(grid.n + 3)
    e[j] = 1.0
    coords = NaturalCoordinates(
        u_first=float(e[0]), values=e[1:-1], u_last=float(e[-1]))
    return eval_spline(coefficients_for(grid, coords, basis=basis), grid, t, order)


def interpolate_natural(grid: KnotGrid, p) -> SplineCoefficients:
    """Natural C^2 cubic interpolant of the knot values p.

    Equivalent to coordinates (0, p, 0): both boundary second derivatives are
    pinned to zero by the basis pass-through rows.
    """
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size != grid.npoints:
        raise ShapeMismatch(f"p has length {p.size}, expected {grid.npoints}")
    return coefficients_for(
        grid, NaturalCoordinates(u_first=0.0, values=p, u_last=0.0))
