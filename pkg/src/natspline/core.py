"""Value types shared by every module: knot grids, coordinates, observations.

Conventions used throughout the package: a grid has n+1 strictly increasing
knots t_1..t_{n+1} (n >= 2 intervals), and a C^2 cubic spline on that grid is
coordinatized by the (n+3)-vector (u_1, p_1..p_{n+1}, u_{n+1}) -- the boundary
second derivatives plus the knot values.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteInput, NonIncreasingKnots, ShapeMismatch, TooFewKnots


def _readonly(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class KnotGrid:
    """Strictly increasing knots and their spacings h_i = t_{i+1} - t_i."""

    knots: np.ndarray      # length n+1
    spacings: np.ndarray   # length n

    @property
    def n(self) -> int:
        """Number of intervals."""
        return self.spacings.size

    @property
    def npoints(self) -> int:
        return self.knots.size


@dataclass(frozen=True)
class NaturalCoordinates:
    """Coordinates (u_1, p, u_{n+1}) of a C^2 cubic spline in the natural basis."""

    u_first: float
    values: np.ndarray     # length n+1
    u_last: float


@dataclass(frozen=True)
class SplineCoefficients:
    """Piecewise-cubic coefficients: s(t) = p_i + q_i x + (u_i/2) x^2 + (v_i/6) x^3
    with x = t - t_i on [t_i, t_{i+1})."""

    p: np.ndarray          # length n+1
    q: np.ndarray          # length n
    u: np.ndarray          # length n+1
    v: np.ndarray          # length n


@dataclass(frozen=True)
class Observations:
    """Knot grid plus one noisy observation per knot."""

    grid: KnotGrid
    y: np.ndarray          # length n+1

    def __post_init__(self):
        y = _readonly(self.y)
        if y.ndim != 1 or y.size != self.grid.npoints:
            raise ShapeMismatch(
                f"y has length {y.size}, expected {self.grid.npoints}")
        if not np.all(np.isfinite(y)):
            raise NonFiniteInput("observations contain non-finite values")
        object.__setattr__(self, "y", y)


def make_grid(knots) -> KnotGrid:
    """Validate knot abscissae and build a KnotGrid.

    Requires at least 3 finite knots, strictly increasing (exact comparison;
    near-duplicates are the caller's problem -- merging would silently change
    every matrix shape downstream).
    """
    knots = np.ascontiguousarray(knots, dtype=np.float64)
    if knots.ndim != 1 or knots.size < 3:
        raise TooFewKnots(f"need at least 3 knots, got {knots.size}")
    if not np.all(np.isfinite(knots)):
        raise NonFiniteInput("knots contain non-finite values")
    spacings = np.diff(knots)
    if not np.all(spacings > 0.0):
        bad = int(np.argmin(spacings > 0.0))
        raise NonIncreasingKnots(
            f"knots must be strictly increasing; t[{bad}]={knots[bad]!r} "
            f">= t[{bad + 1}]={knots[bad + 1]!r}")
    return KnotGrid(knots=_readonly(knots), spacings=_readonly(spacings))


def flatten(coords: NaturalCoordinates) -> np.ndarray:
    """Stack coordinates in the canonical order (u_1, p_1..p_{n+1}, u_{n+1})."""
    values = np.asarray(coords.values, dtype=np.float64)
    return np.concatenate(([coords.u_first], values, [coords.u_last]))


def unflatten(vec) -> NaturalCoordinates:
    """Inverse of flatten; exact round-trip."""
    vec = np.asarray(vec, dtype=np.float64)
    if vec.ndim != 1 or vec.size < 3:
        raise ShapeMismatch(f"coordinate vector has length {vec.size}, need >= 3")
    return NaturalCoordinates(
        u_first=float(vec[0]), values=_readonly(vec[1:-1]), u_last=float(vec[-1]))
