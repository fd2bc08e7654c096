"""Exception types raised across the package."""


class NatsplineError(Exception):
    """Base class for all natspline errors."""


# -- grid / input validation ------------------------------------------------

class NonIncreasingKnots(NatsplineError):
    """Knot abscissae are not strictly increasing."""


class TooFewKnots(NatsplineError):
    """Fewer than three knots were supplied."""


class NonFiniteInput(NatsplineError):
    """An input vector contains NaN or infinity."""


class ShapeMismatch(NatsplineError):
    """Vector or matrix shape does not match the knot grid."""


# -- basis construction and evaluation --------------------------------------

class SingularSystem(NatsplineError):
    """The bordered continuity system could not be solved."""


class OutOfDomain(NatsplineError):
    """Evaluation point lies outside [t_1, t_{n+1}]."""


class InvalidOrder(NatsplineError):
    """Derivative order outside 0..3."""


class IndexOutOfRange(NatsplineError):
    """Basis or knot index outside its valid range."""


# -- penalties ---------------------------------------------------------------

class InvalidDerivativeOrder(NatsplineError):
    """Gram derivative order outside 0..2."""


class AllCoefficientsZero(NatsplineError):
    """Combined penalty requested with a0 = a1 = a2 = 0."""


class OverlappingNullspaces(NatsplineError):
    """Constraint and quadratic-form null spaces intersect nontrivially."""


class InconsistentConstraint(NatsplineError):
    """Constraint right-hand side is not in the range of the constraint matrix."""


# -- smoothing ---------------------------------------------------------------

class NegativeLambda(NatsplineError):
    """Smoothing parameter must be >= 0."""


class NonPositiveLambda(NatsplineError):
    """This operation requires a strictly positive smoothing parameter."""


class SingularCorner(NatsplineError):
    """The 2x2 boundary-curvature block of the penalty is singular."""


class EmptyNullspace(NatsplineError):
    """Penalty is positive definite; the infinite-smoothing limit is degenerate."""


# -- selection / mixed model --------------------------------------------------

class BracketTooNarrow(NatsplineError):
    """Criterion minimizer sits on the edge of the search bracket."""


class SingularGLS(NatsplineError):
    """Generalized least-squares system is singular."""
