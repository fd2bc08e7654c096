"""Cubic spline smoothing in a coordinate basis tailored to natural splines.

A C^2 cubic spline on knots t_1 < ... < t_{n+1} is identified by the
(n+3)-vector (u_1, p, u_{n+1}): boundary second derivatives plus knot values.
Natural splines are exactly the vectors with u_1 = u_{n+1} = 0, which makes
penalized fitting, smoothing-parameter selection and the mixed-model reading
of the estimators linear algebra on small dense matrices.
"""

from .bayes import (
    MixedModel,
    PenaltyFactorization,
    blue_blup,
    equivalence,
    factorize_penalty,
    mixed_model,
)
from .basis import (
    BasisMatrices,
    SystemMatrices,
    build_basis,
    build_system,
    coefficients_for,
    eval_basis,
    eval_spline,
    interpolate_natural,
)
from .core import (
    KnotGrid,
    NaturalCoordinates,
    Observations,
    SplineCoefficients,
    flatten,
    make_grid,
    unflatten,
)
from .penalty import (
    LinearTrend,
    PenaltyMatrix,
    build_C,
    build_gram,
    build_Ppen,
    j2,
    linear_trend,
    solve_constrained_quadratic,
)
from .select import (
    NO_SOLUTION,
    SelectionConfig,
    SelectionResult,
    estimate_sigma2,
    lambda_band,
    leverage_linear,
    minimize_sure,
    nsr_column,
    pe_estimate,
    psi,
    solve_noise_match,
    sure,
)
from .smoother import (
    HatMatrix,
    SmoothFit,
    decompose_fit,
    general_fit,
    general_hat,
    general_limit_infinity,
    hat_matrix,
    smooth_natural,
)

__all__ = [
    "BasisMatrices", "HatMatrix", "KnotGrid", "LinearTrend", "MixedModel",
    "NO_SOLUTION", "NaturalCoordinates", "Observations", "PenaltyFactorization",
    "PenaltyMatrix", "SelectionConfig", "SelectionResult", "SmoothFit",
    "SplineCoefficients", "SystemMatrices", "blue_blup", "build_C",
    "build_Ppen", "build_basis", "build_gram", "build_system",
    "coefficients_for", "decompose_fit", "equivalence", "estimate_sigma2",
    "eval_basis", "eval_spline", "factorize_penalty", "flatten", "general_fit",
    "general_hat", "general_limit_infinity", "hat_matrix",
    "interpolate_natural", "j2", "lambda_band", "leverage_linear",
    "linear_trend", "make_grid", "minimize_sure", "mixed_model", "nsr_column",
    "pe_estimate", "psi", "smooth_natural", "solve_constrained_quadratic",
    "solve_noise_match", "sure", "unflatten",
]

__version__ = "0.1.0"
