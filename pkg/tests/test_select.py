import numpy as np
import pytest

from natspline import (
    NO_SOLUTION,
    Observations,
    SelectionConfig,
    build_C,
    estimate_sigma2,
    hat_matrix,
    lambda_band,
    leverage_linear,
    linear_trend,
    make_grid,
    minimize_sure,
    nsr_column,
    pe_estimate,
    psi,
    solve_noise_match,
    sure,
)
from natspline.errors import BracketTooNarrow, IndexOutOfRange, NegativeLambda

from conftest import random_grid


def _sup(obs):
    r = obs.y - linear_trend(obs.grid).projector @ obs.y
    return float(r @ r)


# -- psi ------------------------------------------------------------------------

def test_psi_zero_at_zero_and_for_affine():
    rng = np.random.default_rng(40)
    grid = random_grid(rng, n=7)
    y_affine = 2.0 - 3.0 * grid.knots
    obs = Observations(grid=grid, y=y_affine)
    for lam in (0.0, 0.5, 1e6):
        assert psi(obs, lam) < 1e-18


def test_psi_limit_is_regression_residual(uniform7):
    rng = np.random.default_rng(41)
    obs = Observations(grid=uniform7, y=rng.standard_normal(8))
    sup = _sup(obs)
    assert abs(psi(obs, 1e10) - sup) < 1e-6 * sup


def test_psi_monotone_and_bounded(uniform7):
    rng = np.random.default_rng(42)
    obs = Observations(grid=uniform7, y=rng.standard_normal(8))
    lams = np.logspace(-8, 8, 50)
    vals = [psi(obs, lam) for lam in lams]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    assert max(vals) <= _sup(obs) + 1e-9


def test_psi_against_direct_solve_oracle(uniform7):
    # independent route: plain dense solve of (I + lam K) p = y
    rng = np.random.default_rng(43)
    y = rng.standard_normal(8)
    obs = Observations(grid=uniform7, y=y)
    K = build_C(uniform7).M[1:-1, 1:-1]
    for lam in (1e-6, 1e-2, 1.0, 1e3):
        p = np.linalg.solve(np.eye(8) + lam * K, y)
        oracle = float((y - p) @ (y - p))
        assert abs(psi(obs, lam) - oracle) <= 1e-9 * max(1.0, oracle)


def test_psi_negative_lambda(uniform7):
    obs = Observations(grid=uniform7, y=np.zeros(8))
    with pytest.raises(NegativeLambda):
        psi(obs, -0.1)


def test_psi_quadratic_form_expansion(uniform7):
    """psi(lam) expands into the weighted sum of column deviations."""
    rng = np.random.default_rng(44)
    y = rng.standard_normal(8)
    obs = Observations(grid=uniform7, y=y)
    lam = 0.37
    H = hat_matrix(uniform7, build_C(uniform7), lam).H
    total = 0.0
    for i in range(8):
        ei = np.zeros(8)
        ei[i] = 1.0
        di = ei - H[:, i]
        total += y[i] ** 2 * (di @ di)
        for j in range(i + 1, 8):
            ej = np.zeros(8)
            ej[j] = 1.0
            dj = ej - H[:, j]
            total += 2.0 * y[i] * y[j] * (di @ dj)
    assert abs(total - psi(obs, lam)) <= 1e-9 * max(1.0, total)


# -- noise matching ----------------------------------------------------------------

def test_noise_match_zero_noise_interpolates(uniform7):
    rng = np.random.default_rng(45)
    obs = Observations(grid=uniform7, y=rng.standard_normal(8))
    res = solve_noise_match(obs, 0.0)
    assert res.lam == 0.0 and res.criterion_value == 0.0


def test_noise_match_large_noise_has_no_solution(uniform7):
    rng = np.random.default_rng(46)
    obs = Observations(grid=uniform7, y=rng.standard_normal(8))
    res = solve_noise_match(obs, _sup(obs) + 1.0)
    assert res.lam is NO_SOLUTION
    assert not res.found
    # boundary case: the condition is strict
    assert solve_noise_match(obs, _sup(obs)).lam is NO_SOLUTION


def test_noise_match_root_and_grid_scan_oracle():
    rng = np.random.default_rng(47)
    grid = make_grid(np.arange(21) / 20)
    p = np.sin(2 * np.pi * grid.knots)
    w = 0.1 * rng.standard_normal(21)
    obs = Observations(grid=grid, y=p + w)
    w2 = float(w @ w)
    assert _sup(obs) > w2
    res = solve_noise_match(obs, w2)
    assert res.found
    assert abs(psi(obs, res.lam) - w2) <= 1e-8 * max(1.0, w2)
    # 10000-point log-grid scan brackets the same root
    K = build_C(grid).M[1:-1, 1:-1]
    mu, V = np.linalg.eigh(K)
    mu = np.maximum(mu, 0.0)
    z = V.T @ obs.y
    lams = np.logspace(-10, 10, 10000)
    shrink = (lams[:, None] * mu) / (1.0 + lams[:, None] * mu)
    vals = np.sum((shrink * z) ** 2, axis=1)
    k = int(np.searchsorted(vals, w2))
    assert lams[max(k - 1, 0)] <= res.lam <= lams[min(k, lams.size - 1)]


def test_noise_match_respects_tolerance_config(uniform7):
    rng = np.random.default_rng(48)
    y = np.sin(3 * uniform7.knots) + 0.05 * rng.standard_normal(8)
    obs = Observations(grid=uniform7, y=y)
    target = 0.5 * _sup(obs)
    cfg = SelectionConfig(tol=1e-12)
    res = solve_noise_match(obs, target, cfg)
    assert abs(res.criterion_value - target) <= 1e-12 * max(1.0, target)


# -- Gaussian band --------------------------------------------------------------------

def test_band_zero_sigma(uniform7):
    rng = np.random.default_rng(49)
    obs = Observations(grid=uniform7, y=rng.standard_normal(8))
    lower, upper = lambda_band(obs, SelectionConfig(sigma2=0.0, epsilon=0.2))
    assert lower.lam == 0.0 and upper.lam == 0.0


def test_band_large_sigma_no_solution(uniform7):
    rng = np.random.default_rng(50)
    obs = Observations(grid=uniform7, y=rng.standard_normal(8))
    sigma2 = 2.0 * _sup(obs) / (8 * 0.8)
    lower, upper = lambda_band(obs, SelectionConfig(sigma2=sigma2, epsilon=0.2))
    assert lower.lam is NO_SOLUTION and upper.lam is NO_SOLUTION


def test_band_roots_verify_by_resubstitution(uniform7):
    rng = np.random.default_rng(51)
    p = np.sin(2 * np.pi * uniform7.knots)
    obs = Observations(grid=uniform7, y=p + 0.1 * rng.standard_normal(8))
    cfg = SelectionConfig(sigma2=0.01, epsilon=0.2)
    lower, upper = lambda_band(obs, cfg)
    assert lower.found and upper.found
    for res, fac in ((lower, 0.8), (upper, 1.2)):
        target = 8 * fac * 0.01
        assert abs(psi(obs, res.lam) - target) <= cfg.tol * max(1.0, target)
    assert lower.lam <= upper.lam


def test_band_nesting_with_noise_match(uniform7):
    rng = np.random.default_rng(52)
    p = np.sin(2 * np.pi * uniform7.knots)
    obs = Observations(grid=uniform7, y=p + 0.05 * rng.standard_normal(8))
    sigma2 = 0.0025
    cfg = SelectionConfig(sigma2=sigma2, epsilon=0.2)
    lower, upper = lambda_band(obs, cfg)
    mid = solve_noise_match(obs, 8 * sigma2)
    assert lower.found and upper.found and mid.found
    assert lower.lam <= mid.lam <= upper.lam


def test_band_upper_exists_implies_lower_exists():
    rng = np.random.default_rng(53)
    for _ in range(20):
        grid = random_grid(rng, n=9)
        obs = Observations(grid=grid, y=rng.standard_normal(10))
        sigma2 = float(rng.uniform(0.0, 0.3))
        lower, upper = lambda_band(obs, SelectionConfig(sigma2=sigma2, epsilon=0.2))
        if upper.found:
            assert lower.found


# -- SURE / PE -----------------------------------------------------------------------

def test_sure_reduces_to_psi_without_noise(uniform7):
    rng = np.random.default_rng(54)
    obs = Observations(grid=uniform7, y=rng.standard_normal(8))
    for lam in (0.0, 0.3, 10.0):
        assert abs(sure(obs, lam, 0.0) - psi(obs, lam)) < 1e-12


def test_sure_at_zero_lambda(uniform7):
    rng = np.random.default_rng(55)
    obs = Observations(grid=uniform7, y=rng.standard_normal(8))
    sigma2 = 0.3
    # RSS(0) = 0 and trace H(0) = n+1, so SURE(0) = (n+1) sigma^2
    assert abs(sure(obs, 0.0, sigma2) - 8 * sigma2) < 1e-12


def test_sure_pe_constant_gap(uniform7):
    rng = np.random.default_rng(56)
    for _ in range(100):
        obs = Observations(grid=uniform7, y=rng.standard_normal(8))
        lam = float(10.0 ** rng.uniform(-8, 8))
        sigma2 = float(rng.uniform(0.0, 2.0))
        gap = pe_estimate(obs, lam, sigma2) - sure(obs, lam, sigma2)
        assert abs(gap - 8 * sigma2) <= 1e-12 * max(1.0, 8 * sigma2)


def test_minimize_sure_zero_sigma(uniform7):
    rng = np.random.default_rng(57)
    obs = Observations(grid=uniform7, y=rng.standard_normal(8))
    res = minimize_sure(obs, 0.0)
    assert res.lam == 0.0


def test_minimize_sure_matches_grid_argmin():
    rng = np.random.default_rng(58)
    grid = make_grid(np.arange(21) / 20)
    p = grid.knots ** 3 - grid.knots
    obs = Observations(grid=grid, y=p + np.sqrt(0.05) * rng.standard_normal(21))
    res = minimize_sure(obs, 0.05)
    lams = np.logspace(-10, 10, 2000)
    vals = np.array([sure(obs, lam, 0.05) for lam in lams])
    k = int(np.argmin(vals))
    cell = np.log10(lams[1]) - np.log10(lams[0])
    assert abs(np.log10(res.lam) - np.log10(lams[k])) <= cell * 1.01
    assert res.criterion_value <= vals[k] + 1e-12 * max(1.0, abs(vals[k]))


def test_sure_pe_same_argmin_index():
    rng = np.random.default_rng(59)
    grid = make_grid(np.arange(21) / 20)
    p = grid.knots ** 3 - grid.knots
    obs = Observations(grid=grid, y=p + np.sqrt(0.05) * rng.standard_normal(21))
    lams = np.logspace(-10, 10, 2000)
    s_vals = np.array([sure(obs, lam, 0.05) for lam in lams])
    p_vals = np.array([pe_estimate(obs, lam, 0.05) for lam in lams])
    assert int(np.argmin(s_vals)) == int(np.argmin(p_vals))


def test_minimize_sure_bracket_too_narrow(uniform7):
    # affine data: SURE decreases in lam, so the minimizer sits on the edge
    obs = Observations(grid=uniform7, y=1.0 + uniform7.knots)
    with pytest.raises(BracketTooNarrow):
        minimize_sure(obs, 1.0)


# -- leverages -------------------------------------------------------------------------

def test_leverage_uniform_frozen_value(uniform7):
    # n/(n+1) - (t_1-tbar)^2 / sum (t-tbar)^2 = 7/8 - (1/4)/(6/7) = 7/12
    assert abs(leverage_linear(uniform7, 1, 1) - 7.0 / 12.0) < 1e-14


def test_leverage_trace_identity():
    rng = np.random.default_rng(60)
    for _ in range(10):
        grid = random_grid(rng)
        total = sum(leverage_linear(grid, i, i) for i in range(1, grid.npoints + 1))
        assert abs(total - (grid.npoints - 2)) < 1e-10


def test_leverage_matches_projector_oracle():
    rng = np.random.default_rng(61)
    for grid in [make_grid(np.arange(8) / 7)] + [random_grid(rng, n=6) for _ in range(3)]:
        R = np.eye(grid.npoints) - linear_trend(grid).projector
        for i in range(1, grid.npoints + 1):
            for j in range(1, grid.npoints + 1):
                direct = float(R[:, i - 1] @ R[:, j - 1])
                assert abs(leverage_linear(grid, i, j) - direct) < 1e-12


def test_leverage_index_error(uniform7):
    with pytest.raises(IndexOutOfRange):
        leverage_linear(uniform7, 0, 1)
    with pytest.raises(IndexOutOfRange):
        leverage_linear(uniform7, 1, 9)


def test_endpoint_pair_correlation_sign(uniform7):
    # On the uniform grid the closed form at the endpoint pair is positive:
    # -1/8 + (1/4)/(6/7) > 0.
    assert leverage_linear(uniform7, 1, 8) > 0.0


# -- noise-to-signal columns --------------------------------------------------------------

def test_nsr_zero_lambda(uniform7):
    assert nsr_column(uniform7, 1, 0.0) == 0.0


def test_nsr_limit_matches_diagonal_leverage(uniform7):
    for i in (1, 4, 8):
        lim = nsr_column(uniform7, i, 1e10)
        assert abs(lim - leverage_linear(uniform7, i, i)) < 1e-5


def test_nsr_monotone(uniform7):
    for i in range(1, 9):
        vals = [nsr_column(uniform7, i, lam) for lam in (0.1, 0.5, 1.0)]
        assert vals[0] <= vals[1] + 1e-12 and vals[1] <= vals[2] + 1e-12


# -- variance estimation -----------------------------------------------------------------

def test_estimate_sigma2_affine_is_zero():
    rng = np.random.default_rng(62)
    grid = random_grid(rng, n=9)
    obs = Observations(grid=grid, y=0.5 + 2.0 * grid.knots)
    assert estimate_sigma2(obs) < 1e-20


def test_estimate_sigma2_recovers_noise_level():
    rng = np.random.default_rng(63)
    grid = make_grid(np.arange(201) / 200)
    y = (1.0 + 0.5 * grid.knots) + 0.1 * rng.standard_normal(201)
    est = estimate_sigma2(Observations(grid=grid, y=y))
    assert abs(est - 0.01) < 0.2 * 0.01


def test_estimate_sigma2_chi_square_mean():
    """(n-1) * estimate / sigma^2 averages to n-1 over many draws."""
    rng = np.random.default_rng(64)
    grid = make_grid(np.arange(21) / 20)
    n = grid.n
    R = np.eye(21) - linear_trend(grid).projector
    sigma = 0.3
    draws = sigma * rng.standard_normal((10000, 21))
    stats = np.einsum("ki,ki->k", draws @ R.T, draws @ R.T) / sigma ** 2
    se = stats.std(ddof=1) / np.sqrt(stats.size)
    assert abs(stats.mean() - (n - 1)) <= 3 * se


def test_expectation_identity_affine_and_curved():
    """E ||y - Lreg y||^2 = (n-1) sigma^2 + ||p - Lreg p||^2 (3 SE check)."""
    rng = np.random.default_rng(65)
    grid = make_grid(np.arange(21) / 20)
    n = grid.n
    P = linear_trend(grid).projector
    R = np.eye(21) - P
    sigma2 = 0.04
    for p in (1.0 + 2.0 * grid.knots, np.sin(2 * np.pi * grid.knots)):
        draws = p + np.sqrt(sigma2) * rng.standard_normal((10000, 21))
        resid = draws @ R.T
        stats = np.einsum("ki,ki->k", resid, resid)
        expected = (n - 1) * sigma2 + float(p @ R @ p)
        se = stats.std(ddof=1) / np.sqrt(stats.size)
        assert abs(stats.mean() - expected) <= 3 * se
