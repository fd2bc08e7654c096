"""Report-figure data series and their matplotlib renderings.

Every figure is produced as a long-format table (series, x, value) so the
numbers round-trip exactly through CSV; the optional PNG next to each table is
a plain line rendering of the same rows.  All figures live on the uniform grid
t_i = (i-1)/n.
"""

import numpy as np

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .basis import build_basis, coefficients_for, eval_spline
from .core import KnotGrid, NaturalCoordinates, make_grid
from .penalty import build_C
from .select import _trace_hat, nsr_column
from .smoother import hat_matrix

N_SAMPLES = 200
LAMBDA_GRID = np.logspace(-8.0, 2.0, N_SAMPLES)
FIG10_LAMBDAS = (0.1, 0.5, 1.0)


def uniform_grid(n: int) -> KnotGrid:
    return make_grid(np.arange(n + 1) / n)


def _sample_points(grid: KnotGrid) -> np.ndarray:
    # 200 samples with every knot among them, so knot-level identities
    # (cardinal values, boundary curvatures) appear verbatim in the tables.
    base = np.linspace(grid.knots[0], grid.knots[-1],
                       max(N_SAMPLES - (grid.npoints - 2), 2))
    return np.unique(np.concatenate([base, grid.knots]))


def _basis_curves(grid: KnotGrid, order: int) -> list[tuple[str, np.ndarray, np.ndarray]]:
    ts = _sample_points(grid)
    basis = build_basis(grid)
    out = []
    for j in range(grid.n + 3):
        e = np.zeros(grid.n + 3)
        e[j] = 1.0
        coords = NaturalCoordinates(float(e[0]), e[1:-1], float(e[-1]))
        coeffs = coefficients_for(grid, coords, basis=basis)
        out.append((f"phi{j}", ts, eval_spline(coeffs, grid, ts, order)))
    return out


def fig1_basis(grid: KnotGrid):
    """Graphs of the n+3 basis functions."""
    return _basis_curves(grid, 0)


def fig2_basis_d1(grid: KnotGrid):
    """First derivatives of the basis functions."""
    return _basis_curves(grid, 1)


def fig3_basis_d2(grid: KnotGrid):
    """Second derivatives of the basis functions."""
    return _basis_curves(grid, 2)


def fig4_nsr(grid: KnotGrid):
    """lam -> ||e_i - H(lam) e_i||^2, one curve per observation index."""
    out = []
    for i in range(1, grid.npoints + 1):
        vals = np.array([nsr_column(grid, i, lam) for lam in LAMBDA_GRID])
        out.append((f"i{i}", LAMBDA_GRID, vals))
    return out


def fig9_lreg_lines(grid: KnotGrid):
    """Regression lines t -> Lreg(e_i)(t); they share the point (tbar, 1/(n+1))."""
    ts = _sample_points(grid)
    t = grid.knots
    tbar = float(np.mean(t))
    ss = float(np.sum((t - tbar) ** 2))
    out = []
    for i in range(1, grid.npoints + 1):
        b2 = (t[i - 1] - tbar) / ss
        b1 = 1.0 / grid.npoints - b2 * tbar
        out.append((f"i{i}", ts, b1 + b2 * ts))
    return out


def fig10_hat_columns(grid: KnotGrid):
    """j -> H_{ji}(lam): hat-matrix columns at a few smoothing levels."""
    C = build_C(grid)
    idx = np.arange(1, grid.npoints + 1, dtype=float)
    out = []
    for lam in FIG10_LAMBDAS:
        H = hat_matrix(grid, C, lam).H
        for i in range(1, grid.npoints + 1):
            out.append((f"i{i},lam{lam:g}", idx, H[:, i - 1]))
    return out


def fig11_trace(grid: KnotGrid):
    """lam -> trace H(lam), from n+1 down to 2."""
    K = _middle_K_from_grid(grid)
    vals = np.array([_trace_hat(K, lam) for lam in LAMBDA_GRID])
    return [("trace", LAMBDA_GRID, vals)]


def _middle_K_from_grid(grid: KnotGrid) -> np.ndarray:
    return build_C(grid).M[1:-1, 1:-1]


FIGURES = {
    "fig1": (fig1_basis, "basis functions", "t", "value", False),
    "fig2": (fig2_basis_d1, "basis first derivatives", "t", "value", False),
    "fig3": (fig3_basis_d2, "basis second derivatives", "t", "value", False),
    "fig4": (fig4_nsr, "noise-to-signal weights", "lambda", "value", True),
    "fig9": (fig9_lreg_lines, "regression lines of unit observations", "t", "value", False),
    "fig10": (fig10_hat_columns, "hat-matrix columns", "j", "value", False),
    "fig11": (fig11_trace, "trace of the hat matrix", "lambda", "value", True),
}


def figure_rows(name: str, grid: KnotGrid) -> list[tuple[str, float, float]]:
    """Flatten one figure into (series, x, value) rows in a fixed order."""
    fn = FIGURES[name][0]
    rows = []
    for series, xs, vals in fn(grid):
        for x, v in zip(xs, vals):
            rows.append((series, float(x), float(v)))
    return rows


def write_figure_csv(name: str, grid: KnotGrid, path) -> None:
    rows = figure_rows(name, grid)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("series,x,value\n")
        for series, x, v in rows:
            fh.write(f"{series},{x!r},{v!r}\n")


def render_figure_png(name: str, grid: KnotGrid, path) -> None:
    fn, title, xlabel, ylabel, logx = FIGURES[name]
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for series, xs, vals in fn(grid):
        ax.plot(xs, vals, lw=1.0, label=series)
    if logx:
        ax.set_xscale("log")
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if len(ax.lines) <= 12:
        ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_fit_png(grid: KnotGrid, y, coeffs, path, lam: float) -> None:
    """Overview plot for the fit command: data, fitted spline, residual stems."""
    ts = np.linspace(grid.knots[0], grid.knots[-1], 400)
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.plot(ts, eval_spline(coeffs, grid, ts, 0), "-", lw=1.5, label="fit")
    ax.plot(grid.knots, y, "o", ms=4, label="data")
    ax.set_title(f"penalized spline fit (lambda={lam:g})")
    ax.set_xlabel("t")
    ax.set_ylabel("y")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
