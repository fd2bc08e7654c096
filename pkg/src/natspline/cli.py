"""Command-line interface.

Subcommands: fit, figures, matrices, select, blup.  Input files are headered
CSV with columns t and y; unsorted rows are sorted by t with a warning, while
duplicate abscissae are a hard error.  All numeric output uses the shortest
round-trip decimal representation, so identical inputs and flags produce
byte-identical files.  The NATSPLINE_OUT environment variable, when set,
overrides any configured output directory.

Exit codes: 0 success, 2 malformed input or flags, 3 selector found no
smoothing parameter, 4 numerical failure.
"""

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .basis import build_basis, coefficients_for, eval_spline
from .core import Observations, make_grid, unflatten
from .errors import NatsplineError
from .penalty import build_C, build_Ppen
from .select import (
    NO_SOLUTION,
    SelectionConfig,
    lambda_band,
    minimize_sure,
    solve_noise_match,
)
from .smoother import general_fit, general_hat, hat_matrix, smooth_natural

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NO_SOLUTION = 3
EXIT_NUMERICAL = 4


class InputError(Exception):
    pass


class NoSolutionExit(Exception):
    pass


def _fmt(x: float) -> str:
    # repr of a Python float is the shortest decimal that round-trips.
    return repr(float(x))


def read_ty_csv(path):
    """Read a t,y CSV; returns sorted arrays.  Extra columns are ignored."""
    try:
        fh = open(path, "r", encoding="utf-8-sig", newline="")
    except OSError as exc:
        raise InputError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise InputError(f"{path}: empty file")
        fields = [f.strip() for f in reader.fieldnames]
        if "t" not in fields or "y" not in fields:
            raise InputError(
                f"{path}: header must contain columns 't' and 'y', got {fields}")
        t_vals, y_vals = [], []
        for lineno, row in enumerate(reader, start=2):
            try:
                t = float(row["t"])
                y = float(row["y"])
            except (TypeError, ValueError, KeyError):
                raise InputError(
                    f"{path}:{lineno}: could not parse t,y from {row!r}") from None
            if not (np.isfinite(t) and np.isfinite(y)):
                raise InputError(f"{path}:{lineno}: non-finite value")
            t_vals.append(t)
            y_vals.append(y)
    if len(t_vals) < 3:
        raise InputError(f"{path}: need at least 3 rows, got {len(t_vals)}")
    t = np.array(t_vals)
    y = np.array(y_vals)
    order = np.argsort(t, kind="stable")
    if not np.array_equal(order, np.arange(t.size)):
        print(f"warning: {path} rows were not sorted by t; sorting", file=sys.stderr)
        t, y = t[order], y[order]
    dup = np.flatnonzero(np.diff(t) == 0.0)
    if dup.size:
        raise InputError(f"{path}: duplicate t value {t[dup[0]]!r}")
    return t, y


def _out_dir(flag_value) -> Path:
    env = os.environ.get("NATSPLINE_OUT")
    out = Path(env) if env else Path(flag_value)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create output directory {out}: {exc}") from exc
    return out


def _write_rows(path: Path, header: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _parse_a(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise InputError(f"--a expects three comma-separated numbers, got {text!r}")
    try:
        a0, a1, a2 = (float(p) for p in parts)
    except ValueError:
        raise InputError(f"--a expects numbers, got {text!r}") from None
    return a0, a1, a2


def _selection_config(args, sigma2=None) -> SelectionConfig:
    lo, hi = 1e-10, 1e10
    if getattr(args, "bracket", None):
        parts = args.bracket.split(",")
        if len(parts) != 2:
            raise InputError("--bracket expects 'low,high'")
        lo, hi = float(parts[0]), float(parts[1])
    return SelectionConfig(sigma2=sigma2 if sigma2 is not None else 0.0,
                           epsilon=args.epsilon,
                           lambda_bracket=(lo, hi))


def _select_lambda(obs: Observations, args) -> tuple[float, dict]:
    """Run the requested selector; returns (lambda, diagnostics)."""
    if args.selector == "noise-match":
        if args.w_norm2 is None:
            raise InputError("--selector noise-match requires --w-norm2")
        res = solve_noise_match(obs, args.w_norm2, _selection_config(args))
        if res.lam is NO_SOLUTION:
            raise NoSolutionExit(
                "noise matching has no solution: the existence condition "
                "||y - Lreg y||^2 > ||w||^2 fails")
        return res.lam, {"method": "noise_match", "criterion_value": res.criterion_value,
                         "w_norm2": args.w_norm2}
    if args.selector == "band":
        if args.sigma2 is None:
            raise InputError("--selector band requires --sigma2")
        lower, upper = lambda_band(obs, _selection_config(args, sigma2=args.sigma2))
        if lower.lam is NO_SOLUTION:
            raise NoSolutionExit(
                "no band endpoint exists: the existence condition "
                "||y - Lreg y||^2 > (n+1)(1-eps) sigma^2 fails")
        diag = {"method": "band", "sigma2": args.sigma2, "epsilon": args.epsilon,
                "lambda_lower": lower.lam,
                "lambda_upper": None if upper.lam is NO_SOLUTION else upper.lam}
        if upper.lam is NO_SOLUTION:
            return lower.lam, diag
        return float(np.sqrt(lower.lam * upper.lam)), diag
    if args.selector == "sure":
        if args.sigma2 is None:
            raise InputError("--selector sure requires --sigma2")
        res = minimize_sure(obs, args.sigma2,
                            cfg=_selection_config(args, sigma2=args.sigma2))
        return res.lam, {"method": "sure", "sigma2": args.sigma2,
                         "criterion_value": res.criterion_value}
    raise InputError(f"unknown selector {args.selector!r}")


def cmd_fit(args) -> int:
    if (args.lam is None) == (args.selector is None):
        raise InputError("exactly one of --lambda and --selector must be given")
    t, y = read_ty_csv(args.input)
    grid = make_grid(t)
    obs = Observations(grid=grid, y=y)
    out = _out_dir(args.out)

    selector_diag = None
    if args.selector is not None:
        if args.penalty != "curvature":
            raise InputError("selectors are defined for the curvature penalty only; "
                             "use --lambda with --penalty combined")
        lam, selector_diag = _select_lambda(obs, args)
    else:
        lam = args.lam
        if lam < 0:
            raise InputError("--lambda must be >= 0")

    basis = build_basis(grid)
    if args.penalty == "curvature":
        fit = smooth_natural(obs, lam)
        coords = fit.coords
        coeffs = fit.fitted_coeffs
        trace_h = float(np.trace(hat_matrix(grid, build_C(grid, basis), lam).H))
    else:
        a0, a1, a2 = _parse_a(args.a)
        Ppen = build_Ppen(grid, basis, a0, a1, a2)
        if lam == 0:
            raise InputError("--penalty combined requires --lambda > 0")
        x = general_fit(Ppen, y, lam)
        coords = unflatten(x)
        coeffs = coefficients_for(grid, coords, basis=basis)
        Hfull = general_hat(Ppen, lam)
        trace_h = float(np.trace(Hfull[1:-1, 1:-1]))

    p_hat = np.asarray(coords.values)
    resid = y - p_hat
    rss = float(resid @ resid)

    _write_rows(out / "fit.csv", "t,y,p_hat,residual",
                zip(t, y, p_hat, resid))
    ts = np.linspace(grid.knots[0], grid.knots[-1], args.eval_points)
    _write_rows(out / "spline.csv", "t,s,s1,s2,s3",
                zip(ts, *(eval_spline(coeffs, grid, ts, d) for d in range(4))))
    summary = {
        "lambda": float(lam),
        "rss": rss,
        "trace_h": trace_h,
        "u1_hat": float(coords.u_first),
        "un1_hat": float(coords.u_last),
        "penalty": args.penalty if args.penalty == "curvature" else f"combined({args.a})",
        "n_intervals": grid.n,
        "selector": selector_diag,
    }
    with open(out / "summary.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    if args.render:
        from . import figures as figmod

        figmod.render_fit_png(grid, y, coeffs, out / "fit.png", lam)
    return EXIT_OK


def cmd_figures(args) -> int:
    from . import figures as figmod

    if args.n < 2:
        raise InputError("--n must be >= 2")
    grid = figmod.uniform_grid(args.n)
    out = _out_dir(args.out)
    for name in figmod.FIGURES:
        figmod.write_figure_csv(name, grid, out / f"{name}.csv")
        if args.render:
            figmod.render_figure_png(name, grid, out / f"{name}.png")
    return EXIT_OK


def cmd_matrices(args) -> int:
    if args.n < 2:
        raise InputError("--n must be >= 2")
    grid = make_grid(np.arange(args.n + 1) / args.n)
    basis = build_basis(grid)
    which = args.which
    if which == "C":
        M = build_C(grid, basis).M
    elif which == "Ppen":
        a0, a1, a2 = _parse_a(args.a)
        M = build_Ppen(grid, basis, a0, a1, a2).M
    elif which == "U":
        M = basis.U
    elif which == "Q":
        M = basis.Q
    elif which == "V":
        M = basis.V
    else:
        raise InputError(f"unknown matrix tag {which!r}")
    for row in M:
        sys.stdout.write(",".join(_fmt(v) for v in row) + "\n")
    return EXIT_OK


def cmd_select(args) -> int:
    t, y = read_ty_csv(args.input)
    obs = Observations(grid=make_grid(t), y=y)
    if args.method == "noise-match":
        if args.w_norm2 is None:
            raise InputError("--method noise-match requires --w-norm2")
        res = solve_noise_match(obs, args.w_norm2, _selection_config(args))
        payload = {"method": "noise_match",
                   "lambda": None if res.lam is NO_SOLUTION else res.lam,
                   "criterion_value": res.criterion_value,
                   "w_norm2": args.w_norm2}
        missing = res.lam is NO_SOLUTION
    elif args.method == "band":
        if args.sigma2 is None:
            raise InputError("--method band requires --sigma2")
        lower, upper = lambda_band(obs, _selection_config(args, sigma2=args.sigma2))
        payload = {"method": "band", "sigma2": args.sigma2, "epsilon": args.epsilon,
                   "lambda_lower": None if lower.lam is NO_SOLUTION else lower.lam,
                   "lambda_upper": None if upper.lam is NO_SOLUTION else upper.lam}
        missing = lower.lam is NO_SOLUTION
    elif args.method == "sure":
        if args.sigma2 is None:
            raise InputError("--method sure requires --sigma2")
        res = minimize_sure(obs, args.sigma2,
                            cfg=_selection_config(args, sigma2=args.sigma2))
        payload = {"method": "sure", "lambda": res.lam,
                   "criterion_value": res.criterion_value, "sigma2": args.sigma2}
        missing = False
    else:
        raise InputError(f"unknown method {args.method!r}")
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    if missing:
        print("no solution: the existence condition ||y - Lreg y||^2 > ||w||^2 "
              "fails for this target", file=sys.stderr)
        return EXIT_NO_SOLUTION
    return EXIT_OK


def cmd_blup(args) -> int:
    from .bayes import equivalence

    t, y = read_ty_csv(args.input)
    grid = make_grid(t)
    basis = build_basis(grid)
    if args.penalty == "curvature":
        Ppen = build_C(grid, basis)
    else:
        a0, a1, a2 = _parse_a(args.a)
        Ppen = build_Ppen(grid, basis, a0, a1, a2)
    beta, eta, coords = equivalence(Ppen, y, args.sigma_w2, args.sigma_s2)
    lam = args.sigma_w2 / args.sigma_s2 if args.sigma_s2 > 0 else None
    payload = {
        "penalty": Ppen.kind,
        "sigma_w2": args.sigma_w2,
        "sigma_s2": args.sigma_s2,
        "lambda": lam,
        "nullspace_dim": Ppen.nullspace_dim,
        "beta_hat": [float(b) for b in beta],
        "eta_hat": [float(e) for e in eta],
        "u1_hat": float(coords.u_first),
        "un1_hat": float(coords.u_last),
        "fitted": [float(v) for v in coords.values],
    }
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="natspline",
        description="Cubic spline smoothing in the natural coordinate basis.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a penalized spline to a t,y CSV")
    p_fit.add_argument("--input", required=True)
    p_fit.add_argument("--out", default=".",
                       help="output directory (NATSPLINE_OUT overrides)")
    p_fit.add_argument("--lambda", dest="lam", type=float, default=None)
    p_fit.add_argument("--selector", choices=["noise-match", "band", "sure"],
                       default=None)
    p_fit.add_argument("--sigma2", type=float, default=None)
    p_fit.add_argument("--w-norm2", type=float, default=None)
    p_fit.add_argument("--epsilon", type=float, default=0.2)
    p_fit.add_argument("--bracket", default=None, help="lambda bracket 'low,high'")
    p_fit.add_argument("--penalty", choices=["curvature", "combined"],
                       default="curvature")
    p_fit.add_argument("--a", default="1,1,1",
                       help="a0,a1,a2 for --penalty combined")
    p_fit.add_argument("--eval-points", type=int, default=200)
    p_fit.add_argument("--render", action=argparse.BooleanOptionalAction,
                       default=True, help="also write fit.png")
    p_fit.set_defaults(func=cmd_fit)

    p_figs = sub.add_parser("figures", help="emit report-figure data (and PNGs)")
    p_figs.add_argument("--n", type=int, default=7,
                        help="number of intervals for the uniform grid")
    p_figs.add_argument("--out", default=".",
                        help="output directory (NATSPLINE_OUT overrides)")
    p_figs.add_argument("--render", action=argparse.BooleanOptionalAction,
                        default=True, help="also write PNG renderings")
    p_figs.set_defaults(func=cmd_figures)

    p_mat = sub.add_parser("matrices", help="print a basis/penalty matrix as CSV")
    p_mat.add_argument("--n", type=int, required=True)
    p_mat.add_argument("--which", required=True,
                       choices=["C", "Ppen", "U", "Q", "V"])
    p_mat.add_argument("--a", default="1,1,1")
    p_mat.set_defaults(func=cmd_matrices)

    p_sel = sub.add_parser("select", help="choose a smoothing parameter")
    p_sel.add_argument("--input", required=True)
    p_sel.add_argument("--method", required=True,
                       choices=["noise-match", "band", "sure"])
    p_sel.add_argument("--w-norm2", type=float, default=None)
    p_sel.add_argument("--sigma2", type=float, default=None)
    p_sel.add_argument("--epsilon", type=float, default=0.2)
    p_sel.add_argument("--bracket", default=None)
    p_sel.set_defaults(func=cmd_select)

    p_blup = sub.add_parser("blup", help="mixed-model decomposition of a fit")
    p_blup.add_argument("--input", required=True)
    p_blup.add_argument("--sigma-w2", type=float, required=True)
    p_blup.add_argument("--sigma-s2", type=float, required=True)
    p_blup.add_argument("--penalty", choices=["curvature", "combined"],
                        default="curvature")
    p_blup.add_argument("--a", default="1,1,1")
    p_blup.set_defaults(func=cmd_blup)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NoSolutionExit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    except NatsplineError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
