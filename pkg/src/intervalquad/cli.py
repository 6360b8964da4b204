"""Command-line front end: JSON and CSV reports for every library capability.

Exit codes: 0 ok, 1 falsification found, 2 usage or schema error,
3 infeasible quadrature.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

from ._validation import check_fraction, check_grid_size, check_kernel, check_n_h, check_tol
from .error_profile import worst_case_profile
from .kernels import TWO_PI
from .optimal import optimal_error, solve_lambda_star
from .quadrature import InfeasibleQuadratureError, IntervalQuadrature, check_quadrature, equidistant
from .verify import GAP_TOL, RATIO_TOL, extremal_check, local_search, nu_table, perturbation_test

EXIT_OK, EXIT_FALSIFIED, EXIT_USAGE, EXIT_INFEASIBLE = 0, 1, 2, 3

SWEEP_COLUMNS = ("kernel", "n", "h", "lambda_star", "value", "equioscillation_residual")


class UsageError(Exception):
    pass




def _float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return value


def _lambda(text: str):
    return "auto" if text == "auto" else _float(text)


def _fmt(x) -> str:
    return "%.17g" % x


@dataclass
class SweepSpec:
    kernels: list[str]
    ns: list[int]
    hs: list[float] | None = None
    h_fracs: list[float] | None = None
    fmt: str = "csv"
    out: str | None = None
    seed: int = 0
    tol: float = 1e-10
    grid: int | None = None

    def combinations(self):
        """Validated ``(spec, kernel, n, h, grid)`` tuples in input order."""
        if (self.hs is None) == (self.h_fracs is None):
            raise UsageError("give exactly one of --h and --h-frac")
        tol = check_tol(self.tol)
        combos = []
        for spec in self.kernels:
            K = check_kernel(spec)
            for n in self.ns:
                if self.hs is not None:
                    hs = self.hs
                else:
                    hs = [check_fraction(f) * math.pi / n for f in self.h_fracs]
                for h in hs:
                    n_, h_ = check_n_h(n, h)
                    combos.append((spec, K, n_, h_, check_grid_size(self.grid, n_)))
        return combos, tol


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=_float, default=1e-10, help="kernel accuracy target (default 1e-10)")
    p.add_argument("--grid", type=int, default=None, help="profile grid size (default max(4096, 512 n))")
    p.add_argument("--seed", type=int, default=0, help="base seed; trial i uses seed + i")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default=None, dest="fmt")


def _add_case(p: argparse.ArgumentParser, kernel_required: bool = True) -> None:
    p.add_argument("--kernel", required=kernel_required, help='e.g. "bernoulli:2" or "poly:1,-1"')
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--h", type=_float, required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="intervalquad", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimal", help="optimal formula and its worst-case error")
    _add_case(p)
    _add_common(p)

    p = sub.add_parser("error", help="error profile of a quadrature JSON file")
    p.add_argument("quadrature", help='quadrature JSON path, or "-" for stdin')
    p.add_argument("--kernel", required=True)
    _add_common(p)

    p = sub.add_parser("verify", help="numerical optimality checks")
    modes = p.add_subparsers(dest="mode", required=True)
    m = modes.add_parser("perturb", help="random feasible competitors")
    _add_case(m)
    m.add_argument("--trials", type=int, default=200)
    _add_common(m)
    m = modes.add_parser("search", help="Nelder-Mead descent from random starts")
    _add_case(m)
    m.add_argument("--starts", type=int, default=20)
    m.add_argument("--maxiter", type=int, default=2000)
    _add_common(m)
    m = modes.add_parser("extremal", help="near-extremal saturation at the optimum")
    _add_case(m)
    m.add_argument("--delta", type=_float, default=1e-3)
    _add_common(m)
    m = modes.add_parser("nu", help="sign-change table for square-wave inputs")
    m.add_argument("--kernel", required=True)
    _add_common(m)

    p = sub.add_parser("sweep", help="table of optimal values over kernels, n and h")
    p.add_argument("--kernel", nargs="+", required=True, dest="kernels")
    p.add_argument("--n", nargs="+", type=int, required=True, dest="ns")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--h", nargs="+", type=_float, dest="hs")
    group.add_argument("--h-frac", nargs="+", type=_float, dest="h_fracs",
                       help="half-widths as fractions of pi/n")
    _add_common(p)

    p = sub.add_parser("emit", help="write the equidistant formula as quadrature JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--h", type=_float, required=True)
    p.add_argument("--lambda", type=_lambda, required=True, dest="lam",
                   help='common weight, or "auto" to take the optimal one for --kernel')
    p.add_argument("--kernel", default=None)
    _add_common(p)
    return parser


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _require_json(args) -> None:
    if args.fmt == "csv":
        raise UsageError(f"--format csv is not available for '{args.command}'")


def _csv_table(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    writer.writerows(rows)
    return buf.getvalue()


def _sweep_row(spec, report):
    return [spec, report.n, _fmt(report.h), _fmt(report.lambda_star), _fmt(report.value),
            _fmt(report.equioscillation_residual)]


def cmd_optimal(args) -> tuple[str, int]:
    K = check_kernel(args.kernel)
    n, h = check_n_h(args.n, args.h)
    report = optimal_error(K, n, h, check_tol(args.tol), check_grid_size(args.grid, n))
    if args.fmt == "csv":
        return _csv_table([_sweep_row(K.spec, report)]), EXIT_OK
    return _dump(report.to_dict()), EXIT_OK


def _read_quadrature(path: str) -> IntervalQuadrature:
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON in {path}: {exc}") from None
    return IntervalQuadrature.from_dict(data)


def cmd_error(args) -> tuple[str, int]:
    _require_json(args)
    K = check_kernel(args.kernel)
    q = check_quadrature(_read_quadrature(args.quadrature))
    prof = worst_case_profile(K, q, check_grid_size(args.grid, q.n), check_tol(args.tol))
    out = {"kernel": K.spec, "quadrature": q.to_dict(), **prof.to_dict()}
    return _dump(out), EXIT_OK


def cmd_verify(args) -> tuple[str, int]:
    _require_json(args)
    K = check_kernel(args.kernel)
    tol = check_tol(args.tol)
    if args.mode == "nu":
        rows = nu_table(K, args.grid or 8192)
        out = {
            "mode": "nu",
            "kernel": K.spec,
            "rows": [{"phi": r.label, "nu_phi": r.nu_phi, "nu_f": r.nu_f} for r in rows],
            "seed": args.seed,
            "failures": [r.label for r in rows if not r.ok],
        }
        return _dump(out), EXIT_FALSIFIED if out["failures"] else EXIT_OK
    n, h = check_n_h(args.n, args.h)
    grid = check_grid_size(args.grid, n)
    if args.mode == "perturb":
        report = perturbation_test(K, n, h, args.trials, args.seed, tol, grid)
        bad = report.min_ratio < 1 - RATIO_TOL
    elif args.mode == "search":
        report = local_search(K, n, h, args.starts, args.seed, tol, grid, args.maxiter)
        bad = report.gap < -GAP_TOL
    else:
        report = extremal_check(K, n, h, args.delta, args.seed, tol, grid)
        bad = False
    out = {"kernel": K.spec, "n": n, "h": h, **report.to_dict()}
    return _dump(out), EXIT_FALSIFIED if bad else EXIT_OK


def cmd_sweep(spec: SweepSpec) -> tuple[str, int]:
    combos, tol = spec.combinations()
    reports = [(s, optimal_error(K, n, h, tol, grid)) for s, K, n, h, grid in combos]
    if spec.fmt == "json":
        return _dump([r.to_dict() | {"kernel": s} for s, r in reports]), EXIT_OK
    return _csv_table([_sweep_row(s, r) for s, r in reports]), EXIT_OK


def cmd_emit(args) -> tuple[str, int]:
    _require_json(args)
    n, h = check_n_h(args.n, args.h)
    if args.lam == "auto":
        if args.kernel is None:
            raise UsageError("--lambda auto requires --kernel")
        K = check_kernel(args.kernel)
        lam = TWO_PI / n if K.mu == 1 else solve_lambda_star(K, n, h, check_tol(args.tol),
                                                             check_grid_size(args.grid, n))
    else:
        lam = args.lam
    return equidistant(n, h, lam).to_json() + "\n", EXIT_OK


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "optimal":
            text, code = cmd_optimal(args)
        elif args.command == "error":
            text, code = cmd_error(args)
        elif args.command == "verify":
            text, code = cmd_verify(args)
        elif args.command == "sweep":
            spec = SweepSpec(args.kernels, args.ns, args.hs, args.h_fracs, args.fmt or "csv",
                             args.out, args.seed, args.tol, args.grid)
            text, code = cmd_sweep(spec)
        else:
            text, code = cmd_emit(args)
    except InfeasibleQuadratureError as exc:
        print(f"intervalquad: infeasible quadrature: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (UsageError, ValueError, TypeError) as exc:
        print(f"intervalquad: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main(argv=None) -> None:
    sys.exit(run(argv))
