"""Command-line entry point: ``csgsor {alpha,solve,bench,spectrum,export}``.

Exit codes: 0 success, 1 usage or config error, 2 some solve did not
converge, 3 numerical failure (e.g. a matrix that should be SPD is not).
"""
from __future__ import annotations

import argparse
import json
import sys

from . import bench
from .io import export_problem
from .linalg import NotPositiveDefinite
from .problems import ProblemSpec, build_problem

EXIT_OK, EXIT_USAGE, EXIT_NOCONV, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_problem_args(p, with_m=True):
    p.add_argument("--example", type=int, choices=(1, 2, 3, 4), required=True)
    if with_m:
        p.add_argument("--m", type=int, required=True, help="grid points per direction")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="csgsor", description="GSOR, MHSS and GMRES solvers for complex symmetric systems (W + iT) u = b.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("alpha", help="estimate rho(W^-1 T) and the optimal GSOR parameter")
    _add_problem_args(p)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--maxit", type=int, default=1000)

    p = sub.add_parser("solve", help="run one solver on one problem")
    _add_problem_args(p)
    p.add_argument("--method", required=True, choices=("gsor", "mhss", "gmres", "gsor-gmres"))
    g = p.add_mutually_exclusive_group()
    g.add_argument("--alpha", type=float)
    g.add_argument("--alpha-source", choices=("computed", "paper"), default="paper")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--maxit", type=int, default=2000)
    p.add_argument("--restart", type=int, default=10)

    p = sub.add_parser("bench", help="run a suite described by a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "markdown"), default="csv")

    p = sub.add_parser("spectrum", help="write eigenvalues of G_alpha, P^-1 A (and A) as CSV")
    _add_problem_args(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("export", help="write W, T (Matrix Market) and p, q, b (text)")
    _add_problem_args(p)
    p.add_argument("--out-dir", required=True)
    return parser


def _cmd_alpha(args) -> int:
    est, alpha = bench.estimate_optimal_alpha(ProblemSpec(args.example, args.m), args.tol, args.maxit)
    table = bench.PUBLISHED_ALPHA["GSOR"][args.example].get(args.m)
    print(f"example={args.example} m={args.m} rho={est.rho:.10g} alpha*={alpha:.6f} "
          f"power_iterations={est.iterations} converged={str(est.converged).lower()}"
          + (f" published_alpha*={table}" if table is not None else ""))
    return EXIT_OK


def _cmd_solve(args) -> int:
    spec = ProblemSpec(args.example, args.m)
    if args.alpha is not None:
        alpha = bench.resolve_alpha(args.method, spec, "explicit", args.alpha)
    else:
        alpha = bench.resolve_alpha(args.method, spec, args.alpha_source)
    row = bench.solve_one(spec, args.method, alpha, args.tol, args.maxit, args.restart)
    print(bench.report_csv([row]), end="")
    return EXIT_OK if row.converged else EXIT_NOCONV


def _cmd_bench(args) -> int:
    config = bench.load_config(args.config)
    rows = bench.run_bench(config)
    if args.out:
        bench.export_report(rows, args.format, args.out)
    text = bench.report_csv(rows) if args.format == "csv" else bench.report_markdown(rows)
    print(text, end="" if text.endswith("\n") else "\n")
    return EXIT_OK if all(r.converged for r in rows) else EXIT_NOCONV


def _cmd_spectrum(args) -> int:
    sets = bench.export_spectrum(ProblemSpec(args.example, args.m), args.alpha, args.out)
    print(json.dumps({k: len(v) for k, v in sets.items()}))
    return EXIT_OK


def _cmd_export(args) -> int:
    sys_, b = build_problem(ProblemSpec(args.example, args.m))
    for path in export_problem(sys_, b, args.out_dir):
        print(path)
    return EXIT_OK


COMMANDS = {"alpha": _cmd_alpha, "solve": _cmd_solve, "bench": _cmd_bench,
            "spectrum": _cmd_spectrum, "export": _cmd_export}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except NotPositiveDefinite as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (bench.ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
