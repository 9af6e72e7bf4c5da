"""Command-line harness: mesh export, single solves, convergence sweeps,
and a self-check suite.

Exit codes: 0 success, 2 solver failure, 3 configuration error.
"""

import argparse
import math
import sys

import numpy as np

from . import __version__
from .assembly import assemble_constraints, assemble_sip, error_norms
from .convergence import emit_csv, emit_plotdata, format_table, run_convergence
from .errors import (
    ConfigError,
    MeshTopologyError,
    NotPositiveDefiniteError,
    RankDeficiencyError,
)
from .linalg import rank_svd
from .mesh import quality_report, save_mesh_json, unit_square_poly_mesh
from .problem import builtin_case, load_problem
from .quadrature import triangle_rule
from .solve import (
    default_gamma,
    run_saddle_oracle,
    run_scsip,
    run_sip,
    symmetric_factor,
)

EXIT_OK = 0
EXIT_SOLVER = 2
EXIT_CONFIG = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _build_parser():
    parser = _Parser(prog="polydg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"polydg {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_problem=True):
        p.add_argument("--n", type=int, default=4, help="cells per side (n x n mesh)")
        p.add_argument("--he-mode", choices=["facet", "uniform"], default="facet")
        if with_problem:
            p.add_argument("--case", default=None, help="built-in case name")
            p.add_argument("--config", default=None, help="problem config file (JSON/TOML)")
            p.add_argument("--k", type=int, default=2, help="polynomial degree (>= 2)")
            p.add_argument("--gamma", type=float, default=None,
                           help="penalty parameter (default 2k(k+1))")
            p.add_argument("--method", choices=["sip", "scsip", "saddle"], default="scsip")
            p.add_argument("--shared-basis", action="store_true",
                           help="reuse the first cell's kernel basis (constant A only)")
            p.add_argument("--threads", type=int, default=1)

    p_mesh = sub.add_parser("mesh", help="build a mesh, print its quality report")
    common(p_mesh, with_problem=False)
    p_mesh.add_argument("--out", default=None, help="write mesh JSON here")

    p_solve = sub.add_parser("solve", help="solve one problem on one mesh")
    common(p_solve)
    p_solve.add_argument("--out", default=None, help="write cell coefficients (npz)")

    p_conv = sub.add_parser("convergence", help="error sweep over mesh sizes")
    common(p_conv)
    p_conv.add_argument("--n-list", default="4,8,16,32",
                        help="comma-separated ascending mesh sizes")
    p_conv.add_argument("--out", default=None, help="write sweep CSV here")
    p_conv.add_argument("--plot-out", default=None, help="write log-log plot data here")
    p_conv.set_defaults(he_mode="uniform")

    p_check = sub.add_parser("check", help="run the built-in invariant suite")
    p_check.add_argument("--n", type=int, default=4)

    return parser


def _load_case(args):
    if args.config:
        if args.case:
            raise ConfigError("--case and --config are mutually exclusive")
        return load_problem(args.config)
    return builtin_case(args.case or "poisson-sin")


def _cmd_mesh(args):
    poly = unit_square_poly_mesh(args.n, args.he_mode)
    report = quality_report(poly)
    print(report.to_text())
    if args.out:
        save_mesh_json(poly, args.out)
        print(f"mesh written to {args.out}")
    return EXIT_OK


def _cmd_solve(args):
    problem = _load_case(args)
    poly = unit_square_poly_mesh(args.n, args.he_mode)
    runner = {"sip": run_sip, "scsip": run_scsip, "saddle": run_saddle_oracle}[args.method]
    kwargs = {"gamma": args.gamma}
    if args.method == "scsip":
        kwargs.update(shared_basis=args.shared_basis, threads=args.threads)
    report = runner(poly, args.k, problem, **kwargs)
    print(f"method:    {report.method}")
    print(f"unknowns:  {report.unknowns}")
    print(f"residual:  {report.residual:.3e}")
    print(f"wall time: {report.wall_time:.3f} s")
    if report.multiplier_norm is not None:
        print(f"multiplier norm: {report.multiplier_norm:.6e}")
    if problem.exact is not None:
        l2, h1 = error_norms(report.solution, problem.exact, poly)
        print(f"l2 error:  {l2:.6e}")
        print(f"h1 error:  {h1:.6e}")
    if args.out:
        np.savez(args.out, degree=report.solution.degree,
                 shifts=report.solution.shifts, coeffs=report.solution.coeffs)
        print(f"solution written to {args.out}")
    return EXIT_OK


def _cmd_convergence(args):
    try:
        n_list = [int(s) for s in args.n_list.split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --n-list: {exc}") from exc
    problem = _load_case(args)
    rows = run_convergence(problem, args.method, args.k, n_list,
                           gamma=args.gamma, he_mode=args.he_mode,
                           shared_basis=args.shared_basis, threads=args.threads)
    print(f"case={problem.name} method={args.method} k={args.k} "
          f"gamma={args.gamma if args.gamma is not None else default_gamma(args.k)} "
          f"he_mode={args.he_mode}")
    print(format_table(rows))
    if args.out:
        emit_csv(rows, args.out)
        print(f"csv written to {args.out}")
    if args.plot_out:
        emit_plotdata(rows, args.plot_out)
        print(f"plot data written to {args.plot_out}")
    return EXIT_OK


def _cmd_check(args):
    failures = 0

    def check(name, fn):
        nonlocal failures
        try:
            fn()
        except Exception as exc:  # report and keep going
            failures += 1
            print(f"FAIL {name}: {exc}")
        else:
            print(f"PASS {name}")

    n = args.n
    poly = unit_square_poly_mesh(n, "facet")
    problem = builtin_case("poisson-sin")

    def quadrature_exactness():
        for degree in range(0, 11):
            rule = triangle_rule(degree)
            for a in range(degree + 1):
                for b in range(degree + 1 - a):
                    val = float(rule.weights @ (rule.points[:, 0] ** a * rule.points[:, 1] ** b))
                    exact = math.factorial(a) * math.factorial(b) / math.factorial(a + b + 2)
                    if abs(val - exact) > 1e-13 * max(abs(exact), 1.0):
                        raise AssertionError(f"degree {degree} monomial x^{a}y^{b}")

    def mesh_partition():
        total = sum(float(np.sum(poly.tri.triangle_areas()[c])) for c in poly.cells)
        assert abs(total - 1.0) < 1e-12, f"areas sum to {total}"
        assert sorted(np.concatenate(poly.cells).tolist()) == list(range(len(poly.tri.triangles)))

    def rank_property():
        constraints = assemble_constraints(poly, 2, problem)
        expected = constraints.B.shape[1]
        for l in range(poly.n_cells):
            assert rank_svd(constraints.B[l]) == expected, f"cell {l}"

    def coercivity():
        sys = assemble_sip(poly, 2, default_gamma(2), problem)
        symmetric_factor(sys.to_csr())
        try:
            bad = assemble_sip(poly, 2, 0.01, problem)
            symmetric_factor(bad.to_csr())
        except NotPositiveDefiniteError:
            return
        raise AssertionError("tiny penalty unexpectedly positive definite")

    def oracle_equivalence():
        a = run_scsip(poly, 2, problem)
        b = run_saddle_oracle(poly, 2, problem)
        diff = np.max(np.abs(a.solution.coeffs - b.solution.coeffs))
        assert diff < 1e-8 * max(1.0, np.max(np.abs(a.solution.coeffs))), f"diff {diff}"

    check("quadrature exactness sweep", quadrature_exactness)
    check("mesh partition invariants", mesh_partition)
    check("constraint rank property", rank_property)
    check("coercivity and small-penalty detection", coercivity)
    check("condensation/saddle equivalence", oracle_equivalence)
    return EXIT_OK if failures == 0 else EXIT_SOLVER


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "mesh":
            return _cmd_mesh(args)
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "convergence":
            return _cmd_convergence(args)
        return _cmd_check(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NotPositiveDefiniteError, RankDeficiencyError, MeshTopologyError,
            RuntimeError, ValueError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
