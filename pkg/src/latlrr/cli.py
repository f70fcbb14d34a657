"""Command-line front end.

Exit codes: 0 success, 2 usage or I/O error, 3 certificate failure,
4 solver non-convergence.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from typing import List, Optional

import numpy as np

from .counterexample import (
    SamplerFailure,
    build_canonical_counterexample,
    build_random_counterexample,
    non_uniqueness_exhibit,
)
from .io import RunReport, read_matrix, write_matrix
from .linalg import ToleranceProfile, ZeroMatrixError, pseudo_inverse
from .problems import ProblemSpec, generate_matrix
from .properties import DEFAULT_SIZES, inclusion_summary, run_suite
from .solutions import InfeasibleError
from .solver import SolverOptions, solve_latlrr, solve_lrr
from .verify import characterize_theorem2, check_feasibility

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CERTIFICATE = 3
EXIT_NONCONVERGENCE = 4

TOL_FLAGS = {
    "rank_rel_tol": ("--rank-tol", "LATLRR_RANK_TOL"),
    "eq_rel_tol": ("--eq-tol", "LATLRR_EQ_TOL"),
    "psd_tol": ("--psd-tol", "LATLRR_PSD_TOL"),
    "sigma_group_rel_tol": ("--sigma-group-tol", "LATLRR_SIGMA_GROUP_TOL"),
}


class UsageError(Exception):
    """Bad arguments or unreadable inputs; maps to exit code 2."""


def tolerance_from_args(args, environ=None) -> ToleranceProfile:
    """Flags win over ``LATLRR_*`` environment variables, which win over defaults."""
    environ = os.environ if environ is None else environ
    values = {}
    for field_name, (flag, env) in TOL_FLAGS.items():
        value = getattr(args, field_name, None)
        if value is None and env in environ:
            try:
                value = float(environ[env])
            except ValueError:
                raise UsageError(f"{env} is not a number: {environ[env]!r}") from None
        if value is not None:
            values[field_name] = value
    try:
        return ToleranceProfile(**values)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load(path) -> np.ndarray:
    try:
        return read_matrix(path)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read matrix {path}: {exc}") from None


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _input_summary(path, X) -> dict:
    return {"matrix_path": str(path), "rows": int(X.shape[0]), "cols": int(X.shape[1])}


def cmd_generate(args, tol) -> int:
    try:
        spec = ProblemSpec(args.rows, args.cols, args.rank, args.spectrum, tuple(args.groups or ()), args.ratio, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        write_matrix(args.out, generate_matrix(spec))
    except OSError as exc:
        raise UsageError(f"cannot write {args.out}: {exc}") from None
    print(f"wrote {spec.rows}x{spec.cols} rank-{spec.rank} {spec.spectrum} matrix to {args.out}")
    return EXIT_OK


def cmd_counterexample(args, tol, report: RunReport) -> int:
    X = _load(args.matrix)
    report.inputs = {**_input_summary(args.matrix, X), "mode": args.mode, "seed": args.seed,
                     "min_idem_residual": args.min_idem_residual}
    if args.mode == "canonical":
        ce = build_canonical_counterexample(X, tol)
    else:
        try:
            ce = build_random_counterexample(X, args.min_idem_residual, args.seed, tol)
        except SamplerFailure as exc:
            raise UsageError(str(exc)) from None
    report.counterexamples.append(ce)
    report.certificates.append(ce.certificate)
    report.details["verdict"] = ce.verdict
    report.details["gap"] = ce.gap
    return EXIT_OK if ce.verdict else EXIT_CERTIFICATE


def _solver_options(args) -> SolverOptions:
    try:
        return SolverOptions(
            max_iters=args.max_iters,
            penalty_init=args.penalty_init,
            penalty_growth=args.penalty_growth,
            penalty_cap=args.penalty_cap,
            primal_tol=args.primal_tol,
            change_tol=args.change_tol,
            seed=args.seed,
            init=args.init,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_solve(args, tol, report: RunReport) -> int:
    X = _load(args.matrix)
    opts = _solver_options(args)
    report.inputs = {**_input_summary(args.matrix, X), "problem": args.problem, "solver_options": opts.to_dict(),
                     "certificate_tol": args.cert_tol}
    # Solver output is only accurate to the solver tolerances; certify at cert_tol.
    cert_tol = ToleranceProfile(tol.rank_rel_tol, max(tol.eq_rel_tol, args.cert_tol),
                                max(tol.psd_tol, args.cert_tol), max(tol.sigma_group_rel_tol, args.cert_tol))
    report.details["certificate_tolerance_profile"] = cert_tol.to_dict()
    if args.problem == "latlrr":
        pair, diag = solve_latlrr(X, opts)
        report.solver_diagnostics = diag
        cert = characterize_theorem2(X, pair.Z, pair.L, cert_tol, nuclear_tol=args.cert_nuclear_tol)
        report.certificates.append(cert)
        report.details["Z"] = pair.Z
        report.details["L"] = pair.L
        certified = cert.nuclear_optimal and cert.theorem2_member
    else:
        A = X if args.rhs is None else _load(args.rhs)
        if A.shape[0] != X.shape[0]:
            raise UsageError(f"rhs has {A.shape[0]} rows, X has {X.shape[0]}")
        Z, diag = solve_lrr(X, A, opts)
        report.solver_diagnostics = diag
        closed = pseudo_inverse(X, tol) @ A
        dist = float(np.linalg.norm(Z - closed)) / max(1.0, float(np.linalg.norm(closed)))
        feas = float(np.linalg.norm(X @ Z - A)) / max(float(np.linalg.norm(A)), np.finfo(float).tiny)
        report.details.update({"Z": Z, "closed_form_distance": dist, "feasibility_residual": feas,
                               "rhs_path": None if args.rhs is None else str(args.rhs)})
        certified = dist <= args.cert_tol
    report.details["certified"] = certified
    if not diag.converged:
        return EXIT_NONCONVERGENCE
    return EXIT_OK if certified else EXIT_CERTIFICATE


def cmd_verify(args, tol, report: RunReport) -> int:
    X, Z, L = _load(args.matrix), _load(args.Z), _load(args.L)
    m, n = X.shape
    if Z.shape != (n, n) or L.shape != (m, m):
        raise UsageError(f"for X of shape {X.shape} expected Z {(n, n)} and L {(m, m)}, got {Z.shape} and {L.shape}")
    report.inputs = {**_input_summary(args.matrix, X), "Z_path": str(args.Z), "L_path": str(args.L)}
    cert = characterize_theorem2(X, Z, L, tol)
    report.certificates.append(cert)
    return EXIT_OK if (cert.rank_optimal or cert.nuclear_optimal) else EXIT_CERTIFICATE


def cmd_exhibit(args, tol, report: RunReport) -> int:
    if args.count < 2:
        raise UsageError("--count must be at least 2")
    X = _load(args.matrix)
    report.inputs = {**_input_summary(args.matrix, X), "count": args.count, "seed": args.seed}
    try:
        ex = non_uniqueness_exhibit(X, args.count, args.seed, tol)
    except SamplerFailure as exc:
        raise UsageError(str(exc)) from None
    report.certificates.extend(ex.certificates)
    report.details["exhibit"] = ex
    offdiag = ex.distances[~np.eye(len(ex.pairs), dtype=bool)]
    threshold = 0.01 * float(np.linalg.norm(ex.pairs[0].Z))
    certified = all(c.nuclear_optimal for c in ex.certificates) and bool(np.all(offdiag >= threshold))
    report.details["all_certified_distinct"] = certified
    return EXIT_OK if certified else EXIT_CERTIFICATE


def cmd_property_suite(args, tol, report: RunReport) -> int:
    sizes = args.sizes or list(DEFAULT_SIZES)
    if min(sizes) < 1:
        raise UsageError("--sizes must be positive")
    report.inputs = {"seed": args.seed, "sizes": sizes, "jobs": args.jobs, "inject_asymmetric": args.inject_asymmetric}
    results = run_suite(args.seed, sizes, tol, jobs=args.jobs, inject_asymmetric=args.inject_asymmetric)
    # The inclusion summary runs on one fixed problem with a non-singleton spectrum block.
    spec = ProblemSpec(12, 10, 4, "repeated", (2, 1, 1), seed=args.seed)
    report.problem_spec = spec
    report.details["batteries"] = results
    report.details["pass_vector"] = [r.ok for r in results]
    report.details["failures"] = {r.name: r.failures for r in results if r.failures}
    report.details["inclusion_summary"] = inclusion_summary(generate_matrix(spec), tol, args.seed)
    return EXIT_OK if all(r.ok for r in results) else EXIT_CERTIFICATE


def _add_tolerance_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("tolerances (flags override LATLRR_* environment variables)")
    for field_name, (flag, env) in TOL_FLAGS.items():
        g.add_argument(flag, dest=field_name, type=float, default=None, help=f"{field_name} (env {env})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latlrr",
        description="Closed-form LRR/LatLRR solution sets, certificates and counterexamples.",
        epilog="exit codes: 0 success, 2 usage or I/O error, 3 certificate failure, 4 solver non-convergence",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a seeded synthetic data matrix")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--spectrum", choices=["generic", "repeated", "decaying"], default="generic")
    p.add_argument("--groups", type=_int_list, default=None, help="repeated-spectrum group sizes, e.g. 3,2")
    p.add_argument("--ratio", type=float, default=0.5, help="decaying-spectrum ratio")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_tolerance_flags(p)

    p = sub.add_parser("counterexample", help="nuclear optimum that is not a rank optimum")
    p.add_argument("matrix")
    p.add_argument("--mode", choices=["canonical", "random"], default="canonical")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-idem-residual", type=float, default=0.05)
    p.add_argument("--out", required=True)
    _add_tolerance_flags(p)

    p = sub.add_parser("solve", help="run the iterative solver and certify its output")
    p.add_argument("matrix")
    p.add_argument("--problem", choices=["latlrr", "lrr"], default="latlrr")
    p.add_argument("--rhs", default=None, help="matrix file for A in A = XZ (lrr only; default A = X)")
    defaults = SolverOptions()
    p.add_argument("--max-iters", type=int, default=defaults.max_iters)
    p.add_argument("--penalty-init", type=float, default=None)
    p.add_argument("--penalty-growth", type=float, default=defaults.penalty_growth)
    p.add_argument("--penalty-cap", type=float, default=None)
    p.add_argument("--primal-tol", type=float, default=defaults.primal_tol)
    p.add_argument("--change-tol", type=float, default=defaults.change_tol)
    p.add_argument("--seed", type=int, default=defaults.seed)
    p.add_argument("--init", choices=["zeros", "random"], default=defaults.init)
    p.add_argument("--cert-tol", type=float, default=1e-4, help="tolerance for certifying solver output")
    p.add_argument("--cert-nuclear-tol", type=float, default=1e-5, help="nuclear objective slack per unit rank")
    p.add_argument("--out", required=True)
    _add_tolerance_flags(p)

    p = sub.add_parser("verify", help="certify a supplied (Z, L) pair")
    p.add_argument("matrix")
    p.add_argument("Z")
    p.add_argument("L")
    p.add_argument("--out", required=True)
    _add_tolerance_flags(p)

    p = sub.add_parser("exhibit", help="several distinct certified nuclear optima")
    p.add_argument("matrix")
    p.add_argument("--count", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_tolerance_flags(p)

    p = sub.add_parser("property-suite", help="run every property battery")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sizes", type=_int_list, default=None, help="comma-separated size caps, e.g. 10,30,60")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--inject-asymmetric", action="store_true",
                   help="add an asymmetric matrix to the trace-bound battery")
    p.add_argument("--out", required=True)
    _add_tolerance_flags(p)
    return parser


COMMANDS = {
    "counterexample": cmd_counterexample,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "exhibit": cmd_exhibit,
    "property-suite": cmd_property_suite,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        tol = tolerance_from_args(args)
        if args.command == "generate":
            return cmd_generate(args, tol)
        report = RunReport(command=args.command, tolerance_profile=tol.to_dict())
        start = time.perf_counter()
        code = COMMANDS[args.command](args, tol, report)
        report.wall_time_ms = (time.perf_counter() - start) * 1e3
        report.details["exit_code"] = code
        try:
            report.write(args.out)
        except OSError as exc:
            raise UsageError(f"cannot write report {args.out}: {exc}") from None
        return code
    except (UsageError, ZeroMatrixError, InfeasibleError) as exc:
        print(f"latlrr {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
