"""Command-line interface.

Exit codes: 0 success, 2 bad input or config, 3 numerical failure,
4 too many failed replications.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys

import numpy as np

from gradsample import bounds
from gradsample.errors import (
    DegenerateGradients,
    DimensionMismatch,
    DivisionByZeroProb,
    EmptyDraw,
    ExcessiveFailures,
    ParseError,
    SingularGram,
)
from gradsample.harness.config import THREADS_ENV, load_config
from gradsample.harness.diagnostics import timing_benchmark
from gradsample.harness.experiment import run_experiment
from gradsample.harness.io import emit_report, load_csv, write_csv
from gradsample.linalg import Dataset, gram_max_eigenvalue, solve_full, solve_weighted
from gradsample.probabilities import (
    Method,
    approx_leverage_probs,
    gradient_probs,
    leverage_probs,
    residual_oracle_probs,
    uniform_probs,
)
from gradsample.sampling import Scheme, draw, pilot_estimate
from gradsample.seeding import derive_seed
from gradsample.synthesis import (
    PRESETS,
    Misspec,
    ResponseSpec,
    draw_coefficients,
    generate_design,
    generate_response,
    preset,
)

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL, EXIT_FAILURES = 0, 2, 3, 4

log = logging.getLogger("gradsample")


def _write_rows(rows, out=None):
    writer = csv.writer(out or sys.stdout, lineterminator="\n")
    for row in rows:
        writer.writerow(["%.17g" % v if isinstance(v, float) else v for v in row])


def _load(args) -> Dataset:
    return load_csv(args.data, args.y_column, not args.no_header)


def _probabilities(data: Dataset, method: Method, r0: float, seed: int, sketch_rows=None):
    if method is Method.UNIFORM:
        return uniform_probs(data.n)
    if method is Method.LEVERAGE:
        return leverage_probs(data.x)
    if method is Method.APPROX_LEVERAGE:
        return approx_leverage_probs(data.x, sketch_rows or 20 * data.d, derive_seed(seed, 2))
    if method is Method.RESIDUAL_ORACLE:
        return residual_oracle_probs(data, solve_full(data).beta)
    pilot = pilot_estimate(data, r0, derive_seed(seed, 0))
    return gradient_probs(data, pilot.beta)


def cmd_generate(args) -> int:
    spec = preset(args.preset, args.sigma_x)
    x = generate_design(args.n, args.d, spec, derive_seed(args.seed, 0, 0))
    beta = draw_coefficients(args.d, derive_seed(args.seed, 0, 1))
    response = ResponseSpec(args.sigma_eps, args.misspec, args.rho, hidden_design=spec)
    y = generate_response(x, beta, response, derive_seed(args.seed, 0, 2))
    write_csv(Dataset(x, y), args.out)
    if args.beta_out:
        np.savetxt(args.beta_out, beta, fmt="%.17g")
    return EXIT_OK


def cmd_solve(args) -> int:
    data = _load(args)
    sol = solve_full(data)
    rows = [("term", "value")]
    rows += [(f"beta{j + 1}", float(b)) for j, b in enumerate(sol.beta)]
    rows += [("gram_min_eigenvalue", sol.gram_min_eigenvalue),
             ("residual_norm", sol.residual_norm), ("n", data.n)]
    _write_rows(rows)
    return EXIT_OK


def cmd_sample_solve(args) -> int:
    data = _load(args)
    full = solve_full(data)
    method = Method(args.method)
    r0 = args.r0 if args.r0 is not None else args.r
    pi = _probabilities(data, method, r0, args.seed)
    sub = draw(pi, args.r, args.scheme, derive_seed(args.seed, 1), args.redistribute)
    sol = solve_weighted(data, sub)
    report = bounds.bound_constants(data, full.beta, pi, args.delta, full.gram_min_eigenvalue)
    r_min = report.r_min
    rows = [("term", "value")]
    rows += [(f"beta{j + 1}", float(b)) for j, b in enumerate(sol.beta)]
    rows += [
        ("realized_size", sub.realized_size),
        ("error_vs_full", float(np.linalg.norm(sol.beta - full.beta))),
        ("error_bound", bounds.error_bound(report, args.r)),
        ("r_min", "infeasible" if r_min is None else r_min),
    ]
    _write_rows(rows)
    return EXIT_OK


def cmd_bound(args) -> int:
    data = _load(args)
    full = solve_full(data)
    method = Method(args.method)
    r0 = args.r0 if args.r0 is not None else args.r
    pi = _probabilities(data, method, r0, args.seed)
    report = bounds.bound_constants(data, full.beta, pi, args.delta, full.gram_min_eigenvalue)
    r_min = report.r_min
    rows = [
        ("quantity", "value"),
        ("sigma_sq_gram", report.sigma_sq_gram),
        ("sigma_sq_b", report.sigma_sq_b),
        ("max_sq_norm", report.max_sq_norm),
        ("lambda_min", report.lambda_min),
        ("delta", report.delta),
        ("error_constant", report.error_constant),
        ("r_min", "infeasible" if r_min is None else r_min),
        ("r", float(args.r)),
        ("error_bound", bounds.error_bound(report, args.r)),
        ("two_term_bound", bounds.two_term_bound(report, args.r, data.d)),
        ("bernstein_bound", bounds.bernstein_expectation_bound(report, args.r, data.n, data.d)),
        ("prediction_bound",
         bounds.prediction_bound(report, args.r, gram_max_eigenvalue(data.x))),
    ]
    if method is Method.GRADIENT:
        pilot = pilot_estimate(data, r0, derive_seed(args.seed, 0))
        gap = bounds.corollary_gap(data, full.beta, pilot.beta, args.delta,
                                   full.gram_min_eigenvalue)
        rows.append(("corollary_gap", gap))
    _write_rows(rows)
    return EXIT_OK


def cmd_experiment(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.threads is not None:
        config.threads = args.threads
    fmt = args.format or config.format
    out = args.out or config.output
    report = run_experiment(config)
    text = emit_report(report, fmt, out, include_timing=not args.no_timing)
    if out is None:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_bench(args) -> int:
    rows = [("n", "d", "method", "d1_s", "d1_pilot_s", "d2_s")]
    for method in args.method:
        for row in timing_benchmark(args.n, args.d, method, args.seed, args.r, args.repeats):
            rows.append((row.n, row.d, row.method, row.d1_s, row.d1_pilot_s, row.d2_s))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            _write_rows(rows, fh)
    else:
        _write_rows(rows)
    return EXIT_OK


def _add_data_args(p):
    p.add_argument("data", help="CSV file")
    p.add_argument("--y-column", default="-1", help="response column index or name (default: last)")
    p.add_argument("--no-header", action="store_true", help="file has no header row")


def _add_sampling_args(p):
    methods = [m.value for m in Method]
    p.add_argument("--method", choices=methods, default="gradient")
    p.add_argument("--r", type=float, required=True, help="(expected) subsample size")
    p.add_argument("--r0", type=float, help="pilot size for the gradient method (default: r)")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gradsample", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic dataset to CSV")
    p.add_argument("--preset", choices=sorted(PRESETS), default="GA")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--sigma-x", type=float, default=1.0)
    p.add_argument("--sigma-eps", type=float, default=10.0)
    p.add_argument("--misspec", choices=[m.value for m in Misspec], default="none")
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--beta-out", help="also write the true coefficients here")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="full-data least squares")
    _add_data_args(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sample-solve", help="one subsampled solve with its error bound")
    _add_data_args(p)
    _add_sampling_args(p)
    p.add_argument("--scheme", choices=[s.value for s in Scheme], default="poisson")
    p.add_argument("--redistribute", action="store_true",
                   help="spread capped inclusion mass over the other rows")
    p.set_defaults(func=cmd_sample_solve)

    p = sub.add_parser("bound", help="error-bound constants and minimum subsample size")
    _add_data_args(p)
    _add_sampling_args(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment from a YAML config")
    p.add_argument("config")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, help=f"worker threads (default: ${THREADS_ENV} or 1)")
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--no-timing", action="store_true",
                   help="omit wall-clock columns so reports are byte-reproducible")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("bench", help="time the weight and solve stages across n")
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--d", type=int, default=50)
    p.add_argument("--method", nargs="+", default=["gradient"],
                   choices=["uniform", "leverage", "approx_leverage", "gradient"])
    p.add_argument("--r", type=float, default=1000)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ExcessiveFailures as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURES
    except (SingularGram, DegenerateGradients, DivisionByZeroProb, EmptyDraw) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ParseError, DimensionMismatch, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
