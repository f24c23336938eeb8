"""Command-line front end.

    eqprox validate SPEC [--json]
    eqprox run SPEC [--force] [--trace PATH] [--json]
    eqprox sweep SPEC [--out PATH] [--jobs N]
    eqprox compare SPEC [--out PATH] [--json] [--jobs N]
    eqprox oracle SPEC [--point W] [--lam L] [--resolution R]

Exit codes: 0 success, 2 bad spec or I/O error, 3 convergence conditions
violated, 4 iteration cap reached, 5 inner prox failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence, TextIO

import numpy as np

from . import bench
from .params import SolverConfig, validate_all
from .prox import ProxError, ProxQuery, brute_force_prox_oracle
from .runspec import RunSpec, SpecError, load_spec, reference_point, sweep_grid
from .solver import IterationRecord, RunResult, StopReason, run

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONDITIONS = 3
EXIT_MAX_ITER = 4
EXIT_PROX_FAILURE = 5

STOP_EXIT = {
    StopReason.RESIDUAL: EXIT_OK,
    StopReason.MAX_ITER: EXIT_MAX_ITER,
    StopReason.PROX_FAILURE: EXIT_PROX_FAILURE,
}

SEED_ENV = "EQPROX_SEED"


def fmt(v: float) -> str:
    """17 significant digits: round-trips any double."""
    return format(float(v), ".17g")


def trace_header(dim: int) -> list:
    cols = ["k"]
    for prefix in ("x", "y", "z"):
        cols += [f"{prefix}_{i}" for i in range(dim)]
    cols += ["residual", "rho_k", "lambda_k", "fejer_slack_35", "fejer_slack_36", "gamma_k", "gamma_bar_k"]
    return cols


def trace_row(record: IterationRecord) -> list:
    row = [str(record.k)]
    for vec in (record.x_next, record.y, record.z):
        row += [fmt(v) for v in vec]
    row += [fmt(record.residual), fmt(record.rho_k), fmt(record.lambda_k)]
    d = record.diagnostics
    if d is None:
        row += ["", "", "", ""]
    else:
        row += [fmt(d.slack_plain), fmt(d.slack_damped), fmt(d.gamma_k), fmt(d.gamma_bar_k)]
    return row


class TraceWriter:
    """Streams iteration records as CSV, one flushed row per iteration."""

    def __init__(self, stream: TextIO, dim: int):
        self.stream = stream
        self.writer = csv.writer(stream, lineterminator="\n")
        self.writer.writerow(trace_header(dim))

    def __call__(self, record: IterationRecord) -> None:
        self.writer.writerow(trace_row(record))
        self.stream.flush()


# --------------------------------------------------------------------------
# commands


def _seed(args) -> int:
    return int(args.seed)


def cmd_validate(spec: RunSpec, args, out: TextIO) -> int:
    problem = spec.build_problem(_seed(args))
    configs = spec.method_configs() if spec.methods else {"config": spec.config()}
    ok = True
    payload = {}
    for name, cfg in configs.items():
        report = validate_all(problem, cfg, spec.horizon)
        ok = ok and report.all_passed
        payload[name] = report
    if args.json:
        out.write(json.dumps({k: r.to_dict() for k, r in payload.items()}, indent=2, sort_keys=True) + "\n")
    else:
        for name, report in payload.items():
            if len(payload) > 1:
                out.write(f"== {name}\n")
            out.write(report.to_text() + "\n")
    return EXIT_OK if ok else EXIT_CONDITIONS


def _summary(result: RunResult) -> dict:
    return {
        "final": [float(v) for v in result.final],
        "iterations": result.iterations,
        "stop_reason": result.stop_reason.value,
        "wall_time": result.wall_time,
        "message": result.message,
    }


def _run_one(spec: RunSpec, problem, cfg: SolverConfig, trace_path: Optional[str]) -> RunResult:
    if trace_path is None:
        return run(problem, cfg, spec.init, prox=spec.prox, keep_trace=False)
    with open(trace_path, "w", newline="", encoding="utf-8") as fh:
        writer = TraceWriter(fh, problem.dim)
        return run(problem, cfg, spec.init, prox=spec.prox, on_record=writer, keep_trace=False)


def cmd_run(spec: RunSpec, args, out: TextIO, err: TextIO) -> int:
    problem = spec.build_problem(_seed(args))
    if spec.is_compare:
        return _compare(spec, problem, args, out, err)
    cfg = spec.config()
    report = validate_all(problem, cfg, spec.horizon)
    if not report.all_passed and not args.force:
        err.write("convergence conditions violated (use --force to run anyway):\n")
        for e in report.failed():
            err.write(f"  {e.condition} {e.status}\n")
        return EXIT_CONDITIONS
    trace_path = args.trace or spec.trace_path
    try:
        result = _run_one(spec, problem, cfg, trace_path)
    except OSError as exc:
        err.write(f"error: cannot write trace: {exc}\n")
        return EXIT_USAGE
    summary = _summary(result)
    if not report.all_passed:
        summary["conditions_violated"] = sorted({e.condition for e in report.failed()})
    if args.json:
        out.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    else:
        out.write(f"final:       {' '.join(fmt(v) for v in result.final)}\n")
        out.write(f"iterations:  {result.iterations}\n")
        out.write(f"stop reason: {result.stop_reason.value}\n")
        out.write(f"wall time:   {result.wall_time:.6f} s\n")
        if result.message:
            out.write(f"message:     {result.message}\n")
    return STOP_EXIT[result.stop_reason]


def _sweep_rows(spec: RunSpec, problem, grid: list, jobs: int) -> list:
    configs = [spec.config(point) for point in grid]

    def one(cfg: SolverConfig):
        res = run(problem, cfg, spec.init, prox=spec.prox, keep_trace=False)
        flags = validate_all(problem, cfg, spec.horizon).summary_flags()
        return res, flags

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, configs))
    return [one(cfg) for cfg in configs]


def cmd_sweep(spec: RunSpec, args, out: TextIO, err: TextIO) -> int:
    grid = sweep_grid(spec)
    problem = spec.build_problem(_seed(args))
    results = _sweep_rows(spec, problem, grid, max(1, args.jobs))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(
        ["theta", "beta", "rho_k", "lambda_k", "iterations", "stop_reason"]
        + [f"final_{i}" for i in range(problem.dim)]
        + ["C1", "C2", "C3", "C4"]
    )
    for point, (res, flags) in zip(grid, results):
        w.writerow(
            [fmt(point[k]) for k in ("theta", "beta", "rho_k", "lambda_k")]
            + [str(res.iterations), res.stop_reason.value]
            + [fmt(v) for v in res.final]
            + [flags.get(c, "") for c in ("C1", "C2", "C3", "C4")]
        )
    return _emit(buf.getvalue(), args.out, out, err)


def _emit(text: str, path: Optional[str], out: TextIO, err: TextIO) -> int:
    if path is None:
        out.write(text)
        return EXIT_OK
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        err.write(f"error: cannot write {path}: {exc}\n")
        return EXIT_USAGE
    return EXIT_OK


def _compare(spec: RunSpec, problem, args, out: TextIO, err: TextIO = sys.stderr) -> int:
    configs = spec.method_configs()
    if len(configs) < 2:
        err.write("error: compare needs at least two [method.<name>] sections\n")
        return EXIT_USAGE
    rows = bench.compare_methods(problem, configs, spec.init, prox=spec.prox, jobs=max(1, getattr(args, "jobs", 1)))
    ref = reference_point(spec, problem)
    reported_case = spec.family == "max_type" and problem.params.get("p") == 2 and problem.params.get("q") == 99

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method"] + [f"final_{i}" for i in range(problem.dim)]
               + ["iterations", "stop_reason", "wall_time", "reported_final", "reported_iterations"])
    for r in rows:
        reported = bench.REPORTED_RESULTS.get(r.method) if reported_case else None
        w.writerow([r.method] + [fmt(v) for v in r.final] + [str(r.iterations), r.stop_reason, f"{r.wall_time:.6f}"]
                   + ([repr(reported["final"]), str(reported["iterations"])] if reported else ["", ""]))
    if ref is not None:
        w.writerow(["oracle"] + [fmt(v) for v in ref] + ["", "reference", "", "", ""])

    if getattr(args, "json", False):
        payload = {
            "rows": [
                {"method": r.method, "final": [float(v) for v in r.final], "iterations": r.iterations,
                 "stop_reason": r.stop_reason, "wall_time": r.wall_time}
                for r in rows
            ],
            "oracle": None if ref is None else [float(v) for v in ref],
        }
        if reported_case:
            payload["reported"] = bench.REPORTED_RESULTS
        out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        out.write(bench.reproduction_report(rows, None if ref is None or problem.dim != 1 else float(ref[0])) + "\n")
    out_path = getattr(args, "out", None)
    if out_path is not None:
        code = _emit(buf.getvalue(), out_path, out, err)
        if code:
            return code
    elif not getattr(args, "json", False):
        out.write("\n" + buf.getvalue())

    if any(r.stop_reason == StopReason.PROX_FAILURE.value for r in rows):
        return EXIT_PROX_FAILURE
    if all(bench.converged(r) for r in rows):
        return EXIT_OK
    return EXIT_MAX_ITER


def cmd_compare(spec: RunSpec, args, out: TextIO, err: TextIO) -> int:
    problem = spec.build_problem(_seed(args))
    return _compare(spec, problem, args, out, err)


def cmd_oracle(spec: RunSpec, args, out: TextIO, err: TextIO) -> int:
    problem = spec.build_problem(_seed(args))
    payload = {}
    if spec.family == "max_type":
        x_star, g_star = bench.reference_minimizer(problem.params["p"], problem.params["q"], problem.params["bracket"])
        payload["reference_minimizer"] = {"x": x_star, "g": g_star}
    if args.point is not None:
        lam = args.lam if args.lam is not None else spec.config().lambda_k(1)
        try:
            res = brute_force_prox_oracle(ProxQuery(np.array([args.point]), lam, problem), args.resolution)
        except (ProxError, ValueError) as exc:
            err.write(f"error: {exc}\n")
            return EXIT_PROX_FAILURE
        payload["prox"] = {
            "base": args.point, "lambda": lam, "minimizer": float(res.minimizer[0]),
            "objective": res.objective, "evaluations": res.evaluations, "window": list(res.bracket),
        }
    out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    default_seed = int(os.environ.get(SEED_ENV, "0"))
    parser = argparse.ArgumentParser(prog="eqprox", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=default_seed,
                        help=f"seed for construction-time sampling (default: ${SEED_ENV} or 0)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the convergence conditions")
    p.add_argument("spec")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("run", help="run one solve")
    p.add_argument("spec")
    p.add_argument("--force", action="store_true", help="run even if conditions fail")
    p.add_argument("--trace", help="CSV trace path (overrides [output] trace)")
    p.add_argument("--json", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")

    p = sub.add_parser("sweep", help="grid sweep over theta, beta, rho_k, lambda_k")
    p.add_argument("spec")
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("compare", help="compare the [method.*] configurations")
    p.add_argument("spec")
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("oracle", help="brute-force prox and reference minimizer")
    p.add_argument("spec")
    p.add_argument("--point", type=float)
    p.add_argument("--lam", type=float)
    p.add_argument("--resolution", type=float, default=1e-6)
    return parser


COMMANDS = {
    "validate": lambda spec, args, out, err: cmd_validate(spec, args, out),
    "run": cmd_run,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
    "oracle": cmd_oracle,
}


def main(argv: Optional[Sequence[str]] = None, out: TextIO = None, err: TextIO = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        spec = load_spec(args.spec)
        return COMMANDS[args.command](spec, args, out, err)
    except SpecError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
