"""Command line front end.

fit        solve one dataset file at explicit query points
sweep      run a named preset over its full query grid
experiment alias of sweep that also writes the preset's extra studies
check      run the self-check suite and print the pass/fail table

Exit codes: 0 success, 1 invariant failure (a solve breached a runtime
invariant or a check failed), 2 bad input.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from .checks import MUTATIONS, check_suite
from .dataio import (
    DataIOError,
    _csv_line,
    canonical_json,
    fmt_float,
    read_dataset,
    trace_csv,
    write_manifest,
    write_text,
)
from .experiments import SUMMARY_SCHEMA, ExperimentError, RunArtifact, run_experiment
from .geometry import GeometryError, ManifoldPoint
from .presets import PRESET_NAMES, preset
from .regression import (
    KERNELS,
    DCObjective,
    RegressionError,
    global_weights,
    local_weights,
)
from .solver import SolverConfig, frida_solve, validate_trace

__all__ = ["main"]

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_BAD_INPUT = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frida",
        description="Frechet regression with signed weights on curved spaces.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="solver / preset seed")
    common.add_argument(
        "--outer-max", type=int, default=None, help="outer iteration budget override"
    )
    common.add_argument(
        "--grad-tol", type=float, default=None, help="stationarity tolerance override"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", parents=[common], help="fit a dataset file at given queries")
    fit.add_argument("--data", required=True, help="dataset JSON file")
    fit.add_argument(
        "--x",
        required=True,
        help="comma-separated query values; multi-dimensional queries use ':' "
        "between components, e.g. '0.5:1.0,0.6:1.1'",
    )
    fit.add_argument("--mode", choices=("exact", "inexact"), default="exact")
    fit.add_argument("--local", action="store_true", help="local-linear weights")
    fit.add_argument("--kernel", choices=sorted(KERNELS), default="gaussian")
    fit.add_argument("--bandwidth", type=float, default=None)
    fit.add_argument("--out", required=True, help="output directory")

    for name in ("sweep", "experiment"):
        run = sub.add_parser(name, parents=[common], help=f"{name} a named preset")
        run.add_argument("--preset", required=True, choices=PRESET_NAMES)
        run.add_argument("--out", required=True, help="output directory")

    chk = sub.add_parser("check", parents=[common], help="run the self-check suite")
    chk.add_argument(
        "--mutate",
        action="append",
        choices=MUTATIONS,
        help="inject a named defect; the matching check must fail",
    )
    return parser


def _parse_queries(text: str, q: int) -> list[np.ndarray]:
    queries = []
    for token in text.split(","):
        parts = [float(p) for p in token.split(":")]
        if len(parts) != q:
            raise ValueError(
                f"query {token!r} has {len(parts)} component(s); dataset predictors have {q}"
            )
        queries.append(np.asarray(parts, dtype=float))
    return queries


def _cmd_fit(args: argparse.Namespace) -> int:
    ds = read_dataset(args.data)
    q = ds.predictors.shape[1]
    queries = _parse_queries(args.x, q)
    if args.local:
        if args.bandwidth is None:
            raise ValueError("--local requires --bandwidth")
        if q != 1:
            raise ValueError("local-linear weights are defined for scalar predictors only")
    cfg = SolverConfig(
        mode=args.mode,
        outer_max=500 if args.outer_max is None else args.outer_max,
        grad_tol=1e-8 if args.grad_tol is None else args.grad_tol,
        seed=args.seed,
    )
    safe = ds.require_safe_set()
    y0 = ManifoldPoint(ds.manifold, np.asarray(safe.center, dtype=float))
    point_dim = ds.responses.shape[1]

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files: list[str] = []
    rows: list[dict] = []
    all_valid = True
    for i, x in enumerate(queries):
        if args.local:
            weights = local_weights(ds, float(x[0]), args.kernel, args.bandwidth)
        else:
            weights = global_weights(ds, x)
        obj = DCObjective(ds, weights)
        res = frida_solve(obj, y0, cfg)
        check = validate_trace(obj, res, cfg)
        all_valid &= check.ok and res.status != "invariant_breach"
        trace_file = f"trace_q{i:03d}.csv"
        write_text(out / trace_file, trace_csv(res.trace, point_dim))
        files.append(trace_file)
        rows.append(
            {
                "index": i,
                "x": [float(v) for v in x],
                "weighting": "local" if args.local else "global",
                "status": res.status,
                "final_f": res.final_f,
                "final_grad_norm": res.final_grad_norm,
                "outer_iters": res.n_steps,
                "final_point": [float(v) for v in res.final.coords],
                "w_minus": weights.w_minus,
                "has_negative": bool(weights.has_negative),
                "valid": bool(check.ok),
                "trace_file": trace_file,
            }
        )
        print(
            f"x={','.join(fmt_float(float(v)) for v in x)}: {res.status}, "
            f"f={res.final_f:.9g}, grad={res.final_grad_norm:.3e}"
        )

    header = ["index", "x", "weighting", "status", "final_f", "final_grad_norm", "outer_iters"]
    header += [f"y{j}" for j in range(point_dim)]
    lines = [_csv_line(header)]
    for row in rows:
        lines.append(
            _csv_line(
                [
                    str(row["index"]),
                    ":".join(fmt_float(v) for v in row["x"]),
                    row["weighting"],
                    row["status"],
                    fmt_float(row["final_f"]),
                    fmt_float(row["final_grad_norm"]),
                    str(row["outer_iters"]),
                ]
                + [fmt_float(v) for v in row["final_point"]]
            )
        )
    write_text(out / "fits.csv", "".join(lines))
    files.append("fits.csv")

    summary = {
        "schema": SUMMARY_SCHEMA,
        "command": "fit",
        "data": str(args.data),
        "mode": args.mode,
        "seed": args.seed,
        "kernel": args.kernel if args.local else None,
        "bandwidth": args.bandwidth if args.local else None,
        "queries": rows,
        "all_valid": bool(all_valid),
    }
    write_text(out / "summary.json", canonical_json(summary))
    files.append("summary.json")
    write_manifest(out, files)
    return EXIT_OK if all_valid else EXIT_INVARIANT


def _artifact_ok(art: RunArtifact) -> bool:
    for rec in art.solves:
        if rec.result.status == "invariant_breach":
            return False
        if rec.check is not None and not rec.check.ok:
            return False
        if rec.complexity_ok is False:
            return False
    return True


def _cmd_run(args: argparse.Namespace, sweep: bool) -> int:
    pre = preset(args.preset, args.seed)
    overrides = {}
    if args.outer_max is not None:
        overrides["outer_max"] = args.outer_max
    if args.grad_tol is not None:
        overrides["grad_tol"] = args.grad_tol
    if overrides:
        pre = dataclasses.replace(pre, **overrides)
    art = run_experiment(pre, args.out, sweep=sweep)
    checks = art.summary["checks"]
    print(
        f"{pre.name}: {checks['n_solves']} solves "
        f"({checks['n_skipped']} skipped), statuses {checks['statuses']}; "
        f"artifacts in {art.out_dir}"
    )
    return EXIT_OK if _artifact_ok(art) else EXIT_INVARIANT


def _cmd_check(args: argparse.Namespace) -> int:
    report = check_suite(seed=args.seed, mutations=tuple(args.mutate or ()))
    print(report.table())
    return EXIT_OK if report.ok else EXIT_INVARIANT


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_BAD_INPUT
    try:
        if args.command == "fit":
            return _cmd_fit(args)
        if args.command in ("sweep", "experiment"):
            return _cmd_run(args, sweep=args.command == "sweep")
        return _cmd_check(args)
    except ExperimentError as err:
        print(f"invariant failure: {err}", file=sys.stderr)
        return EXIT_INVARIANT
    except (DataIOError, RegressionError, GeometryError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
