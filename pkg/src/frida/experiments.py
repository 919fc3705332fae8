"""Preset execution: solves every planned query and writes the artifact set.

One experiment directory holds the dataset snapshot, one trace CSV per solve,
a fits table, a dense truth curve, a JSON summary with per-query diagnostics
and recomputed invariant outcomes, and a sha256 manifest written last.
Query solves run concurrently over the shared read-only dataset; all file
writes happen afterwards from one thread in plan order, so identical
(preset, seed) inputs reproduce every file byte for byte.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import rng
from .dataio import canonical_json, trace_csv, write_dataset, write_manifest, write_text
from .geometry import ManifoldPoint
from .presets import ExperimentPreset, preset, torus_window_dataset, truth_point
from .regression import (
    DCObjective,
    RegressionDataset,
    WeightVector,
    global_weights,
    local_weights,
    nadaraya_watson_weights,
    nonneg_region_check,
)
from .solver import (
    SolveResult,
    SolverConfig,
    TraceCheck,
    complexity_check,
    frida_solve,
    gd_solve,
    validate_trace,
)

__all__ = [
    "ExperimentError",
    "RunArtifact",
    "SolveRecord",
    "objective_grid_csv",
    "run_experiment",
    "run_preset",
]

SUMMARY_SCHEMA = "frida-summary-1"
_TRUTH_SAMPLES = 241
_GRID_LON = 181
_GRID_LAT = 91


class ExperimentError(RuntimeError):
    """Raised when a run plan cannot be executed consistently."""


@dataclass(frozen=True)
class SolveRecord:
    """One completed solve with its objective and recomputed checks."""

    index: int
    x: float
    weighting: str
    algorithm: str
    objective: DCObjective
    result: SolveResult
    check: TraceCheck | None
    complexity_ok: bool | None
    trace_file: str


@dataclass(frozen=True)
class RunArtifact:
    preset: ExperimentPreset
    out_dir: Path
    solves: tuple[SolveRecord, ...]
    init_solves: tuple[SolveRecord, ...]
    summary: dict
    files: tuple[str, ...]


def _prepare(
    pre: ExperimentPreset, x: float, weighting: str
) -> tuple[RegressionDataset, WeightVector, np.ndarray, dict | None]:
    """Dataset, weights, start coords, and window info for one solve."""
    ds = pre.dataset
    if weighting == "global":
        w = global_weights(ds, np.array([x]))
        y0 = pre.y0 if pre.y0 is not None else np.asarray(ds.safe_set.center, dtype=float)
        return ds, w, y0, None
    if weighting == "local":
        if pre.bandwidth is None:
            raise ExperimentError(f"preset {pre.name!r} plans local weights without a bandwidth")
        w = local_weights(ds, float(x), pre.kernel, pre.bandwidth)
        y0 = pre.y0 if pre.y0 is not None else np.asarray(ds.safe_set.center, dtype=float)
        return ds, w, y0, None
    if weighting == "window":
        window = next((win for win in pre.windows if win.x0 == x), None)
        if window is None:
            raise ExperimentError(f"no window planned for query x={x!r}")
        wds = torus_window_dataset(ds, window, patch_radius=pre.metadata["patch_radius"])
        w = nadaraya_watson_weights(
            wds, x, pre.kernel, window.bandwidth, period=pre.metadata["period"]
        )
        info = {
            "half_width": window.half_width,
            "bandwidth": window.bandwidth,
            "n_points": len(window.indices),
            "center": list(wds.safe_set.center),
            "delta_ex": wds.safe_set.delta_ex,
            "zeta_ex": wds.safe_set.zeta_ex,
        }
        return wds, w, np.asarray(wds.safe_set.center, dtype=float), info
    raise ExperimentError(f"unknown weighting {weighting!r}")


def _best_grad(result: SolveResult) -> float:
    return min(rec.grad_f_norm for rec in result.trace)


def _inner_total(result: SolveResult) -> int:
    return int(sum(rec.inner_iters for rec in result.trace))


def _row(
    rec: SolveRecord, true_pt: np.ndarray, dist_to_true: float, window_info: dict | None
) -> dict:
    res = rec.result
    chk = rec.check
    return {
        "index": rec.index,
        "x": rec.x,
        "weighting": rec.weighting,
        "algorithm": rec.algorithm,
        "skipped": False,
        "status": res.status,
        "final_f": res.final_f,
        "final_grad_norm": res.final_grad_norm,
        "best_grad_norm": _best_grad(res),
        "outer_iters": res.n_steps,
        "inner_iters_total": _inner_total(res),
        "final_point": res.final.coords,
        "true_point": true_pt,
        "dist_to_true": dist_to_true,
        "w_minus": rec.objective.w_minus,
        "has_negative": bool(rec.objective.weights.has_negative),
        "tau_bar": res.tau_bar,
        "valid": None if chk is None else chk.ok,
        "c_rel": None if chk is None else chk.c_rel,
        "rel_error_ok": None if chk is None else chk.rel_error_ok,
        "complexity_ok": rec.complexity_ok,
        "trace_file": rec.trace_file,
        "window": window_info,
        "message": res.message,
    }


def _fits_csv(rows: list[dict], point_dim: int) -> str:
    from .dataio import _csv_line, fmt_float  # same quoting/rendering as traces

    header = [
        "index", "x", "weighting", "algorithm", "status", "final_f",
        "final_grad_norm", "best_grad_norm", "outer_iters", "inner_iters_total",
    ]
    header += [f"y{i}" for i in range(point_dim)]
    header += [f"true_y{i}" for i in range(point_dim)]
    lines = [_csv_line(header)]
    for row in rows:
        if row["skipped"]:
            continue
        fields = [
            str(row["index"]), fmt_float(row["x"]), row["weighting"], row["algorithm"],
            row["status"], fmt_float(row["final_f"]), fmt_float(row["final_grad_norm"]),
            fmt_float(row["best_grad_norm"]), str(row["outer_iters"]), str(row["inner_iters_total"]),
        ]
        fields += [fmt_float(v) for v in row["final_point"]]
        fields += [fmt_float(v) for v in row["true_point"]]
        lines.append(_csv_line(fields))
    return "".join(lines)


def _truth_csv(pre: ExperimentPreset) -> str:
    from .dataio import _csv_line, fmt_float

    lo, hi = float(pre.queries.min()), float(pre.queries.max())
    xs = np.linspace(lo, hi, _TRUTH_SAMPLES)
    dim = pre.dataset.responses.shape[1]
    lines = [_csv_line(["x"] + [f"y{i}" for i in range(dim)])]
    for x in xs:
        pt = truth_point(pre.name, float(x))
        lines.append(_csv_line([fmt_float(x)] + [fmt_float(v) for v in pt]))
    return "".join(lines)


def objective_grid_csv(obj: DCObjective, n_lon: int = _GRID_LON, n_lat: int = _GRID_LAT) -> str:
    """Objective values on a lon-lat grid of S^2, for heatmap rendering.

    Convention: point = (cos lat cos lon, cos lat sin lon, sin lat), lon in
    [-pi, pi], lat in [-pi/2, pi/2]. Rendering consumers read f from here
    instead of recomputing it.
    """
    from .dataio import _csv_line, fmt_float

    lines = [_csv_line(["lon", "lat", "f"])]
    for lat in np.linspace(-math.pi / 2.0, math.pi / 2.0, n_lat):
        cl, sl = math.cos(lat), math.sin(lat)
        for lon in np.linspace(-math.pi, math.pi, n_lon):
            pt = np.array([cl * math.cos(lon), cl * math.sin(lon), sl])
            lines.append(_csv_line([fmt_float(lon), fmt_float(lat), fmt_float(obj.value(pt))]))
    return "".join(lines)


def _init_points(pre: ExperimentPreset) -> np.ndarray:
    """Seeded starts: uniform draws from the tangent disc of radius
    init_radius at the safe-set center, mapped through exp."""
    m = pre.dataset.manifold
    c = np.asarray(pre.dataset.safe_set.center, dtype=float)
    g = rng.stream(pre.name, pre.seed, "inits")
    z = g.standard_normal((pre.n_inits, c.shape[0]))
    radii = pre.init_radius * np.sqrt(g.uniform(size=pre.n_inits))
    out = np.empty((pre.n_inits, c.shape[0]))
    for j in range(pre.n_inits):
        u = m.tangent_project(c, z[j])
        u /= np.linalg.norm(u)
        out[j] = m.exp(c, radii[j] * u)
    return out


@dataclass(frozen=True)
class _Job:
    """One planned solve, ready to execute on any worker thread."""

    index: int
    x: float
    weighting: str
    algorithm: str
    objective: DCObjective
    start: ManifoldPoint
    cfg: SolverConfig
    window_info: dict | None
    true_pt: np.ndarray
    trace_file: str


def _execute(job: _Job) -> tuple[SolveResult, TraceCheck | None, bool | None]:
    solver = frida_solve if job.algorithm == "frida" else gd_solve
    res = solver(job.objective, job.start, job.cfg)
    if job.algorithm == "frida":
        chk = validate_trace(job.objective, res, job.cfg)
        comp = complexity_check(res.trace, res.kappa).holds
        return res, chk, comp
    return res, None, None


def run_experiment(pre: ExperimentPreset, out_dir: Path | str, sweep: bool = False) -> RunArtifact:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: list[str] = []
    rows: list[dict] = []
    solves: list[SolveRecord] = []

    write_dataset(out / "dataset.json", pre.dataset)
    files.append("dataset.json")

    cfg = SolverConfig(
        mode=pre.mode, outer_max=pre.outer_max, inner_max=pre.inner_max, grad_tol=pre.grad_tol
    )
    gd_cfg = SolverConfig(mode="exact", outer_max=pre.outer_max, grad_tol=pre.grad_tol)
    point_dim = pre.dataset.responses.shape[1]

    # Plan first (weight construction and skip decisions are cheap and order
    # sensitive), then solve concurrently, then write everything in plan order.
    plan: list[dict | _Job] = []
    for i, xq in enumerate(pre.queries):
        x = float(xq)
        for weighting in pre.weightings:
            wds, weights, y0, window_info = _prepare(pre, x, weighting)
            if pre.negative_only:
                has_neg = bool(weights.has_negative)
                if weighting == "global" and has_neg == nonneg_region_check(wds, np.array([x])):
                    raise ExperimentError(
                        f"negative-weight filter disagrees with the region check at x={x:g}"
                    )
                if not has_neg:
                    plan.append({
                        "index": i, "x": x, "weighting": weighting, "algorithm": None,
                        "skipped": True, "has_negative": False,
                    })
                    continue
            true_pt = truth_point(pre.name, x)
            start = ManifoldPoint(wds.manifold, y0)
            algs = ["frida", "gd"] if pre.compare_gd else ["frida"]
            for alg in algs:
                plan.append(_Job(
                    index=i, x=x, weighting=weighting, algorithm=alg,
                    objective=DCObjective(wds, weights), start=start,
                    cfg=cfg if alg == "frida" else gd_cfg,
                    window_info=window_info, true_pt=true_pt,
                    trace_file=f"trace_q{i:03d}_{weighting}_{alg}.csv",
                ))

    init_jobs: list[_Job] = []
    init_starts = None
    if pre.n_inits > 0 and pre.x_test is not None:
        weights = global_weights(pre.dataset, np.array([pre.x_test]))
        init_starts = _init_points(pre)
        for j in range(pre.n_inits):
            init_jobs.append(_Job(
                index=j, x=pre.x_test, weighting="global", algorithm="frida",
                objective=DCObjective(pre.dataset, weights),
                start=ManifoldPoint(pre.dataset.manifold, init_starts[j]),
                cfg=cfg, window_info=None, true_pt=truth_point(pre.name, pre.x_test),
                trace_file=f"trace_xtest_init{j:02d}.csv",
            ))

    jobs = [p for p in plan if isinstance(p, _Job)] + init_jobs
    workers = max(1, min(8, os.cpu_count() or 1, len(jobs) or 1))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        outcomes = iter(list(pool.map(_execute, jobs)))

    for entry in plan:
        if isinstance(entry, dict):
            rows.append(entry)
            continue
        res, chk, comp = next(outcomes)
        write_text(out / entry.trace_file, trace_csv(res.trace, point_dim))
        files.append(entry.trace_file)
        rec = SolveRecord(
            entry.index, entry.x, entry.weighting, entry.algorithm,
            entry.objective, res, chk, comp, entry.trace_file,
        )
        solves.append(rec)
        d_true = float(entry.objective.dataset.manifold.dist(res.final.coords, entry.true_pt))
        rows.append(_row(rec, entry.true_pt, d_true, entry.window_info))

    init_solves: list[SolveRecord] = []
    init_block: list[dict] = []
    init_summary = None
    if init_jobs:
        finals = []
        for job in init_jobs:
            res, chk, comp = next(outcomes)
            write_text(out / job.trace_file, trace_csv(res.trace, point_dim))
            files.append(job.trace_file)
            init_solves.append(SolveRecord(
                job.index, job.x, "global", "frida", job.objective, res, chk, comp, job.trace_file
            ))
            finals.append(res.final.coords)
            init_block.append({
                "init_index": job.index,
                "start": init_starts[job.index],
                "status": res.status,
                "final_f": res.final_f,
                "final_grad_norm": res.final_grad_norm,
                "final_point": res.final.coords,
                "outer_iters": res.n_steps,
                "valid": chk.ok,
                "trace_file": job.trace_file,
            })
        m = pre.dataset.manifold
        pairwise = max(
            (float(m.dist(a, b)) for k, a in enumerate(finals) for b in finals[k + 1:]),
            default=0.0,
        )
        init_summary = {
            "x_test": pre.x_test,
            "n_inits": pre.n_inits,
            "init_radius": pre.init_radius,
            "max_pairwise_distance": pairwise,
            "max_final_grad_norm": max(b["final_grad_norm"] for b in init_block),
            "all_stationary": all(b["status"] == "stationary" for b in init_block),
        }

    write_text(out / "fits.csv", _fits_csv(rows, point_dim))
    files.append("fits.csv")
    write_text(out / "truth.csv", _truth_csv(pre))
    files.append("truth.csv")

    recovery = None
    if pre.name == "noisy-geodesic":
        dists = [r["dist_to_true"] for r in rows if not r["skipped"]]
        thresh = pre.metadata["recovery_threshold"]
        recovery = {
            "mean_distance": float(np.mean(dists)),
            "threshold": thresh,
            "passes": bool(np.mean(dists) <= thresh),
        }

    if sweep and pre.name == "sphere-geodesic":
        obj = DCObjective(pre.dataset, global_weights(pre.dataset, np.array([pre.x_test])))
        write_text(out / "objective_grid.csv", objective_grid_csv(obj))
        files.append("objective_grid.csv")

    done = [r for r in rows if not r["skipped"]]
    frida_rows = [r for r in done if r["algorithm"] == "frida"]
    safe = pre.dataset.safe_set
    summary = {
        "schema": SUMMARY_SCHEMA,
        "preset": pre.name,
        "seed": pre.seed,
        "mode": pre.mode,
        "budgets": {"outer_max": pre.outer_max, "inner_max": pre.inner_max, "grad_tol": pre.grad_tol},
        "kappa": cfg.kappa,
        "safe_set": None if safe is None else {
            "center": list(safe.center),
            "r": safe.r,
            "rho_ex": safe.rho_ex,
            "rho": safe.rho,
            "iota": safe.iota,
            "delta_ex": safe.delta_ex,
            "zeta_ex": safe.zeta_ex,
            "profile": {
                "lam_minus": safe.profile.lam_minus,
                "lam_plus": safe.profile.lam_plus,
                "l_r": safe.profile.l_r,
                "c_n": safe.profile.c_n,
            },
        },
        "metadata": dict(pre.metadata),
        "queries": rows,
        "inits": init_block,
        "init_summary": init_summary,
        "recovery": recovery,
        "checks": {
            "all_valid": all(r["valid"] for r in frida_rows),
            "all_complexity": all(r["complexity_ok"] for r in frida_rows),
            "all_rel_error": all(r["rel_error_ok"] for r in frida_rows),
            "n_solves": len(done),
            "n_skipped": len(rows) - len(done),
            "statuses": _status_counts(done),
        },
    }
    write_text(out / "summary.json", canonical_json(summary))
    files.append("summary.json")

    write_manifest(out, files)
    files.append("manifest.json")
    return RunArtifact(pre, out, tuple(solves), tuple(init_solves), summary, tuple(files))


def _status_counts(rows: list[dict]) -> dict:
    counts: dict[str, int] = {}
    for r in rows:
        counts[r["status"]] = counts.get(r["status"], 0) + 1
    return {k: counts[k] for k in sorted(counts)}


def run_preset(name: str, seed: int, out_dir: Path | str, sweep: bool = False) -> RunArtifact:
    return run_experiment(preset(name, seed), out_dir, sweep=sweep)
