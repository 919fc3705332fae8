"""Acceptance suite: the package's headline guarantees at their stated tolerances.

Each test asserts one published behavior contract and prints a single summary
line with the measured margin, so `pytest -s tests/test_acceptance.py` reads
as a conformance report. Solver guarantees are recomputed from traces here,
independently of the solver's own runtime assertions; preset artifacts are
produced once by a session fixture and shared across tests.
"""

from __future__ import annotations

import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from frida.curvature import delta_plus, zeta_minus
from frida.experiments import run_experiment
from frida.geometry import Circle, ManifoldPoint, Product, Sphere
from frida.presets import PRESET_NAMES, preset, torus_curvature_extremes, torus_curvature_range
from frida.regression import (
    DCObjective,
    RegressionDataset,
    auto_safe_set,
    global_weights,
)
from frida.solver import (
    SolverConfig,
    Subproblem,
    frida_solve,
    relative_error_constant,
)

from geomutil import fd_gradient, fd_directional, random_point, random_tangent


def _report(line: str) -> None:
    print(f"\n[PASS] {line}")


# ---------------------------------------------------------------------------
# Shared preset runs
# ---------------------------------------------------------------------------


@pytest.fixture(scope="session")
def preset_runs(tmp_path_factory):
    """One full run of every preset at seed 0: artifact plus wall time."""
    root = tmp_path_factory.mktemp("acceptance-runs")
    runs = {}
    for name in PRESET_NAMES:
        t0 = time.perf_counter()
        art = run_experiment(preset(name, 0), root / name)
        runs[name] = (art, time.perf_counter() - t0)
    return runs


def _frida_records(runs):
    for name, (art, _) in runs.items():
        for rec in list(art.solves) + list(art.init_solves):
            if rec.algorithm == "frida":
                yield name, art.preset.mode, rec


# ---------------------------------------------------------------------------
# Closed-form weight example
# ---------------------------------------------------------------------------


def test_signed_global_weights_closed_form():
    ds = RegressionDataset(
        Sphere(1),
        np.array([[0.0], [2.0], [4.0]]),
        np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]]),
        safe_set=None,
    )
    got = global_weights(ds, np.array([0.5])).values
    want = np.array([17.0 / 24.0, 1.0 / 3.0, -1.0 / 24.0])
    gap = float(np.max(np.abs(got - want)))
    assert gap <= 1e-12
    _report(f"global weights at query 0.5 hit (17/24, 1/3, -1/24): max gap {gap:.2e} (tol 1e-12)")


# ---------------------------------------------------------------------------
# Descent law on randomized mixed-sign instances
# ---------------------------------------------------------------------------


def _mixed_sign_instance(m, gen, n: int = 8):
    """Small dataset in a tight cap plus a query far enough out that at
    least one affine weight goes negative."""
    c = random_point(m, gen, spread=0.4)
    resp = np.empty((n, m.point_dim))
    for i in range(n):
        u = random_tangent(m, gen, c)
        u /= np.linalg.norm(u)
        resp[i] = m.exp(c, 0.3 * gen.uniform() * u)
    ds = RegressionDataset(
        m, np.linspace(0.0, 1.0, n).reshape(-1, 1), resp, safe_set=auto_safe_set(m, resp)
    )
    x = 1.3
    while True:
        w = global_weights(ds, np.array([x]))
        if w.has_negative:
            return ds, w
        x += 0.2


def test_descent_law_randomized_instances():
    manifolds = [Sphere(2), Sphere(4), Product((Sphere(2), Circle()))]
    t0 = time.perf_counter()
    worst = -math.inf
    n_pairs = 0
    by_mode = {"exact": 0, "inexact": 0}
    for i in range(200):
        gen = np.random.default_rng(31_000 + i)
        m = manifolds[i % len(manifolds)]
        mode = "exact" if i % 2 == 0 else "inexact"
        ds, w = _mixed_sign_instance(m, gen)
        cfg = SolverConfig(mode=mode, outer_max=40, inner_max=300, grad_tol=1e-7)
        res = frida_solve(
            DCObjective(ds, w), ManifoldPoint(m, np.asarray(ds.safe_set.center)), cfg
        )
        assert res.kappa == (0.5 if mode == "exact" else 0.25)
        assert res.status != "invariant_breach"
        for prev, nxt in zip(res.trace, res.trace[1:]):
            bound = prev.f - res.kappa * prev.d_k**2 + 1e-10 * (1.0 + abs(prev.f))
            worst = max(worst, nxt.f - bound)
            n_pairs += 1
        by_mode[mode] += 1
    elapsed = time.perf_counter() - t0
    assert worst <= 0.0
    assert elapsed < 60.0
    _report(
        f"descent law held on {n_pairs} steps over 200 instances "
        f"({by_mode['exact']} exact at k=1/2, {by_mode['inexact']} inexact at k=1/4); "
        f"worst margin {worst:.2e}, {elapsed:.1f}s (< 60s)"
    )


# ---------------------------------------------------------------------------
# Complexity bound on every preset trace
# ---------------------------------------------------------------------------


def test_complexity_bound_on_preset_traces(preset_runs):
    worst = -math.inf
    n_traces = n_prefixes = 0
    for name, _mode, rec in _frida_records(preset_runs):
        trace = rec.result.trace
        kappa = rec.result.kappa
        f0 = trace[0].f
        min_d = math.inf
        for n in range(len(trace) - 1):
            min_d = min(min_d, trace[n].d_k)
            gap = f0 - trace[n + 1].f
            assert gap >= 0.0, f"{name}: objective rose above f0 at step {n}"
            bound = math.sqrt(gap / (kappa * (n + 1)))
            worst = max(worst, min_d - bound * (1.0 + 1e-12))
            n_prefixes += 1
        assert rec.complexity_ok
        n_traces += 1
    assert worst <= 0.0
    _report(
        f"complexity bound min d_k <= sqrt((f0 - f_N+1)/(kappa (N+1))) held on "
        f"{n_prefixes} prefixes across {n_traces} traces; worst margin {worst:.2e}"
    )


# ---------------------------------------------------------------------------
# Gradient correctness against central finite differences
# ---------------------------------------------------------------------------


def test_gradients_match_finite_differences():
    cases = [
        ("sphere1", Sphere(1)),
        ("sphere2", Sphere(2)),
        ("sphere4", Sphere(4)),
        ("circle", Circle()),
        ("sphere2_x_circle", Product((Sphere(2), Circle()))),
    ]
    worst = 0.0
    for name, m in cases:
        for i in range(50):
            gen = np.random.default_rng(52_000 + 97 * i + len(name))
            ds, w = _mixed_sign_instance(m, gen, n=6)
            obj = DCObjective(ds, w)
            safe = ds.safe_set
            c = np.asarray(safe.center)
            u = random_tangent(m, gen, c)
            u /= np.linalg.norm(u)
            y = m.exp(c, 0.5 * safe.rho_ex * gen.uniform() * u)
            for fun, grad in (
                (obj.value, obj.grad_f),
                (obj.g_value, obj.grad_g),
                (obj.h_value, obj.grad_h),
            ):
                fd = fd_gradient(fun, m, y)
                an = grad(y)
                err = np.linalg.norm(an - fd) / max(1.0, np.linalg.norm(fd))
                worst = max(worst, err)
            # adjoint identity: d/dt <xi, log_c(exp_y(t w))> = <dlog*(c,y) xi, w>
            xi = random_tangent(m, gen, c)
            wdir = random_tangent(m, gen, y)
            wdir /= np.linalg.norm(wdir)
            lhs = fd_directional(lambda p: float(np.dot(xi, m.log(c, p))), m, y, wdir)
            rhs = float(np.dot(m.dlog_adjoint(c, y, xi), wdir))
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    assert worst < 1e-5
    _report(
        f"grad f/g/h and the log adjoint matched central differences on "
        f"50 configurations x {len(cases)} manifolds; worst relative error {worst:.2e} (tol 1e-5)"
    )


# ---------------------------------------------------------------------------
# Hessian sandwich for half squared distance on the sphere
# ---------------------------------------------------------------------------


def test_hessian_sandwich_on_sphere():
    m = Sphere(2)
    gen = np.random.default_rng(61_803)
    h = 1e-4
    worst = -math.inf
    for _ in range(200):
        z = random_point(m, gen)
        u = random_tangent(m, gen, z)
        u /= np.linalg.norm(u)
        d = gen.uniform(0.2, 2.6)
        y = m.exp(z, d * u)
        v = random_tangent(m, gen, y)
        v /= np.linalg.norm(v)
        phi = lambda t: 0.5 * m.dist(z, m.exp(y, t * v)) ** 2
        second = (phi(h) - 2.0 * phi(0.0) + phi(-h)) / (h * h)
        lo, hi = delta_plus(d, 1.0), zeta_minus(d, 0.0)
        worst = max(
            worst,
            (lo - second) - 1e-4 * max(1.0, abs(lo)),
            (second - hi) - 1e-4 * max(1.0, abs(hi)),
        )
    assert worst <= 0.0
    _report(
        f"second differences of half squared distance stayed in "
        f"[delta_D, zeta_D] over 200 sphere draws; worst margin {worst:.2e} (tol 1e-4 relative)"
    )


# ---------------------------------------------------------------------------
# Subproblem strong convexity along random geodesics
# ---------------------------------------------------------------------------


def test_subproblem_strong_convexity(preset_runs):
    # harvest proximal subproblems from sphere-preset traces, then probe
    # Phi_k - (mu_k/2) arclength^2 along random geodesics inside the step ball
    harvested = []
    for name in ("sphere-geodesic", "noisy-geodesic", "spiral"):
        art, _ = preset_runs[name]
        for rec in art.solves:
            if rec.algorithm != "frida":
                continue
            for it in rec.result.trace:
                if math.isfinite(it.tau_k) and math.isfinite(it.mu_k) and it.d_k > 0.0:
                    harvested.append((rec.objective, it))
                    break
            if len(harvested) >= 10:
                break
        if len(harvested) >= 10:
            break
    assert len(harvested) == 10

    gen = np.random.default_rng(27_182)
    m = harvested[0][0].dataset.manifold
    n_geodesics = 0
    worst = -math.inf
    for obj, it in harvested:
        phi = Subproblem(obj, it.y, it.tau_k, it.r_k)
        room = 0.5 * min(it.r_k, obj.boundary_distance(it.y))
        for _ in range(5):
            u0 = random_tangent(m, gen, it.y)
            u0 /= np.linalg.norm(u0)
            base = m.exp(it.y, 0.2 * room * gen.uniform() * u0)
            u = random_tangent(m, gen, base)
            u /= np.linalg.norm(u)
            ts = np.linspace(-0.6 * room, 0.6 * room, 9)
            q = np.array(
                [phi.value(m.exp(base, t * u)) - 0.5 * it.mu_k * t * t for t in ts]
            )
            scale = 1.0 + float(np.max(np.abs(q)))
            second = q[2:] - 2.0 * q[1:-1] + q[:-2]
            worst = max(worst, float((-second).max()) - 1e-6 * scale)
            n_geodesics += 1
    assert n_geodesics == 50
    assert worst <= 0.0
    _report(
        f"Phi_k - (mu_k/2) arclength^2 kept nonnegative second differences on "
        f"{n_geodesics} random geodesics from 10 harvested subproblems; "
        f"worst margin {worst:.2e} (tol 1e-6 scaled)"
    )


# ---------------------------------------------------------------------------
# Identical stationary point from 20 seeded starts
# ---------------------------------------------------------------------------


def test_seeded_starts_reach_one_stationary_point(preset_runs):
    art, elapsed = preset_runs["sphere-geodesic"]
    assert len(art.init_solves) == 20
    assert all(rec.x == 1.87 for rec in art.init_solves)
    grads = [rec.result.final_grad_norm for rec in art.init_solves]
    pairwise = art.summary["init_summary"]["max_pairwise_distance"]
    assert max(grads) <= 1e-6
    assert pairwise <= 1e-4
    assert elapsed < 30.0
    _report(
        f"20 seeded starts at x=1.87 all reached gradient norm <= {max(grads):.2e} "
        f"(tol 1e-6), max pairwise distance {pairwise:.2e} (tol 1e-4), "
        f"{elapsed:.1f}s (< 30s)"
    )


# ---------------------------------------------------------------------------
# GD and FRIDA agree at negative-weight queries
# ---------------------------------------------------------------------------


def test_gd_frida_objective_agreement(preset_runs):
    art, _ = preset_runs["s2xs1-compare"]
    pre = art.preset
    assert (pre.outer_max, pre.inner_max, pre.grad_tol) == (500, 1000, 1e-8)
    rows = [r for r in art.summary["queries"] if not r["skipped"]]
    assert rows, "no negative-weight queries executed"
    by_x: dict[float, dict[str, dict]] = {}
    for r in rows:
        assert r["has_negative"]
        by_x.setdefault(r["x"], {})[r["algorithm"]] = r
    gaps, adv = [], []
    for x, pair in sorted(by_x.items()):
        assert set(pair) == {"frida", "gd"}
        gaps.append(abs(pair["frida"]["final_f"] - pair["gd"]["final_f"]))
        adv.append((pair["gd"]["outer_iters"], pair["frida"]["outer_iters"]))
    worst = max(gaps)
    assert worst <= 1e-6
    gd_mean = float(np.mean([a for a, _ in adv]))
    fr_mean = float(np.mean([b for _, b in adv]))
    _report(
        f"GD and FRIDA final objectives agreed within {worst:.2e} (tol 1e-6) on "
        f"{len(gaps)} negative-weight queries; mean outer iterations "
        f"GD {gd_mean:.1f} vs FRIDA {fr_mean:.1f} (reported, not asserted)"
    )


# ---------------------------------------------------------------------------
# Torus curvature extremes
# ---------------------------------------------------------------------------


def test_torus_curvature_extremes_match():
    k_lo, k_hi = torus_curvature_extremes()
    g_lo, g_hi = torus_curvature_range(0.0, 2.0 * math.pi)
    assert abs(k_lo - g_lo) < 1e-6 and abs(k_hi - g_hi) < 1e-6
    err_lo, err_hi = abs(k_lo - (-1.099)), abs(k_hi - 0.529)
    assert err_lo <= 5e-4 and err_hi <= 5e-4
    _report(
        f"torus curvature extremes {k_lo:.6f}, {k_hi:.6f} matched -1.099, 0.529 "
        f"within {max(err_lo, err_hi):.2e} (tol 5e-4)"
    )


# ---------------------------------------------------------------------------
# Noisy-geodesic recovery across seeds
# ---------------------------------------------------------------------------


def test_noisy_geodesic_recovery_across_seeds(tmp_path):
    passes = 0
    means = []
    for seed in range(10):
        art = run_experiment(preset("noisy-geodesic", seed), tmp_path / f"seed{seed}")
        rec = art.summary["recovery"]
        means.append(rec["mean_distance"])
        passes += bool(rec["passes"])
    threshold = 3.0 * 0.1 / math.sqrt(20.0)
    assert passes >= 9
    _report(
        f"noisy-geodesic recovery: {passes}/10 seeds kept mean distance below "
        f"{threshold:.4f} (need >= 9); mean distances "
        f"{min(means):.4f}..{max(means):.4f}"
    )


# ---------------------------------------------------------------------------
# Relative-error bound on every trace
# ---------------------------------------------------------------------------


def test_relative_error_bound_on_preset_traces(preset_runs):
    worst_ratio = 0.0
    n_steps = n_traces = 0
    for name, mode, rec in _frida_records(preset_runs):
        chk = rec.check
        assert chk is not None and chk.rel_error_ok
        c_rel = relative_error_constant(rec.objective, rec.result.tau_bar, mode)
        for prev, nxt in zip(rec.result.trace, rec.result.trace[1:]):
            grad_next = float(np.linalg.norm(rec.objective.grad_f(nxt.y)))
            bound = 1.05 * c_rel * prev.d_k
            assert grad_next <= bound, f"{name}: step {prev.k}"
            if bound > 0.0:
                worst_ratio = max(worst_ratio, grad_next / bound)
            n_steps += 1
        n_traces += 1
    assert worst_ratio <= 1.0
    _report(
        f"gradient-vs-step bound |grad f(y_k+1)| <= 1.05 C_rel d_k held on "
        f"{n_steps} steps across {n_traces} traces; tightest ratio {worst_ratio:.3f}"
    )


# ---------------------------------------------------------------------------
# Byte-identical experiment artifacts
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_experiment_determinism_cli(name, tmp_path):
    def run(out: Path):
        proc = subprocess.run(
            [sys.executable, "-m", "frida", "experiment", "--preset", name,
             "--seed", "7", "--out", str(out)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        return out

    a, b = run(tmp_path / "a"), run(tmp_path / "b")
    names_a = sorted(p.name for p in a.iterdir())
    assert names_a == sorted(p.name for p in b.iterdir())
    for fname in names_a:
        assert (a / fname).read_bytes() == (b / fname).read_bytes(), fname
    _report(f"experiment --preset {name} --seed 7 reproduced {len(names_a)} files byte for byte")
