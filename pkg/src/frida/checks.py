"""Runtime self-check suite: re-derives the library's invariants and reports
a pass/fail table.

Every check rebuilds its own fixtures from seeded streams, recomputes the
quantity it guards from first principles (finite differences, closed forms,
or fresh solver runs), and returns a one-line verdict. Named mutations
deliberately corrupt a single computation inside one check so callers can
confirm the suite has teeth; a suite that cannot fail certifies nothing.
"""

from __future__ import annotations

import math
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from . import rng
from .curvature import delta_plus, subproblem_moduli, zeta_minus
from .dataio import dataset_to_json, verify_manifest, write_manifest, write_text
from .geometry import Circle, Manifold, ManifoldPoint, Product, Sphere, TorusPatch
from .presets import gen_s2xs1, gen_torus_local, torus_curvature_range
from .regression import (
    DCObjective,
    RegressionDataset,
    auto_safe_set,
    global_weights,
    nonneg_region_check,
)
from .solver import SolverConfig, Subproblem, complexity_check, frida_solve, validate_trace

__all__ = ["CheckReport", "CheckResult", "MUTATIONS", "check_suite"]

# Mutation switches, each the exact defect its check exists to catch.
MUTATIONS = ("dlog-adjoint-sign", "kappa-1")

_FD_STEP = 1e-5
_FD_TOL = 1e-5
_EXACT_TOL = 1e-10
_SANDWICH_TOL = 1e-4
_SEED_LABEL = "check-suite"


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


@dataclass(frozen=True)
class CheckReport:
    results: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def table(self) -> str:
        width = max(len(r.name) for r in self.results)
        lines = [
            f"{'ok' if r.ok else 'FAIL':4s} {r.name:<{width}s}  {r.detail}"
            for r in self.results
        ]
        tally = f"{sum(r.ok for r in self.results)}/{len(self.results)} checks passed"
        return "\n".join(lines + [tally])


# ---------------------------------------------------------------------------
# Samplers and finite differences
# ---------------------------------------------------------------------------


def _catalog() -> list[tuple[str, Manifold]]:
    torus = TorusPatch(2.0, 0.7, (0.0, math.pi / 2.0), 2.1)
    return [
        ("sphere2", Sphere(2)),
        ("circle", Circle()),
        ("torus", torus),
        ("sphere2_x_circle", Product((Sphere(2), Circle()))),
    ]


def _factor_slices(m: Product) -> list[slice]:
    out, at = [], 0
    for f in m.factors:
        out.append(slice(at, at + f.point_dim))
        at += f.point_dim
    return out


def _random_point(m: Manifold, g: np.random.Generator) -> np.ndarray:
    if isinstance(m, Sphere):
        v = g.standard_normal(m.point_dim)
        return v / np.linalg.norm(v)
    if isinstance(m, Circle):
        return np.array([g.uniform(0.0, 2.0 * math.pi)])
    if isinstance(m, TorusPatch):
        t0, p0 = m.center
        while True:
            u = g.uniform(-1.0, 1.0, size=2) * m.patch_radius * 0.4
            cand = np.array([t0 + u[0] / m.major_radius, p0 + u[1] / m.minor_radius])
            if m.center_dist(cand) <= 0.4 * m.patch_radius:
                return np.mod(cand, 2.0 * math.pi)
    if isinstance(m, Product):
        return np.concatenate([_random_point(f, g) for f in m.factors])
    raise TypeError(f"no sampler for {type(m).__name__}")


def _random_tangent(m: Manifold, g: np.random.Generator, base: np.ndarray) -> np.ndarray:
    v = g.standard_normal(m.point_dim)
    return m.tangent_project(base, v)


def _near_point(m: Manifold, g: np.random.Generator, base: np.ndarray, radius: float) -> np.ndarray:
    # Chart factors bound step length by the remaining patch room.
    radius = min(radius, 0.9 * m.inj_lower_at(base))
    u = _random_tangent(m, g, base)
    u /= max(np.linalg.norm(u), 1e-12)
    return m.exp(base, radius * g.uniform(0.2, 1.0) * u)


def _tangent_basis(m: Manifold, base: np.ndarray) -> np.ndarray:
    if isinstance(m, Sphere):
        a = np.concatenate([base[None, :], np.eye(m.point_dim)])
        q, _ = np.linalg.qr(a.T)
        return q[:, 1 : m.point_dim].T
    if isinstance(m, (Circle, TorusPatch)):
        return np.eye(m.point_dim)
    if isinstance(m, Product):
        rows = []
        for f, s in zip(m.factors, _factor_slices(m)):
            sub = _tangent_basis(f, base[s])
            block = np.zeros((sub.shape[0], m.point_dim))
            block[:, s] = sub
            rows.append(block)
        return np.concatenate(rows, axis=0)
    raise TypeError(f"no tangent basis for {type(m).__name__}")


def _fd_gradient(fun: Callable[[np.ndarray], float], m: Manifold, y: np.ndarray) -> np.ndarray:
    basis = _tangent_basis(m, y)
    comps = [
        (fun(m.exp(y, _FD_STEP * w)) - fun(m.exp(y, -_FD_STEP * w))) / (2.0 * _FD_STEP)
        for w in basis
    ]
    return np.asarray(comps) @ basis


def _rel_gap(got: np.ndarray, want: np.ndarray) -> float:
    scale = max(float(np.linalg.norm(want)), 1e-12)
    return float(np.linalg.norm(np.asarray(got) - np.asarray(want))) / scale


def _mixed_weight_instance(
    m: Manifold, g: np.random.Generator, n: int = 8
) -> tuple[RegressionDataset, DCObjective]:
    """Small dataset in a tight ball plus a global-weight objective whose
    extrapolating query forces at least one negative weight."""
    base = _random_point(m, g)
    resp = np.stack([_near_point(m, g, base, 0.3) for _ in range(n)])
    xs = np.linspace(0.0, 1.0, n).reshape(-1, 1)
    ds = RegressionDataset(m, xs, resp, safe_set=auto_safe_set(m, resp), label="check")
    x = 1.3
    w = global_weights(ds, np.array([x]))
    while not w.has_negative:
        x += 0.2
        w = global_weights(ds, np.array([x]))
    return ds, DCObjective(ds, w)


# ---------------------------------------------------------------------------
# Individual checks
# ---------------------------------------------------------------------------


def _check_exp_log(seed: int) -> CheckResult:
    worst = 0.0
    for name, m in _catalog():
        g = rng.stream(_SEED_LABEL, seed, f"explog-{name}")
        for _ in range(10):
            p = _random_point(m, g)
            q = _near_point(m, g, p, 0.8)
            v = m.log(p, q)
            worst = max(worst, abs(float(np.linalg.norm(v)) - m.dist(p, q)))
            worst = max(worst, m.dist(m.exp(p, v), q))
    ok = worst <= _EXACT_TOL
    return CheckResult("exp-log-roundtrip", ok, f"worst gap {worst:.3e} (tol {_EXACT_TOL:g})")


def _check_transport(seed: int) -> CheckResult:
    worst = 0.0
    for name, m in _catalog():
        g = rng.stream(_SEED_LABEL, seed, f"transport-{name}")
        for _ in range(10):
            p = _random_point(m, g)
            q = _near_point(m, g, p, 0.8)
            v = _random_tangent(m, g, p)
            moved = m.transport(p, q, v)
            worst = max(worst, abs(float(np.linalg.norm(moved)) - float(np.linalg.norm(v))))
    ok = worst <= _EXACT_TOL
    return CheckResult("transport-isometry", ok, f"worst norm drift {worst:.3e} (tol {_EXACT_TOL:g})")


def _check_objective_gradients(seed: int) -> CheckResult:
    worst = 0.0
    for name, m in _catalog():
        g = rng.stream(_SEED_LABEL, seed, f"grad-{name}")
        ds, obj = _mixed_weight_instance(m, g)
        center = np.asarray(ds.safe_set.center, dtype=float)
        for _ in range(6):
            y = _near_point(m, g, center, 0.5 * ds.safe_set.rho_ex)
            worst = max(worst, _rel_gap(obj.grad_f(y), _fd_gradient(obj.value, m, y)))
            worst = max(worst, _rel_gap(obj.grad_g(y), _fd_gradient(obj.g_value, m, y)))
            if obj.w_minus > 0.0:
                worst = max(worst, _rel_gap(obj.grad_h(y), _fd_gradient(obj.h_value, m, y)))
    ok = worst <= _FD_TOL
    return CheckResult("objective-gradients", ok, f"worst rel err {worst:.3e} (tol {_FD_TOL:g})")


def _check_dlog_adjoint(seed: int, muts: frozenset[str]) -> CheckResult:
    worst = 0.0
    for name, m in _catalog():
        g = rng.stream(_SEED_LABEL, seed, f"adjoint-{name}")
        for _ in range(10):
            p = _random_point(m, g)
            y = _near_point(m, g, p, 0.8)
            xi = _random_tangent(m, g, p)
            w = _random_tangent(m, g, y)
            got = m.dlog_adjoint(p, y, xi)
            if "dlog-adjoint-sign" in muts:
                got = -got
            lhs = float(np.dot(got, w))
            fun = lambda z: float(np.dot(xi, m.log(p, z)))
            rhs = (fun(m.exp(y, _FD_STEP * w)) - fun(m.exp(y, -_FD_STEP * w))) / (2.0 * _FD_STEP)
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    ok = worst <= _FD_TOL
    return CheckResult("dlog-adjoint", ok, f"worst rel err {worst:.3e} (tol {_FD_TOL:g})")


def _check_weight_example() -> CheckResult:
    ds = RegressionDataset(
        Sphere(1),
        np.array([[0.0], [2.0], [4.0]]),
        np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]]),
        safe_set=None,
        label="weight-example",
    )
    got = global_weights(ds, np.array([0.5])).values
    want = np.array([17.0 / 24.0, 1.0 / 3.0, -1.0 / 24.0])
    gap = float(np.max(np.abs(got - want)))
    ok = gap <= 1e-12
    return CheckResult("global-weight-example", ok, f"max |w - closed form| {gap:.3e} (tol 1e-12)")


def _check_region_agreement(seed: int) -> CheckResult:
    g = rng.stream(_SEED_LABEL, seed, "region")
    mism = 0
    for _ in range(50):
        xs = g.standard_normal(12).reshape(-1, 1)
        resp = np.stack([np.array([math.cos(a), math.sin(a)]) for a in g.uniform(0, 1, 12)])
        ds = RegressionDataset(Sphere(1), xs, resp, safe_set=None, label="check")
        x = g.standard_normal(1) * 2.0
        has_neg = global_weights(ds, x).has_negative
        if has_neg == nonneg_region_check(ds, x):
            mism += 1
    ok = mism == 0
    return CheckResult("weights-region-agreement", ok, f"{mism}/50 sign mismatches")


def _check_hessian_sandwich(seed: int) -> CheckResult:
    m = Sphere(2)
    g = rng.stream(_SEED_LABEL, seed, "sandwich")
    h = 1e-4
    worst = 0.0
    for _ in range(10):
        y = _random_point(m, g)
        u = _random_tangent(m, g, y)
        u /= np.linalg.norm(u)
        d = g.uniform(0.2, 2.6)
        z = m.exp(y, d * u)
        lo, hi = delta_plus(d, 1.0), zeta_minus(d, 0.0)
        for _ in range(3):
            v = _random_tangent(m, g, y)
            v /= np.linalg.norm(v)
            fun = lambda p: 0.5 * m.dist(z, p) ** 2
            sd = (fun(m.exp(y, h * v)) - 2.0 * fun(y) + fun(m.exp(y, -h * v))) / (h * h)
            worst = max(worst, (lo - sd) / max(1.0, abs(lo)), (sd - hi) / max(1.0, abs(hi)))
    ok = worst <= _SANDWICH_TOL
    return CheckResult(
        "hessian-sandwich", ok, f"worst bound excess {worst:.3e} (tol {_SANDWICH_TOL:g})"
    )


def _solver_runs(seed: int) -> list[tuple[DCObjective, SolverConfig, object]]:
    """Fresh FRIDA runs on small mixed-weight instances, both modes."""
    runs = []
    for i, (name, m) in enumerate([("sphere2", Sphere(2)), ("sphere2_x_circle", Product((Sphere(2), Circle())))]):
        g = rng.stream(_SEED_LABEL, seed, f"solve-{name}")
        for j in range(4):
            ds, obj = _mixed_weight_instance(m, g)
            mode = "exact" if (i + j) % 2 == 0 else "inexact"
            cfg = SolverConfig(mode=mode, outer_max=80, inner_max=400, grad_tol=1e-7)
            y0 = ManifoldPoint(m, np.asarray(ds.safe_set.center, dtype=float))
            runs.append((obj, cfg, frida_solve(obj, y0, cfg)))
    return runs


def _check_descent(runs, muts: frozenset[str]) -> CheckResult:
    kappa_inexact = 1.0 if "kappa-1" in muts else 0.25
    worst = -math.inf
    n_pairs = 0
    for obj, cfg, res in runs:
        kappa = 1.0 if "kappa-1" in muts else res.kappa
        for prev, nxt in zip(res.trace, res.trace[1:]):
            slack = 1e-10 * (1.0 + abs(prev.f))
            worst = max(worst, nxt.f - (prev.f - kappa * prev.d_k**2 + slack))
            n_pairs += 1
    # Solver steps over-deliver (the proximal weight dominates the realized
    # curvature), so replayed traces alone cannot expose an assertion whose
    # constant drifted above the inexact guarantee of 1/4. A boundary trace
    # decreasing at 0.3 d_k^2 per step is lawful for the inexact mode and
    # must be accepted by the same assertion.
    f_k, d_k = 1.0, 0.1
    f_next = f_k - 0.3 * d_k * d_k
    witness_ok = f_next <= f_k - kappa_inexact * d_k * d_k + 1e-10 * (1.0 + abs(f_k))
    ok = worst <= 0.0 and witness_ok
    detail = (
        f"worst margin {worst:.3e} over {n_pairs} steps; boundary witness "
        f"{'accepted' if witness_ok else 'rejected'}"
    )
    return CheckResult("descent-law", ok, detail)


def _check_complexity(runs) -> CheckResult:
    bad = [1 for _, _, res in runs if not complexity_check(res.trace, res.kappa).holds]
    ok = not bad
    return CheckResult("complexity-bound", ok, f"{len(bad)}/{len(runs)} traces violate the bound")


def _check_trace_validation(runs) -> CheckResult:
    bad = []
    for obj, cfg, res in runs:
        chk = validate_trace(obj, res, cfg)
        if not chk.ok:
            bad.extend(chk.failures[:2])
    ok = not bad
    detail = "all traces revalidate" if ok else f"{len(bad)} failures, first: {bad[0]}"
    return CheckResult("trace-validation", ok, detail)


def _check_subproblem_convexity(runs, seed: int) -> CheckResult:
    g = rng.stream(_SEED_LABEL, seed, "convexity")
    worst = -math.inf
    for obj, _, res in runs[:4]:
        m = obj.dataset.manifold
        safe = obj.dataset.require_safe_set()
        for rec in res.trace[:3]:
            if not math.isfinite(rec.tau_k):
                continue
            phi = Subproblem(obj, rec.y, rec.tau_k, rec.r_k)
            mu, _ = subproblem_moduli(
                rec.r_k, float(np.linalg.norm(phi.grad_h_k)), rec.tau_k,
                obj.w_plus, obj.w_minus, safe.delta_ex, safe.zeta_ex, safe.profile,
            )
            room = 0.5 * min(rec.r_k, obj.boundary_distance(rec.y))
            if room <= 1e-6:
                continue
            for _ in range(3):
                v = _random_tangent(m, g, rec.y)
                v /= np.linalg.norm(v)
                ts = np.linspace(-room, room, 9)
                q = np.array([phi.value(m.exp(rec.y, t * v)) - 0.5 * mu * t * t for t in ts])
                second = q[:-2] - 2.0 * q[1:-1] + q[2:]
                tol = 1e-9 * (1.0 + float(np.abs(q).max()))
                worst = max(worst, float((-second).max()) - tol)
    ok = worst <= 0.0
    return CheckResult(
        "subproblem-convexity", ok, f"worst concavity excess {worst:.3e} (need <= 0)"
    )


def _check_torus_extremes() -> CheckResult:
    k_min, k_max = torus_curvature_range(0.0, 2.0 * math.pi)
    gap = max(abs(k_min - (-1.099)), abs(k_max - 0.529))
    ok = gap <= 5e-4
    return CheckResult(
        "torus-curvature-extremes", ok,
        f"computed ({k_min:.6f}, {k_max:.6f}), worst gap {gap:.2e} (tol 5e-4)",
    )


def _check_dataset_determinism(seed: int) -> CheckResult:
    same = dataset_to_json(gen_torus_local(seed)) == dataset_to_json(gen_torus_local(seed))
    same &= dataset_to_json(gen_s2xs1(seed)) == dataset_to_json(gen_s2xs1(seed))
    return CheckResult(
        "dataset-determinism", same,
        "rebuilds byte-identical" if same else "rebuild changed bytes",
    )


def _check_manifest() -> CheckResult:
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        write_text(root / "a.csv", "k,f\r\n0,1.0\r\n")
        write_text(root / "b.json", '{"x":1}')
        write_manifest(root, ["a.csv", "b.json"])
        clean = verify_manifest(root).ok
        write_text(root / "a.csv", "k,f\r\n0,2.0\r\n")
        tampered = verify_manifest(root)
        ok = clean and not tampered.ok and "a.csv" in tampered.mismatched
    detail = "verifies clean, flags tampering" if ok else (
        f"clean={clean}, tamper flagged={not tampered.ok}"
    )
    return CheckResult("manifest-integrity", ok, detail)


# ---------------------------------------------------------------------------
# Suite
# ---------------------------------------------------------------------------


def check_suite(seed: int = 0, mutations: Iterable[str] = ()) -> CheckReport:
    """Run every check and return the report; see MUTATIONS for the switches.

    Mutations exist for the suite's own verification: each one corrupts the
    single computation its check guards, so the corresponding row must flip
    to FAIL while unrelated rows stay green.
    """
    muts = frozenset(mutations)
    unknown = muts.difference(MUTATIONS)
    if unknown:
        raise ValueError(f"unknown mutations {sorted(unknown)}; known: {list(MUTATIONS)}")
    results = [
        _check_exp_log(seed),
        _check_transport(seed),
        _check_objective_gradients(seed),
        _check_dlog_adjoint(seed, muts),
        _check_weight_example(),
        _check_region_agreement(seed),
        _check_hessian_sandwich(seed),
    ]
    runs = _solver_runs(seed)
    results += [
        _check_descent(runs, muts),
        _check_complexity(runs),
        _check_trace_validation(runs),
        _check_subproblem_convexity(runs, seed),
        _check_torus_extremes(),
        _check_dataset_determinism(seed),
        _check_manifest(),
    ]
    return CheckReport(tuple(results))
