"""Built-in experiment presets: datasets plus run plans from (name, seed).

Each generator rebuilds its dataset purely from the preset name and a seed,
drawing noise from purpose-keyed streams, so identical inputs reproduce
identical bytes. Sampling choices the source studies leave open (base points,
query grids, draw order) are fixed here and echoed in the preset metadata.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

import numpy as np

from . import rng
from .curvature import CurvatureProfile
from .geometry import Circle, Product, Sphere, TorusPatch
from .regression import RegressionDataset, auto_safe_set

__all__ = [
    "ExperimentPreset",
    "PRESET_NAMES",
    "WindowSpec",
    "gen_s2xs1",
    "gen_sphere_geodesic",
    "gen_sphere_noisy_geodesic",
    "gen_sphere_spiral",
    "gen_torus_global",
    "gen_torus_local",
    "geodesic_point",
    "preset",
    "s2xs1_effective_curvature",
    "s2xs1_point",
    "spiral_point",
    "torus_chart_profile",
    "torus_curvature",
    "torus_curvature_extremes",
    "torus_curvature_range",
    "torus_global_angles",
    "torus_global_speed",
    "torus_local_angles",
    "torus_window_dataset",
    "truth_point",
]

_SPHERE = Sphere(2)

# sphere-geodesic conventions: unit-speed geodesic from (1,0,0) toward (0,1,0)
_GEO_BASE = np.array([1.0, 0.0, 0.0])
_GEO_DIR = np.array([0.0, 1.0, 0.0])
_GEO_RHO_EX = 1.5
_GEO_X_TEST = 1.87
_GEO_N_INITS = 20
_GEO_INIT_BALL = 0.8

_NOISY_SIGMA = 0.1
_SPIRAL_SIGMA = 0.05
_SPIRAL_RHO_EX_MARGIN = 0.1

_S2XS1_ALPHA_MAX = 1.40
_S2XS1_CIRCLE_RATE = 0.80 * math.pi
_S2XS1_SIGMA_S2 = 0.045
_S2XS1_SIGMA_S1 = 0.035
_S2XS1_BASE = np.array([0.0, 0.0, 1.0, 0.0])

_TORUS_R = 2.0
_TORUS_SMALL_R = 0.7

_TLOCAL_THETA0 = 0.0
_TLOCAL_PHI0 = math.pi / 2.0
_TLOCAL_LENGTH = 1.45
_TLOCAL_ANGLE = math.pi / 3.0
_TLOCAL_SIGMA = 0.04
_TLOCAL_PATCH_RADIUS = 2.1
_TLOCAL_STATED_K = (-0.767, 0.397)
_TLOCAL_K_TOL = 5e-3

_TGLOBAL_SIGMA = 0.035
_TGLOBAL_PERIOD = 6.0
_TGLOBAL_N = 360
_TGLOBAL_N_THETA = 1
_TGLOBAL_N_PHI = 6
_TGLOBAL_RHO_SAFE = 0.55
_TGLOBAL_WINDOW_SCALE = 0.85
_TGLOBAL_HALF_MIN = 0.04
_TGLOBAL_HALF_MAX = 0.35
_TGLOBAL_BANDWIDTH_SCALE = 0.45
_TGLOBAL_MIN_WINDOW = 8
_TGLOBAL_PATCH_RADIUS = 1.4


@dataclass(frozen=True)
class WindowSpec:
    """Local predictor window for one query of a windowed preset."""

    x0: float
    indices: tuple[int, ...]
    half_width: float
    bandwidth: float

    def __post_init__(self):
        if len(self.indices) < _TGLOBAL_MIN_WINDOW:
            raise ValueError(
                f"window at x0={self.x0!r} has {len(self.indices)} points, needs >= {_TGLOBAL_MIN_WINDOW}"
            )
        if not self.bandwidth > 0.0:
            raise ValueError(f"window bandwidth must be positive, got {self.bandwidth!r}")


@dataclass(frozen=True)
class ExperimentPreset:
    """A dataset plus everything needed to run and reproduce its study."""

    name: str
    seed: int
    dataset: RegressionDataset
    mode: str
    queries: np.ndarray
    weightings: tuple[str, ...] = ("global",)
    kernel: str = "gaussian"
    bandwidth: float | None = None
    x_test: float | None = None
    n_inits: int = 0
    init_radius: float = 0.0
    compare_gd: bool = False
    negative_only: bool = False
    windows: tuple[WindowSpec, ...] = ()
    y0: np.ndarray | None = None
    outer_max: int = 500
    inner_max: int = 1000
    grad_tol: float = 1e-8
    metadata: Mapping = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Truth curves
# ---------------------------------------------------------------------------


def geodesic_point(x: float) -> np.ndarray:
    """Unit-speed S^2 geodesic through (1,0,0) in direction (0,1,0)."""
    return math.cos(x) * _GEO_BASE + math.sin(x) * _GEO_DIR


def spiral_point(x: float) -> np.ndarray:
    """Spiral path (sqrt(1-x^2) cos(pi x), sqrt(1-x^2) sin(pi x), x) on S^2."""
    s = math.sqrt(max(1.0 - x * x, 0.0))
    return np.array([s * math.cos(math.pi * x), s * math.sin(math.pi * x), x])


def _s2xs1_alpha(x):
    return _S2XS1_ALPHA_MAX * (3.0 * x * x - 2.0 * x**3)


def s2xs1_point(x: float) -> np.ndarray:
    """Noiseless S^2 x S^1 curve ((sin a, 0, cos a), 0.80 pi x mod 2pi)."""
    a = _s2xs1_alpha(x)
    return np.array([math.sin(a), 0.0, math.cos(a), (_S2XS1_CIRCLE_RATE * x) % (2.0 * math.pi)])


def torus_local_angles(x: float) -> tuple[float, float]:
    """Straight chart line through (theta0, phi0) with length 1.45, slope pi/3."""
    a0 = _TORUS_R + _TORUS_SMALL_R * math.cos(_TLOCAL_PHI0)
    th = _TLOCAL_THETA0 + (_TLOCAL_LENGTH * math.cos(_TLOCAL_ANGLE) / a0) * (x - 0.5)
    ph = _TLOCAL_PHI0 + (_TLOCAL_LENGTH * math.sin(_TLOCAL_ANGLE) / _TORUS_SMALL_R) * (x - 0.5)
    return th, ph


def torus_global_angles(x: float) -> tuple[float, float]:
    """Unwrapped angles winding once in theta and six times in phi over [0,6]."""
    frac = x / _TGLOBAL_PERIOD
    return 2.0 * math.pi * _TGLOBAL_N_THETA * frac, 2.0 * math.pi * _TGLOBAL_N_PHI * frac


def truth_point(name: str, x: float) -> np.ndarray:
    """Noiseless curve value at x, in the preset dataset's representation."""
    if name in ("sphere-geodesic", "noisy-geodesic"):
        return geodesic_point(x)
    if name == "spiral":
        return spiral_point(x)
    if name == "s2xs1-compare":
        return s2xs1_point(x)
    if name == "torus-local":
        th, ph = torus_local_angles(x)
    elif name == "torus-global":
        th, ph = torus_global_angles(x)
    else:
        raise ValueError(f"unknown preset {name!r}")
    two_pi = 2.0 * math.pi
    return np.array([th % two_pi, ph % two_pi])


# ---------------------------------------------------------------------------
# Curvature diagnostics
# ---------------------------------------------------------------------------


def torus_curvature(phi, major_radius: float = _TORUS_R, minor_radius: float = _TORUS_SMALL_R):
    """Gaussian curvature K(phi) = cos(phi) / (r (R + r cos(phi)))."""
    phi = np.asarray(phi, dtype=float)
    return np.cos(phi) / (minor_radius * (major_radius + minor_radius * np.cos(phi)))


def torus_curvature_extremes(
    major_radius: float = _TORUS_R, minor_radius: float = _TORUS_SMALL_R
) -> tuple[float, float]:
    """Closed-form extremes of K over a full revolution: phi = pi and phi = 0."""
    return (
        -1.0 / (minor_radius * (major_radius - minor_radius)),
        1.0 / (minor_radius * (major_radius + minor_radius)),
    )


def torus_curvature_range(
    phi_lo: float,
    phi_hi: float,
    major_radius: float = _TORUS_R,
    minor_radius: float = _TORUS_SMALL_R,
    samples: int = 20001,
) -> tuple[float, float]:
    """Dense-grid min/max of K(phi) over [phi_lo, phi_hi]."""
    k = torus_curvature(np.linspace(phi_lo, phi_hi, samples), major_radius, minor_radius)
    return float(k.min()), float(k.max())


def torus_chart_profile(
    major_radius: float = _TORUS_R,
    minor_radius: float = _TORUS_SMALL_R,
    samples: int = 20001,
) -> CurvatureProfile:
    """Safe-set curvature profile for datasets on a frozen-chart torus patch.

    The patch's exp/log are flat chart operations, but its distance keeps the
    embedded metric's A(phi) variation, so squared-distance moduli inside the
    patch behave like the true torus rather than a flat plane. Safe sets over
    patch data therefore carry the full-torus curvature extremes and a
    Lipschitz bound on K; the flat catalog profile would understate the
    concave part's smoothness wherever weights go negative.

    l_r applies the operator-norm convention ||R|| <= c_n * Lambda_0 to
    grad K: for a surface, ||grad R|| = c_n * ||grad K||, with ||grad K|| =
    R |sin phi| / (r^2 A(phi)^2) maximized on a dense grid.
    """
    k_min, k_max = torus_curvature_extremes(major_radius, minor_radius)
    phi = np.linspace(0.0, 2.0 * math.pi, samples)
    a = major_radius + minor_radius * np.cos(phi)
    grad_k = major_radius * np.abs(np.sin(phi)) / (minor_radius**2 * a**2)
    c_n = 2.0
    return CurvatureProfile(
        lam_minus=abs(k_min), lam_plus=max(k_max, 0.0),
        l_r=c_n * float(grad_k.max()), c_n=c_n,
    )


def s2xs1_effective_curvature() -> float:
    """Largest share of curve speed carried by the spherical factor.

    The product's mixed planes are flat, so the curvature felt along the
    curve scales with |m_s'|^2 / (|m_s'|^2 + |m_c'|^2); alpha'(x) peaks at
    x = 1/2 with value 2.1 while the circular speed is constant 0.80 pi.
    Used as the safe-set curvature bound for the s2xs1 preset.
    """
    a_max = _S2XS1_ALPHA_MAX * 1.5
    return a_max**2 / (a_max**2 + _S2XS1_CIRCLE_RATE**2)


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def _tangent_noise(points: np.ndarray, sigma: float, g: np.random.Generator) -> np.ndarray:
    """Y_i = exp_{y_i}(sigma (z_i - <z_i, y_i> y_i)), z_i standard normal."""
    z = g.standard_normal(points.shape)
    v = sigma * (z - (z * points).sum(axis=1, keepdims=True) * points)
    return np.stack([_SPHERE.exp(points[i], v[i]) for i in range(points.shape[0])])


def gen_sphere_geodesic(seed: int) -> RegressionDataset:
    """Three noiseless responses at arc parameters {0, 0.5, 1}.

    The existence radius is pinned to 1.5 instead of the data-driven value:
    the stationary point at the extrapolating query x = 1.87 must stay
    strictly interior while both sufficient-region diagnostics fail there.
    """
    xs = np.array([0.0, 0.5, 1.0])
    resp = np.stack([geodesic_point(x) for x in xs])
    safe = replace(auto_safe_set(_SPHERE, resp), rho_ex=_GEO_RHO_EX)
    return RegressionDataset(_SPHERE, xs.reshape(-1, 1), resp, safe_set=safe, label="sphere-geodesic")


def gen_sphere_noisy_geodesic(seed: int) -> RegressionDataset:
    xs = np.linspace(0.0, 1.0, 20)
    clean = np.stack([geodesic_point(x) for x in xs])
    resp = _tangent_noise(clean, _NOISY_SIGMA, rng.stream("noisy-geodesic", seed, "noise"))
    return RegressionDataset(
        _SPHERE, xs.reshape(-1, 1), resp, safe_set=auto_safe_set(_SPHERE, resp), label="noisy-geodesic"
    )


def gen_sphere_spiral(seed: int) -> RegressionDataset:
    """Spiral curve samples at the 40 midpoints (i + 1/2)/40.

    The spiral spans a geodesic diameter near 2.5, so any existence radius
    beyond r + 0.1 drives delta_plus(r + rho_ex) steeply negative and the
    proximal weights into the thousands; the tight margin keeps tau around
    40 while every fitted point stays 0.16+ inside the ball.
    """
    xs = (np.arange(40) + 0.5) / 40.0
    clean = np.stack([spiral_point(x) for x in xs])
    resp = _tangent_noise(clean, _SPIRAL_SIGMA, rng.stream("spiral", seed, "noise"))
    safe = auto_safe_set(_SPHERE, resp)
    safe = replace(safe, rho_ex=safe.r + _SPIRAL_RHO_EX_MARGIN)
    return RegressionDataset(_SPHERE, xs.reshape(-1, 1), resp, safe_set=safe, label="spiral")


def gen_s2xs1(seed: int) -> RegressionDataset:
    """Product-manifold curve with normalized-direction spherical noise.

    On S^2 the noise direction is a normalized tangent projection of a
    Gaussian vector and the amplitude is an independent N(0, sigma^2) draw;
    on S^1 plain Gaussian angle noise is added. The safe set uses the
    curve's effective curvature bound: under the full product bound
    lam_plus = 1 the auto ball has delta_ex ~ -310 and the proximal weights
    blow past any workable budget, while the effective bound keeps every
    step invariant intact (they are all still asserted per iteration).
    """
    prod = Product((Sphere(2), Circle()))
    n = 40
    xs = np.linspace(0.0, 1.0, n)
    g = rng.stream("s2xs1-compare", seed, "noise")
    z = g.standard_normal((n, 3))
    amp = _S2XS1_SIGMA_S2 * g.standard_normal(n)
    eps_c = _S2XS1_SIGMA_S1 * g.standard_normal(n)
    resp = np.empty((n, 4))
    for i, x in enumerate(xs):
        clean = s2xs1_point(x)
        p = clean[:3]
        zt = z[i] - np.dot(z[i], p) * p
        u = zt / np.linalg.norm(zt)
        resp[i, :3] = _SPHERE.exp(p, amp[i] * u)
        resp[i, 3] = (clean[3] + eps_c[i]) % (2.0 * math.pi)
    profile = CurvatureProfile(0.0, s2xs1_effective_curvature(), 0.0, 2.0)
    return RegressionDataset(
        prod, xs.reshape(-1, 1), resp,
        safe_set=auto_safe_set(prod, resp, profile=profile), label="s2xs1-compare",
    )


def gen_torus_local(seed: int) -> RegressionDataset:
    """Chart-line curve on a torus patch with approximately isotropic noise."""
    n = 40
    xs = np.linspace(0.0, 1.0, n)
    th, ph = np.empty(n), np.empty(n)
    for i, x in enumerate(xs):
        th[i], ph[i] = torus_local_angles(x)
    a0 = _TORUS_R + _TORUS_SMALL_R * math.cos(_TLOCAL_PHI0)
    g = rng.stream("torus-local", seed, "noise")
    th = th + (_TLOCAL_SIGMA / a0) * g.standard_normal(n)
    ph = ph + (_TLOCAL_SIGMA / _TORUS_SMALL_R) * g.standard_normal(n)
    resp = np.stack([th % (2.0 * math.pi), ph % (2.0 * math.pi)], axis=1)
    patch = TorusPatch(
        _TORUS_R, _TORUS_SMALL_R,
        center=(_TLOCAL_THETA0, _TLOCAL_PHI0), patch_radius=_TLOCAL_PATCH_RADIUS,
    )
    safe = auto_safe_set(patch, resp, profile=torus_chart_profile())
    return RegressionDataset(
        patch, xs.reshape(-1, 1), resp, safe_set=safe, label="torus-local"
    )


def _circular_mean(angles: np.ndarray) -> float:
    return math.atan2(float(np.sin(angles).sum()), float(np.cos(angles).sum())) % (2.0 * math.pi)


def torus_global_speed(x0: float) -> float:
    """Chart-metric speed of the noiseless curve: hypot(A(phi) theta', r phi')."""
    _, ph = torus_global_angles(x0)
    a = _TORUS_R + _TORUS_SMALL_R * math.cos(ph)
    thp = 2.0 * math.pi * _TGLOBAL_N_THETA / _TGLOBAL_PERIOD
    php = 2.0 * math.pi * _TGLOBAL_N_PHI / _TGLOBAL_PERIOD
    return math.hypot(a * thp, _TORUS_SMALL_R * php)


def _plan_window(xs: np.ndarray, x0: float) -> WindowSpec:
    half = _TGLOBAL_WINDOW_SCALE * _TGLOBAL_RHO_SAFE / max(torus_global_speed(x0), 1e-12)
    half = min(max(half, _TGLOBAL_HALF_MIN), _TGLOBAL_HALF_MAX)
    d = np.abs(xs - x0) % _TGLOBAL_PERIOD
    d = np.minimum(d, _TGLOBAL_PERIOD - d)
    idx = np.flatnonzero(d <= half)
    if idx.size < _TGLOBAL_MIN_WINDOW:
        idx = np.sort(np.argsort(d, kind="stable")[:_TGLOBAL_MIN_WINDOW])
    return WindowSpec(
        x0=float(x0),
        indices=tuple(int(i) for i in idx),
        half_width=float(half),
        bandwidth=float(_TGLOBAL_BANDWIDTH_SCALE * half),
    )


def gen_torus_global(seed: int) -> tuple[RegressionDataset, tuple[WindowSpec, ...]]:
    """Fully wrapped torus curve plus the per-query window plan.

    Responses are stored as raw angle pairs on Circle x Circle with no safe
    set: no single ball covers a curve winding the whole torus, so each
    query is solved on its own patch built by `torus_window_dataset`.
    """
    xs = np.arange(_TGLOBAL_N) * (_TGLOBAL_PERIOD / _TGLOBAL_N)
    th, ph = np.empty(_TGLOBAL_N), np.empty(_TGLOBAL_N)
    for i, x in enumerate(xs):
        th[i], ph[i] = torus_global_angles(x)
    g = rng.stream("torus-global", seed, "noise")
    th = (th + _TGLOBAL_SIGMA * g.standard_normal(_TGLOBAL_N)) % (2.0 * math.pi)
    ph = (ph + _TGLOBAL_SIGMA * g.standard_normal(_TGLOBAL_N)) % (2.0 * math.pi)
    resp = np.stack([th, ph], axis=1)
    storage = RegressionDataset(
        Product((Circle(), Circle())), xs.reshape(-1, 1), resp, safe_set=None, label="torus-global"
    )
    queries = np.linspace(0.0, _TGLOBAL_PERIOD, 25)
    windows = tuple(_plan_window(xs, x0) for x0 in queries)
    return storage, windows


def torus_window_dataset(
    storage: RegressionDataset,
    window: WindowSpec,
    patch_radius: float = _TGLOBAL_PATCH_RADIUS,
) -> RegressionDataset:
    """Per-window patch dataset centered at the window's circular mean angles."""
    idx = np.asarray(window.indices, dtype=int)
    sub = storage.responses[idx]
    center = (_circular_mean(sub[:, 0]), _circular_mean(sub[:, 1]))
    patch = TorusPatch(_TORUS_R, _TORUS_SMALL_R, center=center, patch_radius=patch_radius)
    return RegressionDataset(
        patch,
        storage.predictors[idx],
        sub,
        safe_set=auto_safe_set(patch, sub, profile=torus_chart_profile()),
        label=f"{storage.label}-x{window.x0:g}",
    )


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------


def _sphere_geodesic_preset(seed: int) -> ExperimentPreset:
    ds = gen_sphere_geodesic(seed)
    return ExperimentPreset(
        name="sphere-geodesic",
        seed=seed,
        dataset=ds,
        mode="exact",
        queries=np.linspace(-0.9, 1.9, 29),
        x_test=_GEO_X_TEST,
        n_inits=_GEO_N_INITS,
        init_radius=_GEO_INIT_BALL * ds.safe_set.rho_ex,
        metadata={
            "base_point": _GEO_BASE.tolist(),
            "direction": _GEO_DIR.tolist(),
            "segment_length": 1.0,
            "rho_ex_override": _GEO_RHO_EX,
            "x_test": _GEO_X_TEST,
            "n_inits": _GEO_N_INITS,
            "init_radius": _GEO_INIT_BALL * ds.safe_set.rho_ex,
        },
    )


def _noisy_geodesic_preset(seed: int) -> ExperimentPreset:
    ds = gen_sphere_noisy_geodesic(seed)
    return ExperimentPreset(
        name="noisy-geodesic",
        seed=seed,
        dataset=ds,
        mode="exact",
        queries=np.linspace(0.0, 1.0, 21),
        metadata={
            "sigma": _NOISY_SIGMA,
            "recovery_threshold": 3.0 * _NOISY_SIGMA / math.sqrt(20.0),
        },
    )


def _spiral_preset(seed: int) -> ExperimentPreset:
    ds = gen_sphere_spiral(seed)
    return ExperimentPreset(
        name="spiral",
        seed=seed,
        dataset=ds,
        mode="exact",
        queries=np.linspace(0.05, 0.95, 25),
        weightings=("local", "global"),
        kernel="gaussian",
        bandwidth=0.15,
        metadata={
            "sigma": _SPIRAL_SIGMA,
            "kernel": "gaussian",
            "bandwidth": 0.15,
            "rho_ex_margin": _SPIRAL_RHO_EX_MARGIN,
        },
    )


def _s2xs1_preset(seed: int) -> ExperimentPreset:
    ds = gen_s2xs1(seed)
    return ExperimentPreset(
        name="s2xs1-compare",
        seed=seed,
        dataset=ds,
        mode="inexact",
        queries=np.linspace(0.0, 1.0, 41),
        compare_gd=True,
        negative_only=True,
        y0=_S2XS1_BASE.copy(),
        metadata={
            "sigma_s2": _S2XS1_SIGMA_S2,
            "sigma_s1": _S2XS1_SIGMA_S1,
            "effective_curvature": s2xs1_effective_curvature(),
            "base_point": _S2XS1_BASE.tolist(),
        },
    )


def _torus_local_preset(seed: int) -> ExperimentPreset:
    ds = gen_torus_local(seed)
    ph_lo, ph_hi = torus_local_angles(0.0)[1], torus_local_angles(1.0)[1]
    k_lo, k_hi = torus_curvature_range(ph_lo, ph_hi)
    mismatch = (
        abs(k_lo - _TLOCAL_STATED_K[0]) > _TLOCAL_K_TOL
        or abs(k_hi - _TLOCAL_STATED_K[1]) > _TLOCAL_K_TOL
    )
    return ExperimentPreset(
        name="torus-local",
        seed=seed,
        dataset=ds,
        mode="exact",
        queries=np.linspace(0.0, 1.0, 21),
        metadata={
            "major_radius": _TORUS_R,
            "minor_radius": _TORUS_SMALL_R,
            "theta0": _TLOCAL_THETA0,
            "phi0": _TLOCAL_PHI0,
            "length_total": _TLOCAL_LENGTH,
            "line_angle": _TLOCAL_ANGLE,
            "sigma_intrinsic": _TLOCAL_SIGMA,
            "patch_radius": _TLOCAL_PATCH_RADIUS,
            "curvature_range_computed": [k_lo, k_hi],
            "curvature_range_stated": list(_TLOCAL_STATED_K),
            "curvature_range_mismatch": mismatch,
        },
    )


def _torus_global_preset(seed: int) -> ExperimentPreset:
    ds, windows = gen_torus_global(seed)
    k_lo, k_hi = torus_curvature_extremes()
    return ExperimentPreset(
        name="torus-global",
        seed=seed,
        dataset=ds,
        mode="exact",
        queries=np.array([w.x0 for w in windows]),
        weightings=("window",),
        kernel="gaussian",
        windows=windows,
        metadata={
            "major_radius": _TORUS_R,
            "minor_radius": _TORUS_SMALL_R,
            "n_theta": _TGLOBAL_N_THETA,
            "n_phi": _TGLOBAL_N_PHI,
            "period": _TGLOBAL_PERIOD,
            "sigma": _TGLOBAL_SIGMA,
            "rho_safe": _TGLOBAL_RHO_SAFE,
            "half_width_bounds": [_TGLOBAL_HALF_MIN, _TGLOBAL_HALF_MAX],
            "bandwidth_scale": _TGLOBAL_BANDWIDTH_SCALE,
            "patch_radius": _TGLOBAL_PATCH_RADIUS,
            "curvature_extremes": [k_lo, k_hi],
        },
    )


_BUILDERS: Mapping[str, Callable[[int], ExperimentPreset]] = {
    "sphere-geodesic": _sphere_geodesic_preset,
    "noisy-geodesic": _noisy_geodesic_preset,
    "spiral": _spiral_preset,
    "s2xs1-compare": _s2xs1_preset,
    "torus-local": _torus_local_preset,
    "torus-global": _torus_global_preset,
}

PRESET_NAMES = tuple(_BUILDERS)


def preset(name: str, seed: int = 0) -> ExperimentPreset:
    try:
        build = _BUILDERS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}") from None
    return build(int(seed))
