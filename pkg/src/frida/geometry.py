"""Manifold catalog: unit spheres, the flat circle, finite products, and a
chart-approximated torus patch.

Conventions
-----------
Sphere points are unit vectors in R^{n+1}; circle and torus points are angles
canonicalized to [0, 2*pi) at construction only; product points concatenate
factor coordinates. Tangent vectors are stored in metric-orthonormal
coordinates per factor (sphere: ambient components orthogonal to the base;
circle: one number; torus patch: the (A*dtheta, r*dphi) pair), so inner
products are plain dot products and |log(p, q)| = distance(p, q) everywhere.

The torus patch freezes the chart metric per call at the phi-midpoint of the
two points involved, matching an embedded torus only locally. exp, log and
distance are mutually consistent under this convention (exact round trips),
but the patch is not exactly Riemannian: -2 log is only an O(metric
variation) approximation of the gradient of the squared distance there, so
the patch overrides dist_sq_grad_many and dlog_adjoint with the exact chart
derivatives instead of reusing the identities that hold on true manifolds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curvature import CurvatureProfile, zeta_minus

__all__ = [
    "GeometryError",
    "GeometryCaps",
    "Manifold",
    "Sphere",
    "Circle",
    "TorusPatch",
    "Product",
    "ManifoldPoint",
    "TangentVector",
    "distance",
    "exp",
    "log",
    "transport",
    "dlog_adjoint",
    "frechet_mean",
]

TWO_PI = 2.0 * math.pi

# Geodesics shorter than this use the first-order chart difference in log;
# distances within this of the injectivity radius raise a domain error.
_NEAR_ZERO = 1e-8
_NEAR_CUT = 1e-8


class GeometryError(ValueError):
    """Raised on invalid points/tangents or geodesic domain violations."""


@dataclass(frozen=True)
class GeometryCaps:
    dim: int
    inj_lower: float
    curvature: CurvatureProfile


def _wrap_pi(a):
    """Wrap angles to (-pi, pi]."""
    return math.pi - np.mod(math.pi - np.asarray(a, dtype=float), TWO_PI)


def _wrap_2pi(a):
    """Wrap angles to [0, 2*pi)."""
    return np.mod(np.asarray(a, dtype=float), TWO_PI)


class Manifold:
    """Interface for catalog manifolds; all kernels act on raw coordinate
    arrays, with batching over the leading axis where noted."""

    point_dim: int  # length of a point coordinate array
    dim: int        # intrinsic dimension

    def caps(self) -> GeometryCaps:
        return GeometryCaps(self.dim, self.inj_lower(), self.curvature_profile())

    def curvature_profile(self) -> CurvatureProfile:
        raise NotImplementedError

    def inj_lower(self) -> float:
        raise NotImplementedError

    def inj_lower_at(self, c: np.ndarray) -> float:
        """Injectivity bound at a specific point (the torus patch shrinks it
        by the chart distance from the patch center)."""
        return self.inj_lower()

    def canonicalize(self, c: np.ndarray) -> np.ndarray:
        return np.asarray(c, dtype=float)

    def check_point(self, c: np.ndarray) -> None:
        raise NotImplementedError

    def check_tangent(self, base: np.ndarray, v: np.ndarray) -> None:
        raise NotImplementedError

    def dist(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(self.dist_many(a, b[None, :])[0])

    def dist_many(self, a: np.ndarray, bs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def log(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.log_many(a, b[None, :])[0]

    def log_many(self, a: np.ndarray, bs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def exp(self, a: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def transport(self, a: np.ndarray, b: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def dlog_adjoint(self, a: np.ndarray, b: np.ndarray, xi: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def tangent_project(self, base: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Project an ambient vector onto the tangent space at `base`.

        Chart manifolds are the identity; embedded members remove the normal
        component. Gradient assemblies mix vectors transported from nearby
        base points, and the leftover normal part (order dist * |v|) would
        otherwise pollute residual norms long before the tangent part
        converges.
        """
        return np.asarray(v, dtype=float)

    def dist_sq_grad_many(self, a: np.ndarray, bs: np.ndarray) -> np.ndarray:
        """Gradient at `a` of y -> d^2(y, b) for each row b of `bs`.

        Equals -2 log_a(b) on exactly Riemannian members; the torus patch
        overrides this with the true chart derivative.
        """
        return -2.0 * self.log_many(a, bs)


@dataclass(frozen=True)
class Sphere(Manifold):
    """Unit n-sphere embedded in R^{n+1} (constant curvature +1)."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise GeometryError(f"sphere dimension must be >= 1, got {self.dim}")

    @property
    def point_dim(self) -> int:
        return self.dim + 1

    def curvature_profile(self) -> CurvatureProfile:
        return CurvatureProfile(0.0, 1.0, 0.0, 2.0)

    def inj_lower(self) -> float:
        return math.pi

    def check_point(self, c):
        c = np.asarray(c, dtype=float)
        if c.shape != (self.point_dim,):
            raise GeometryError(f"sphere point has shape {c.shape}, expected ({self.point_dim},)")
        n = float(np.linalg.norm(c))
        if abs(n - 1.0) > 1e-12:
            raise GeometryError(f"sphere point norm {n!r} deviates from 1 beyond 1e-12")

    def check_tangent(self, base, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.point_dim,):
            raise GeometryError(f"sphere tangent has shape {v.shape}, expected ({self.point_dim},)")
        if abs(float(np.dot(v, base))) > 1e-10:
            raise GeometryError("sphere tangent is not orthogonal to its base point within 1e-10")

    def dist_many(self, a, bs):
        dots = np.clip(bs @ a, -1.0, 1.0)
        d = np.arccos(dots)
        # arccos loses ~ulp/sin(d) of absolute accuracy as dots -> 1; the
        # chord form keeps the error relative, which the proximal solver
        # needs when iterates land within 1e-6 of each other
        near = dots > 0.5
        if np.any(near):
            chord = np.linalg.norm(bs[near] - a, axis=1)
            d[near] = 2.0 * np.arcsin(np.minimum(1.0, 0.5 * chord))
        return d

    def log_many(self, a, bs):
        dots = np.clip(bs @ a, -1.0, 1.0)
        d = self.dist_many(a, bs)
        if np.any(d > math.pi - _NEAR_CUT):
            raise GeometryError("sphere log undefined at or near the antipode (distance within 1e-8 of pi)")
        u = bs - np.outer(dots, a)
        out = np.empty_like(u)
        small = d < _NEAR_ZERO
        # first-order chart difference when the geodesic is near zero
        out[small] = u[small]
        big = ~small
        norms = np.linalg.norm(u[big], axis=1)
        out[big] = u[big] * (d[big] / norms)[:, None]
        return out

    def exp(self, a, v):
        nv = float(np.linalg.norm(v))
        if nv >= math.pi:
            raise GeometryError(f"sphere exp: |v|={nv:.6g} exceeds the injectivity radius pi")
        if nv < _NEAR_ZERO:
            out = a + v
        else:
            out = math.cos(nv) * a + math.sin(nv) * (v / nv)
        return out / np.linalg.norm(out)

    def transport(self, a, b, v):
        d = self.dist(a, b)
        if d < _NEAR_ZERO:
            return np.array(v, dtype=float)
        u = self.log(a, b) / d
        coef = float(np.dot(v, u))
        return v + coef * ((math.cos(d) - 1.0) * u - math.sin(d) * a)

    def dlog_adjoint(self, a, b, xi):
        """Adjoint of (d log_a)_b: scale the component orthogonal to the
        connecting geodesic by s/sin(s), then parallel transport to b."""
        s = self.dist(a, b)
        if s < _NEAR_ZERO:
            return self.tangent_project(b, xi)
        u = self.log(a, b) / s
        radial = float(np.dot(xi, u)) * u
        sigma = s / math.sin(s)
        return self.tangent_project(b, self.transport(a, b, radial + sigma * (xi - radial)))

    def tangent_project(self, base, v):
        return v - float(np.dot(v, base)) * base


@dataclass(frozen=True)
class Circle(Manifold):
    """Flat circle of unit radius; points are single angles."""

    dim: int = field(default=1, init=False)

    @property
    def point_dim(self) -> int:
        return 1

    def curvature_profile(self) -> CurvatureProfile:
        return CurvatureProfile(0.0, 0.0, 0.0, 2.0)

    def inj_lower(self) -> float:
        return math.pi

    def canonicalize(self, c):
        return _wrap_2pi(c)

    def check_point(self, c):
        c = np.asarray(c, dtype=float)
        if c.shape != (1,):
            raise GeometryError(f"circle point has shape {c.shape}, expected (1,)")
        if not np.all(np.isfinite(c)):
            raise GeometryError("circle point is not finite")

    def check_tangent(self, base, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (1,):
            raise GeometryError(f"circle tangent has shape {v.shape}, expected (1,)")

    def dist_many(self, a, bs):
        return np.abs(_wrap_pi(bs[:, 0] - a[0]))

    def log_many(self, a, bs):
        delta = _wrap_pi(bs[:, 0] - a[0])
        if np.any(np.abs(delta) > math.pi - _NEAR_CUT):
            raise GeometryError("circle log undefined at or near the antipode (distance within 1e-8 of pi)")
        return delta[:, None]

    def exp(self, a, v):
        if abs(float(v[0])) >= math.pi:
            raise GeometryError(f"circle exp: |v|={abs(float(v[0])):.6g} exceeds the injectivity radius pi")
        return _wrap_2pi(a + v)

    def transport(self, a, b, v):
        return np.array(v, dtype=float)

    def dlog_adjoint(self, a, b, xi):
        return np.array(xi, dtype=float)


@dataclass(frozen=True)
class TorusPatch(Manifold):
    """Patch of an embedded torus handled in a frozen-metric chart.

    Points are (theta, phi) angle pairs near center = (theta0, phi0); the
    squared distance is A(phi_mid)^2 dtheta^2 + r^2 dphi^2 with
    A(phi) = R + r cos(phi) and phi_mid the arithmetic mean of the two phi
    values unwrapped relative to the patch center. Tangent coordinates are the
    orthonormal pair (A dtheta, r dphi). The chart is only approximately
    Riemannian: ops on a single point pair are exactly consistent, but
    identities coupling three points pick up O(metric variation) terms, so
    dist_sq_grad_many and dlog_adjoint differentiate the chart formulas
    directly instead of assuming -2 log / transport shortcuts. The solver
    treats the patch with a flat profile.
    """

    major_radius: float
    minor_radius: float
    center: tuple[float, float]
    patch_radius: float
    dim: int = field(default=2, init=False)

    def __post_init__(self):
        big_r, small_r = self.major_radius, self.minor_radius
        if not (big_r > small_r > 0.0):
            raise GeometryError(f"torus radii must satisfy R > r > 0, got R={big_r!r}, r={small_r!r}")
        cap = math.pi * min(small_r, big_r - small_r)
        if not (0.0 < self.patch_radius <= cap):
            raise GeometryError(
                f"patch radius {self.patch_radius!r} must lie in (0, pi*min(r, R-r)] = (0, {cap:.6g}] "
                "so angular unwrapping stays single-valued"
            )
        object.__setattr__(self, "center", (float(_wrap_2pi(self.center[0])), float(_wrap_2pi(self.center[1]))))

    @property
    def point_dim(self) -> int:
        return 2

    def curvature_profile(self) -> CurvatureProfile:
        return CurvatureProfile(0.0, 0.0, 0.0, 2.0)

    def inj_lower(self) -> float:
        return self.patch_radius

    def inj_lower_at(self, c):
        return self.patch_radius - self.center_dist(c)

    def gauss_curvature(self, phi: float) -> float:
        """Gaussian curvature of the embedded torus at angle phi (reported for
        diagnostics; the chart itself is treated as flat)."""
        big_r, small_r = self.major_radius, self.minor_radius
        return math.cos(phi) / (small_r * (big_r + small_r * math.cos(phi)))

    def _rel(self, c):
        """Angles unwrapped relative to the patch center."""
        t0, p0 = self.center
        c = np.asarray(c, dtype=float)
        return np.stack([_wrap_pi(c[..., 0] - t0), _wrap_pi(c[..., 1] - p0)], axis=-1)

    def center_dist(self, c) -> float:
        rel = self._rel(np.asarray(c, dtype=float))
        a_mid = self.major_radius + self.minor_radius * math.cos(self.center[1] + 0.5 * float(rel[1]))
        return math.hypot(a_mid * float(rel[0]), self.minor_radius * float(rel[1]))

    def canonicalize(self, c):
        return _wrap_2pi(c)

    def check_point(self, c):
        c = np.asarray(c, dtype=float)
        if c.shape != (2,):
            raise GeometryError(f"torus point has shape {c.shape}, expected (2,)")
        if not np.all(np.isfinite(c)):
            raise GeometryError("torus point is not finite")
        d = self.center_dist(c)
        if d > self.patch_radius + 1e-12:
            raise GeometryError(
                f"torus point outside patch: chart distance {d:.6g} from center exceeds {self.patch_radius:.6g}"
            )

    def check_tangent(self, base, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (2,):
            raise GeometryError(f"torus tangent has shape {v.shape}, expected (2,)")

    def dist_many(self, a, bs):
        ra = self._rel(a)
        rb = self._rel(bs)
        phi_mid = self.center[1] + 0.5 * (ra[1] + rb[:, 1])
        a_mid = self.major_radius + self.minor_radius * np.cos(phi_mid)
        return np.hypot(a_mid * (rb[:, 0] - ra[0]), self.minor_radius * (rb[:, 1] - ra[1]))

    def log_many(self, a, bs):
        ra = self._rel(a)
        rb = self._rel(bs)
        phi_mid = self.center[1] + 0.5 * (ra[1] + rb[:, 1])
        a_mid = self.major_radius + self.minor_radius * np.cos(phi_mid)
        return np.stack([a_mid * (rb[:, 0] - ra[0]), self.minor_radius * (rb[:, 1] - ra[1])], axis=1)

    def exp(self, a, v):
        ra = self._rel(a)
        phi_new = ra[1] + float(v[1]) / self.minor_radius
        phi_mid = self.center[1] + 0.5 * (ra[1] + phi_new)
        a_mid = self.major_radius + self.minor_radius * math.cos(phi_mid)
        theta_new = ra[0] + float(v[0]) / a_mid
        out = np.array([self.center[0] + theta_new, self.center[1] + phi_new])
        self.check_point(_wrap_2pi(out))
        return _wrap_2pi(out)

    def transport(self, a, b, v):
        return np.array(v, dtype=float)

    def dist_sq_grad_many(self, a, bs):
        ra = self._rel(a)
        rb = self._rel(bs)
        dth = ra[0] - rb[:, 0]
        dph = ra[1] - rb[:, 1]
        phi_mid = self.center[1] + 0.5 * (ra[1] + rb[:, 1])
        a_mid = self.major_radius + self.minor_radius * np.cos(phi_mid)
        a_at = self.major_radius + self.minor_radius * math.cos(self.center[1] + ra[1])
        # d/dtheta sees the frozen A(phi_mid) metric through the chart scale
        # A(phi_a); d/dphi additionally moves phi_mid itself
        g_th = 2.0 * a_mid * a_mid * dth / a_at
        g_ph = 2.0 * self.minor_radius * dph - a_mid * np.sin(phi_mid) * dth * dth
        return np.stack([g_th, g_ph], axis=1)

    def dlog_adjoint(self, a, b, xi):
        ra = self._rel(a)
        rb = self._rel(b)
        dth = float(rb[0] - ra[0])
        phi_mid = self.center[1] + 0.5 * float(ra[1] + rb[1])
        a_mid = self.major_radius + self.minor_radius * math.cos(phi_mid)
        a_at = self.major_radius + self.minor_radius * math.cos(self.center[1] + float(rb[1]))
        # adjoint of d(log_a)_b = [[A_mid/A(phi_b), -sin(phi_mid) dtheta / 2], [0, 1]]^T
        return np.array(
            [
                (a_mid / a_at) * float(xi[0]),
                -0.5 * math.sin(phi_mid) * dth * float(xi[0]) + float(xi[1]),
            ]
        )


@dataclass(frozen=True)
class Product(Manifold):
    """Finite product with additive squared distance; factors may not nest."""

    factors: tuple[Manifold, ...]

    def __post_init__(self):
        if len(self.factors) < 2:
            raise GeometryError("product needs at least two factors")
        if any(isinstance(f, Product) for f in self.factors):
            raise GeometryError("products may not nest")
        offsets = []
        start = 0
        for f in self.factors:
            offsets.append((start, start + f.point_dim))
            start += f.point_dim
        object.__setattr__(self, "_slices", tuple(slice(a, b) for a, b in offsets))

    @property
    def point_dim(self) -> int:
        return sum(f.point_dim for f in self.factors)

    @property
    def dim(self) -> int:
        return sum(f.dim for f in self.factors)

    def curvature_profile(self) -> CurvatureProfile:
        prof = self.factors[0].curvature_profile()
        for f in self.factors[1:]:
            prof = prof.combine(f.curvature_profile())
        return prof

    def inj_lower(self) -> float:
        return min(f.inj_lower() for f in self.factors)

    def inj_lower_at(self, c):
        return min(f.inj_lower_at(c[s]) for f, s in zip(self.factors, self._slices))

    def canonicalize(self, c):
        c = np.asarray(c, dtype=float)
        return np.concatenate([f.canonicalize(c[s]) for f, s in zip(self.factors, self._slices)])

    def check_point(self, c):
        c = np.asarray(c, dtype=float)
        if c.shape != (self.point_dim,):
            raise GeometryError(f"product point has shape {c.shape}, expected ({self.point_dim},)")
        for f, s in zip(self.factors, self._slices):
            f.check_point(c[s])

    def check_tangent(self, base, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.point_dim,):
            raise GeometryError(f"product tangent has shape {v.shape}, expected ({self.point_dim},)")
        for f, s in zip(self.factors, self._slices):
            f.check_tangent(base[s], v[s])

    def dist_many(self, a, bs):
        acc = np.zeros(bs.shape[0])
        for f, s in zip(self.factors, self._slices):
            acc += f.dist_many(a[s], bs[:, s]) ** 2
        return np.sqrt(acc)

    def log_many(self, a, bs):
        return np.concatenate(
            [f.log_many(a[s], bs[:, s]) for f, s in zip(self.factors, self._slices)], axis=1
        )

    def exp(self, a, v):
        return np.concatenate([f.exp(a[s], v[s]) for f, s in zip(self.factors, self._slices)])

    def transport(self, a, b, v):
        return np.concatenate([f.transport(a[s], b[s], v[s]) for f, s in zip(self.factors, self._slices)])

    def dlog_adjoint(self, a, b, xi):
        return np.concatenate([f.dlog_adjoint(a[s], b[s], xi[s]) for f, s in zip(self.factors, self._slices)])

    def tangent_project(self, base, v):
        return np.concatenate(
            [f.tangent_project(base[s], v[s]) for f, s in zip(self.factors, self._slices)]
        )

    def dist_sq_grad_many(self, a, bs):
        return np.concatenate(
            [f.dist_sq_grad_many(a[s], bs[:, s]) for f, s in zip(self.factors, self._slices)], axis=1
        )


# ---------------------------------------------------------------------------
# Point / tangent wrappers and the functional API
# ---------------------------------------------------------------------------


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ManifoldPoint:
    manifold: Manifold
    coords: np.ndarray

    def __post_init__(self):
        c = self.manifold.canonicalize(np.asarray(self.coords, dtype=float))
        self.manifold.check_point(c)
        object.__setattr__(self, "coords", _freeze(c))

    def __eq__(self, other):
        if not isinstance(other, ManifoldPoint):
            return NotImplemented
        return self.manifold == other.manifold and np.array_equal(self.coords, other.coords)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class TangentVector:
    point: ManifoldPoint
    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        self.point.manifold.check_tangent(self.point.coords, c)
        object.__setattr__(self, "coords", _freeze(c))

    def __eq__(self, other):
        if not isinstance(other, TangentVector):
            return NotImplemented
        return self.point == other.point and np.array_equal(self.coords, other.coords)

    __hash__ = None

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))


def _same_manifold(p: ManifoldPoint, q: ManifoldPoint) -> Manifold:
    if p.manifold != q.manifold:
        raise GeometryError("points live on different manifolds")
    return p.manifold


def distance(p: ManifoldPoint, q: ManifoldPoint) -> float:
    return _same_manifold(p, q).dist(p.coords, q.coords)


def log(p: ManifoldPoint, q: ManifoldPoint) -> TangentVector:
    m = _same_manifold(p, q)
    return TangentVector(p, m.log(p.coords, q.coords))


def exp(p: ManifoldPoint, v: TangentVector) -> ManifoldPoint:
    if v.point != p:
        raise GeometryError("tangent vector is not based at the given point")
    return ManifoldPoint(p.manifold, p.manifold.exp(p.coords, v.coords))


def transport(p: ManifoldPoint, q: ManifoldPoint, v: TangentVector) -> TangentVector:
    m = _same_manifold(p, q)
    if v.point != p:
        raise GeometryError("tangent vector is not based at the source point")
    return TangentVector(q, m.transport(p.coords, q.coords, v.coords))


def dlog_adjoint(p: ManifoldPoint, q: ManifoldPoint, xi: TangentVector) -> TangentVector:
    m = _same_manifold(p, q)
    if xi.point != p:
        raise GeometryError("covector is not based at the source point")
    return TangentVector(q, m.dlog_adjoint(p.coords, q.coords, xi.coords))


def frechet_mean(
    points: list[ManifoldPoint],
    weights=None,
    tol: float = 1e-10,
    max_iter: int = 1000,
) -> ManifoldPoint:
    """Weighted Frechet mean by fixed-point iteration with step 1/zeta_D.

    Weights must be nonnegative and sum to 1 within 1e-10. The caller is
    responsible for supplying points inside a common strongly convex ball.
    """
    if not points:
        raise GeometryError("frechet mean of an empty point list")
    m = points[0].manifold
    for p in points[1:]:
        if p.manifold != m:
            raise GeometryError("points live on different manifolds")
    n = len(points)
    w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (n,) or np.any(w < 0.0):
        raise GeometryError("frechet mean weights must be nonnegative")
    if abs(float(w.sum()) - 1.0) > 1e-10:
        raise GeometryError(f"frechet mean weights sum to {float(w.sum())!r}, expected 1 within 1e-10")

    coords = np.stack([p.coords for p in points])
    # medoid start and data diameter from the full pairwise table
    cost = np.empty(n)
    diam = 0.0
    for i in range(n):
        d = m.dist_many(coords[i], coords)
        cost[i] = float(np.dot(w, d * d))
        diam = max(diam, float(d.max()))
    y = coords[int(np.argmin(cost))]
    step = 1.0 / zeta_minus(diam, m.curvature_profile().lam_minus)
    for _ in range(max_iter):
        g = w @ m.log_many(y, coords)
        if float(np.linalg.norm(g)) <= tol:
            return ManifoldPoint(m, y)
        y = m.exp(y, step * g)
    raise GeometryError(f"frechet mean did not converge within {max_iter} iterations")
