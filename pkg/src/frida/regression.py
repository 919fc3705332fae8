"""Datasets, affine and local-linear weight constructions, safe-region
predicates, and the signed objective split f = g - h.

Weights may be negative away from the predictor mean, which is what makes the
fitted-value problem a difference of convex functions rather than a plain
barycenter. Everything here is immutable after construction and evaluation is
pure, so sweeps over query points can share a dataset freely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .curvature import CurvatureProfile, SafeSetGeometry
from .geometry import Manifold, ManifoldPoint, TangentVector, frechet_mean

__all__ = [
    "RegressionError",
    "RegressionDataset",
    "WeightVector",
    "DCObjective",
    "SafeRegionReport",
    "KERNELS",
    "auto_safe_set",
    "global_weights",
    "local_weights",
    "nadaraya_watson_weights",
    "nonneg_region_check",
    "safe_region_check",
    "objective_value",
    "gradient",
    "boundary_distance",
]

# auto safe-set construction: data radius inflation and the interpolation
# margin between the lower bound r and the assumption ceilings
_R_INFLATION = 1.01
_MARGIN = 0.95
# first positive root of t*cot(t) = -1; delta_plus(t, 1) reaches -1 here
_DELTA_EX_FLOOR_ARG = 2.028757838110434

# smallest usable local-linear denominator mu0*mu2 - mu1^2
_LOCAL_DEGENERACY = 1e-14


class RegressionError(ValueError):
    """Raised on invalid datasets, weights, or degenerate designs."""


def _gaussian(u: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)


def _epanechnikov(u: np.ndarray) -> np.ndarray:
    return 0.75 * np.clip(1.0 - u * u, 0.0, None)


def _quartic(u: np.ndarray) -> np.ndarray:
    return (15.0 / 16.0) * np.clip(1.0 - u * u, 0.0, None) ** 2


KERNELS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "gaussian": _gaussian,
    "epanechnikov": _epanechnikov,
    "quartic": _quartic,
}


def _kernel(name: str) -> Callable[[np.ndarray], np.ndarray]:
    try:
        return KERNELS[name]
    except KeyError:
        raise RegressionError(f"unknown kernel {name!r}; choose from {sorted(KERNELS)}") from None


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RegressionDataset:
    """Predictors in R^q paired with responses on a common manifold.

    The empirical mean and covariance of the predictors are fixed at
    construction; covariance inversion goes through a symmetric
    eigendecomposition and fails hard when the smallest eigenvalue drops
    below 1e-10 times the largest (a silent pseudo-inverse would corrupt
    every downstream weight).
    """

    manifold: Manifold
    predictors: np.ndarray  # (m, q)
    responses: np.ndarray  # (m, point_dim) coordinate rows
    safe_set: SafeSetGeometry | None = None
    label: str = ""

    def __post_init__(self):
        x = np.asarray(self.predictors, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2 or x.shape[0] < 2:
            raise RegressionError(f"predictors must be (m >= 2, q), got shape {x.shape}")
        y = np.asarray(self.responses, dtype=float)
        if y.ndim != 2 or y.shape != (x.shape[0], self.manifold.point_dim):
            raise RegressionError(
                f"responses must be ({x.shape[0]}, {self.manifold.point_dim}), got {y.shape}"
            )
        y = np.stack([self.manifold.canonicalize(row) for row in y])
        for row in y:
            self.manifold.check_point(row)

        m = x.shape[0]
        mu = x.mean(axis=0)
        centered = x - mu
        sigma = centered.T @ centered / m
        evals, evecs = np.linalg.eigh(sigma)
        if evals[0] <= 1e-10 * evals[-1] or evals[-1] <= 0.0:
            raise RegressionError(
                f"predictor covariance is numerically singular (eigenvalues {evals.tolist()})"
            )
        sigma_inv = (evecs / evals) @ evecs.T

        if self.safe_set is not None:
            c = np.asarray(self.safe_set.center, dtype=float)
            d = self.manifold.dist_many(c, y)
            if float(d.max()) > self.safe_set.r + 1e-12:
                raise RegressionError(
                    f"response at distance {float(d.max()):.6g} from the safe-set center "
                    f"exceeds the data radius {self.safe_set.r:.6g}"
                )

        object.__setattr__(self, "predictors", _freeze(x))
        object.__setattr__(self, "responses", _freeze(y))
        object.__setattr__(self, "mu_hat", _freeze(mu))
        object.__setattr__(self, "sigma_hat", _freeze(sigma))
        object.__setattr__(self, "sigma_inv", _freeze(sigma_inv))

    @property
    def m(self) -> int:
        return self.predictors.shape[0]

    @property
    def q(self) -> int:
        return self.predictors.shape[1]

    def response_points(self) -> list[ManifoldPoint]:
        return [ManifoldPoint(self.manifold, row) for row in self.responses]

    def require_safe_set(self) -> SafeSetGeometry:
        if self.safe_set is None:
            raise RegressionError("this operation needs a dataset with a populated safe set")
        return self.safe_set


def auto_safe_set(
    manifold: Manifold, responses: np.ndarray, profile: CurvatureProfile | None = None
) -> SafeSetGeometry:
    """Safe set from the data: c = uniform response mean, r = 1.01 * max
    distance to c, and rho_ex / rho at 95% of their assumption ceilings.

    The existence radius is additionally capped where delta_plus(r + rho_ex)
    would fall below -1: past that point a larger ball buys no further
    interior guarantee while the proximal weight grows like
    -delta_plus(r + rho_ex), slowing every solve by the same factor.

    `profile` overrides the manifold's own curvature bounds; callers use it
    when the data concentrate along a region whose effective curvature is
    smaller than the global bound, which loosens the comparison constants
    accordingly. Invariants that depend on the constants are still asserted
    per step, so an override never silently weakens a run.
    """
    pts = [ManifoldPoint(manifold, row) for row in np.asarray(responses, dtype=float)]
    center = frechet_mean(pts)
    c = center.coords
    r = _R_INFLATION * float(manifold.dist_many(c, np.asarray(responses, dtype=float)).max())
    if r <= 0.0:
        raise RegressionError("auto safe set needs at least two distinct responses")
    if profile is None:
        profile = manifold.curvature_profile()
    iota = manifold.inj_lower_at(c)
    lam = profile.lam_plus
    cap_ex = iota if lam == 0.0 else min(iota, math.pi / math.sqrt(lam))
    cap_rho = iota / 2.0 if lam == 0.0 else min(iota / 2.0, math.pi / (2.0 * math.sqrt(lam)))
    if cap_ex - r <= r or cap_rho <= r:
        raise RegressionError(
            f"data radius {r:.6g} leaves no room inside the existence bounds "
            f"(ceilings {cap_ex:.6g}, {cap_rho:.6g})"
        )
    rho_ex = r + _MARGIN * ((cap_ex - r) - r)
    if lam > 0.0:
        floor_cap = _DELTA_EX_FLOOR_ARG / math.sqrt(lam) - r
        if floor_cap > r:
            rho_ex = min(rho_ex, floor_cap)
    rho = r + _MARGIN * (cap_rho - r)
    return SafeSetGeometry(tuple(c.tolist()), r, rho_ex, rho, iota, profile)


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Signed weights at one query; sums to 1 by the affine identity."""

    x: np.ndarray  # query predictor, shape (q,)
    values: np.ndarray  # shape (m,)
    kind: str  # "global" | "local" | "nadaraya_watson"

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise RegressionError(f"weights must be a nonempty vector, got shape {v.shape}")
        if self.kind not in ("global", "local", "nadaraya_watson"):
            raise RegressionError(f"unknown weight kind {self.kind!r}")
        # the local-linear identity cancels through a small denominator, so it
        # earns one digit of slack
        tol = 1e-9 if self.kind == "local" else 1e-10
        total = float(v.sum())
        if abs(total - 1.0) > tol:
            raise RegressionError(f"weights sum to {total!r}, expected 1 within {tol:g}")
        object.__setattr__(self, "x", _freeze(x))
        object.__setattr__(self, "values", _freeze(v))

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def w_plus(self) -> float:
        return float(self.values[self.values >= 0.0].sum())

    @property
    def w_minus(self) -> float:
        return -float(self.values[self.values < 0.0].sum())

    @property
    def negative_indices(self) -> np.ndarray:
        return np.flatnonzero(self.values < 0.0)

    @property
    def has_negative(self) -> bool:
        return bool(np.any(self.values < 0.0))


def global_weights(dataset: RegressionDataset, x) -> WeightVector:
    """w_i(x) = (1/m) * (1 + (x_i - mu)^T Sigma^{-1} (x - mu))."""
    xq = np.atleast_1d(np.asarray(x, dtype=float))
    if xq.shape != (dataset.q,):
        raise RegressionError(f"query has shape {xq.shape}, expected ({dataset.q},)")
    s = 1.0 + (dataset.predictors - dataset.mu_hat) @ (dataset.sigma_inv @ (xq - dataset.mu_hat))
    return WeightVector(xq, s / dataset.m, "global")


def local_weights(dataset: RegressionDataset, x: float, kernel: str, h: float) -> WeightVector:
    """Local-linear weights (1/m) K_h(x_i - x) (mu2 - mu1 (x_i - x)) / (mu0 mu2 - mu1^2)."""
    if dataset.q != 1:
        raise RegressionError("local weights are defined for scalar predictors only")
    if not h > 0.0:
        raise RegressionError(f"bandwidth must be positive, got {h!r}")
    k_fun = _kernel(kernel)
    dx = dataset.predictors[:, 0] - float(x)
    k = k_fun(dx / h) / h
    mu0 = float(k.mean())
    mu1 = float((k * dx).mean())
    mu2 = float((k * dx * dx).mean())
    denom = mu0 * mu2 - mu1 * mu1
    if denom <= _LOCAL_DEGENERACY:
        raise RegressionError(
            f"no effective local data at x={float(x):.6g} with h={h:.6g} "
            f"(mu0*mu2 - mu1^2 = {denom:.3e})"
        )
    w = k * (mu2 - mu1 * dx) / (dataset.m * denom)
    return WeightVector(np.array([float(x)]), w, "local")


def nadaraya_watson_weights(
    dataset: RegressionDataset, x: float, kernel: str, h: float, period: float | None = None
) -> WeightVector:
    """Kernel-normalized nonnegative weights; `period` wraps predictor gaps
    for circular designs. Used by the windowed benchmarks where w_minus = 0
    is wanted by construction."""
    if dataset.q != 1:
        raise RegressionError("kernel weights are defined for scalar predictors only")
    if not h > 0.0:
        raise RegressionError(f"bandwidth must be positive, got {h!r}")
    dx = dataset.predictors[:, 0] - float(x)
    if period is not None:
        dx = (dx + 0.5 * period) % period - 0.5 * period
    k = _kernel(kernel)(dx / h) / h
    total = float(k.sum())
    if total <= 0.0:
        raise RegressionError(f"kernel mass vanishes at x={float(x):.6g} with h={h:.6g}")
    return WeightVector(np.array([float(x)]), k / total, "nadaraya_watson")


def nonneg_region_check(dataset: RegressionDataset, x) -> bool:
    """True iff every global weight at x is nonnegative: after whitening with
    Sigma^{-1/2}, the condition reads x_i~^T x~ >= -1 for all i."""
    xq = np.atleast_1d(np.asarray(x, dtype=float))
    evals, evecs = np.linalg.eigh(dataset.sigma_hat)
    white = (evecs / np.sqrt(evals)) @ evecs.T
    xt = white @ (xq - dataset.mu_hat)
    xit = (dataset.predictors - dataset.mu_hat) @ white.T
    return bool(np.all(xit @ xt >= -1.0))


@dataclass(frozen=True)
class SafeRegionReport:
    """The two interiority guarantees, reported independently."""

    interior_guaranteed: bool  # w_minus < (rho_ex - r) / (2 r)
    ellipsoid_ok: bool  # (x - mu)^T Sigma^{-1} (x - mu) < (rho_ex / r)^2 - 1
    w_minus: float
    w_minus_bound: float
    quad_form: float
    quad_bound: float

    @property
    def status(self) -> str:
        if self.interior_guaranteed:
            return "interior_guaranteed"
        if self.ellipsoid_ok:
            return "ellipsoid_ok"
        return "outside"


def safe_region_check(dataset: RegressionDataset, weights: WeightVector) -> SafeRegionReport:
    safe = dataset.require_safe_set()
    w_minus_bound = (safe.rho_ex - safe.r) / (2.0 * safe.r)
    quad_bound = (safe.rho_ex / safe.r) ** 2 - 1.0
    diff = weights.x - dataset.mu_hat
    quad_form = float(diff @ dataset.sigma_inv @ diff)
    return SafeRegionReport(
        interior_guaranteed=weights.w_minus < w_minus_bound,
        ellipsoid_ok=quad_form < quad_bound,
        w_minus=weights.w_minus,
        w_minus_bound=w_minus_bound,
        quad_form=quad_form,
        quad_bound=quad_bound,
    )


class DCObjective:
    """f(y) = sum_i w_i d^2(y, y_i) split as g - h along the weight signs.

    g collects the nonnegative weights (zeros included), h the negated
    negative ones, so both parts are nonnegative combinations of squared
    distances and grad f = grad g - grad h holds exactly by construction.
    """

    def __init__(self, dataset: RegressionDataset, weights: WeightVector):
        if weights.m != dataset.m:
            raise RegressionError(
                f"weight vector has {weights.m} entries for {dataset.m} responses"
            )
        safe = dataset.require_safe_set()
        self.dataset = dataset
        self.weights = weights
        self.delta_ex = safe.delta_ex
        self.zeta_ex = safe.zeta_ex
        v = weights.values
        self._pos = _freeze(np.where(v >= 0.0, v, 0.0))
        self._neg = _freeze(np.where(v < 0.0, -v, 0.0))
        self._center = _freeze(np.asarray(safe.center, dtype=float))

    @property
    def x(self) -> np.ndarray:
        return self.weights.x

    @property
    def w_plus(self) -> float:
        return self.weights.w_plus

    @property
    def w_minus(self) -> float:
        return self.weights.w_minus

    def g_value(self, y: np.ndarray) -> float:
        d = self.dataset.manifold.dist_many(y, self.dataset.responses)
        return float(self._pos @ (d * d))

    def h_value(self, y: np.ndarray) -> float:
        d = self.dataset.manifold.dist_many(y, self.dataset.responses)
        return float(self._neg @ (d * d))

    def value(self, y: np.ndarray) -> float:
        d = self.dataset.manifold.dist_many(y, self.dataset.responses)
        d2 = d * d
        return float(self._pos @ d2) - float(self._neg @ d2)

    def grad_g(self, y: np.ndarray) -> np.ndarray:
        return self._pos @ self.dataset.manifold.dist_sq_grad_many(y, self.dataset.responses)

    def grad_h(self, y: np.ndarray) -> np.ndarray:
        return self._neg @ self.dataset.manifold.dist_sq_grad_many(y, self.dataset.responses)

    def grad_f(self, y: np.ndarray) -> np.ndarray:
        grads = self.dataset.manifold.dist_sq_grad_many(y, self.dataset.responses)
        return self._pos @ grads - self._neg @ grads

    def boundary_distance(self, y: np.ndarray) -> float:
        return boundary_distance(self.dataset, y)


def objective_value(obj: DCObjective, y: ManifoldPoint) -> float:
    return obj.value(y.coords)


def gradient(obj: DCObjective, y: ManifoldPoint) -> TangentVector:
    """grad f(y); equals -2 sum_i w_i log_y(y_i) wherever that identity is
    exact (see the geometry notes on the torus chart)."""
    return TangentVector(y, obj.grad_f(y.coords))


def boundary_distance(dataset: RegressionDataset, y: np.ndarray) -> float:
    """Distance from y to the boundary of the existence ball: rho_ex - d(c, y)."""
    safe = dataset.require_safe_set()
    d = dataset.manifold.dist(np.asarray(safe.center, dtype=float), np.asarray(y, dtype=float))
    if d > safe.rho_ex + 1e-12:
        raise RegressionError(
            f"point at distance {d:.6g} from the center lies outside the existence ball "
            f"(rho_ex = {safe.rho_ex:.6g})"
        )
    return max(0.0, safe.rho_ex - d)
