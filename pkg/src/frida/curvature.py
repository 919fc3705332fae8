"""Curvature comparison constants and trust-region/step-size assembly.

All bounds are parametrized by a curvature profile (Lambda_minus, Lambda_plus,
L_R, c_n): sectional curvature in [-Lambda_minus, Lambda_plus], Lipschitz
constant of the curvature tensor L_R, and the dimension constant c_n of the
operator-norm bound ||R|| <= c_n * Lambda_0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "CurvatureDomainError",
    "CurvatureProfile",
    "SafeSetGeometry",
    "delta_plus",
    "zeta_minus",
    "alpha_plus",
    "b_minus",
    "c_minus",
    "l_log_pm",
    "hessian_bounds",
    "trust_radius",
    "tau",
    "subproblem_moduli",
]

# Below this value of t*sqrt(Lambda) the closed forms lose digits to
# cancellation, so a fixed 4-term Taylor expansion is used instead.
_SERIES_CUTOFF = 1e-4


class CurvatureDomainError(ValueError):
    """Raised when a comparison constant is evaluated outside its domain."""


@dataclass(frozen=True)
class CurvatureProfile:
    """Curvature bounds: -lam_minus <= sec <= lam_plus, both nonnegative."""

    lam_minus: float
    lam_plus: float
    l_r: float
    c_n: float

    def __post_init__(self):
        for name in ("lam_minus", "lam_plus", "l_r", "c_n"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0.0:
                raise CurvatureDomainError(f"curvature domain: {name}={v!r} must be finite and >= 0")

    @property
    def lam0(self) -> float:
        return max(self.lam_minus, self.lam_plus)

    def combine(self, other: "CurvatureProfile") -> "CurvatureProfile":
        """Profile of a product: componentwise max is a valid joint bound.

        Mixed planes of a product have zero sectional curvature, which lies in
        [-max lam_minus, max lam_plus] because both bounds are nonnegative.
        """
        return CurvatureProfile(
            lam_minus=max(self.lam_minus, other.lam_minus),
            lam_plus=max(self.lam_plus, other.lam_plus),
            l_r=max(self.l_r, other.l_r),
            c_n=max(self.c_n, other.c_n),
        )


def _check_t(t: float) -> float:
    t = float(t)
    if not math.isfinite(t) or t < 0.0:
        raise CurvatureDomainError(f"curvature domain: t={t!r} must be finite and >= 0")
    return t


def delta_plus(t: float, lam_plus: float) -> float:
    """t*sqrt(L+) * cot(t*sqrt(L+)); 1 when L+ = 0 or t = 0.

    Lower Hessian comparison factor. Positive only for t*sqrt(L+) < pi/2; the
    value is still a valid lower bound on (and past) [pi/2, pi), and the
    domain ends at t*sqrt(L+) = pi.
    """
    t = _check_t(t)
    if lam_plus < 0.0:
        raise CurvatureDomainError("curvature domain: lam_plus < 0")
    u = t * math.sqrt(lam_plus)
    if u >= math.pi:
        raise CurvatureDomainError(f"curvature domain: t*sqrt(lam_plus)={u:.6g} >= pi")
    if u < _SERIES_CUTOFF:
        u2 = u * u
        return 1.0 - u2 / 3.0 - u2 * u2 / 45.0 - 2.0 * u2 * u2 * u2 / 945.0
    return u * math.cos(u) / math.sin(u)


def zeta_minus(t: float, lam_minus: float) -> float:
    """t*sqrt(L-) * coth(t*sqrt(L-)); 1 when L- = 0 or t = 0. Always >= 1."""
    t = _check_t(t)
    if lam_minus < 0.0:
        raise CurvatureDomainError("curvature domain: lam_minus < 0")
    u = t * math.sqrt(lam_minus)
    if u < _SERIES_CUTOFF:
        u2 = u * u
        return 1.0 + u2 / 3.0 - u2 * u2 / 45.0 + 2.0 * u2 * u2 * u2 / 945.0
    return u * math.cosh(u) / math.sinh(u)


def alpha_plus(t: float, lam_plus: float) -> float:
    """t*sqrt(L+) / sin(t*sqrt(L+)); 1 when L+ = 0 or t = 0. Always >= 1."""
    t = _check_t(t)
    if lam_plus < 0.0:
        raise CurvatureDomainError("curvature domain: lam_plus < 0")
    u = t * math.sqrt(lam_plus)
    if u >= math.pi:
        raise CurvatureDomainError(f"curvature domain: t*sqrt(lam_plus)={u:.6g} >= pi")
    if u < _SERIES_CUTOFF:
        u2 = u * u
        return 1.0 + u2 / 6.0 + 7.0 * u2 * u2 / 360.0 + 31.0 * u2 * u2 * u2 / 15120.0
    return u / math.sin(u)


def b_minus(t: float, lam_minus: float) -> float:
    """sinh(t*sqrt(L-)) / (t*sqrt(L-)); 1 when L- = 0 or t = 0. Always >= 1."""
    t = _check_t(t)
    if lam_minus < 0.0:
        raise CurvatureDomainError("curvature domain: lam_minus < 0")
    u = t * math.sqrt(lam_minus)
    if u < _SERIES_CUTOFF:
        u2 = u * u
        return 1.0 + u2 / 6.0 + u2 * u2 / 120.0 + u2 * u2 * u2 / 5040.0
    return math.sinh(u) / u


def c_minus(t: float, lam_minus: float) -> float:
    """cosh(t*sqrt(L-)); 1 when L- = 0 or t = 0. Always >= 1."""
    t = _check_t(t)
    if lam_minus < 0.0:
        raise CurvatureDomainError("curvature domain: lam_minus < 0")
    u = t * math.sqrt(lam_minus)
    if u < _SERIES_CUTOFF:
        u2 = u * u
        return 1.0 + u2 / 2.0 + u2 * u2 / 24.0 + u2 * u2 * u2 / 720.0
    return math.cosh(u)


def l_log_pm(t: float, profile: CurvatureProfile) -> float:
    """Lipschitz bound for the differential of log on a ball of radius t.

    alpha_plus(t)^3 * [ (1/6) L_R t^2 b_minus(t)^3
                        + (5/6) c_n Lambda_0 t b_minus(t)^2 c_minus(t) ].
    Zero on flat profiles; nonnegative and nondecreasing in t.
    """
    t = _check_t(t)
    a3 = alpha_plus(t, profile.lam_plus) ** 3
    b = b_minus(t, profile.lam_minus)
    term_lr = profile.l_r * t * t * b ** 3 / 6.0
    term_lam = 5.0 * profile.c_n * profile.lam0 * t * b * b * c_minus(t, profile.lam_minus) / 6.0
    return a3 * (term_lr + term_lam)


def hessian_bounds(dist: float, profile: CurvatureProfile) -> tuple[float, float]:
    """(delta_D, zeta_D) sandwich for Hess(d^2/2) at distance D from the base."""
    return delta_plus(dist, profile.lam_plus), zeta_minus(dist, profile.lam_minus)


@dataclass(frozen=True)
class SafeSetGeometry:
    """Data ball and solver balls around a common center.

    center holds the coordinates of c (the owning dataset knows the manifold).
    r bounds the data, rho_ex bounds the iterates (existence ball M_ex), rho
    caps the per-step trust radius, iota is the injectivity lower bound at c.
    """

    center: tuple[float, ...]
    r: float
    rho_ex: float
    rho: float
    iota: float
    profile: CurvatureProfile

    def __post_init__(self):
        r, rho_ex, rho, iota = self.r, self.rho_ex, self.rho, self.iota
        if not (r > 0.0 and math.isfinite(r)):
            raise ValueError(f"safe set: data radius r={r!r} must be positive")
        if iota <= 0.0:
            raise ValueError(f"safe set: injectivity bound iota={iota!r} must be positive")
        lam = self.profile.lam_plus
        cap = iota if lam == 0.0 else min(iota, math.pi / math.sqrt(lam))
        if not (r < rho_ex < cap - r):
            raise ValueError(
                f"safe set violates existence bounds: need r < rho_ex < min(iota, pi/sqrt(L+)) - r, "
                f"got r={r:.6g}, rho_ex={rho_ex:.6g}, bound={cap - r:.6g}"
            )
        step_cap = iota / 2.0 if lam == 0.0 else min(iota / 2.0, math.pi / (2.0 * math.sqrt(lam)))
        if not (r < rho < step_cap):
            raise ValueError(
                f"safe set violates step bounds: need r < rho < min(iota/2, pi/(2 sqrt(L+))), "
                f"got r={r:.6g}, rho={rho:.6g}, bound={step_cap:.6g}"
            )

    @property
    def delta_ex(self) -> float:
        return delta_plus(self.r + self.rho_ex, self.profile.lam_plus)

    @property
    def zeta_ex(self) -> float:
        return zeta_minus(self.r + self.rho_ex, self.profile.lam_minus)


def trust_radius(boundary_dist: float, theta: float, rho: float) -> float:
    """r_k = min(theta * dist(y_k, boundary of M_ex), rho)."""
    if not boundary_dist > 0.0:
        raise ValueError(f"trust radius: iterate is not interior (boundary distance {boundary_dist!r})")
    if not (0.0 < theta < 1.0):
        raise ValueError(f"trust radius: theta={theta!r} must be in (0, 1)")
    return min(theta * boundary_dist, rho)


def tau(
    r_k: float,
    grad_h_norm: float,
    grad_f_norm: float,
    w_plus: float,
    w_minus: float,
    delta_ex: float,
    eta0: float,
    profile: CurvatureProfile,
) -> float:
    """Proximal weight: max of the curvature-matched term and the two floors."""
    dk = delta_plus(r_k, profile.lam_plus)
    if dk <= 0.0:
        raise CurvatureDomainError(f"curvature domain: delta_plus(r_k)={dk:.6g} <= 0, r_k too large")
    curv_term = (
        (l_log_pm(r_k, profile) * grad_h_norm - 2.0 * w_plus * delta_ex) / dk
        + 2.0 * grad_f_norm / (dk * r_k)
        + eta0
    )
    return max(curv_term, 1.0 - 2.0 * w_minus * delta_ex, 1.0)


def subproblem_moduli(
    r_k: float,
    grad_h_norm: float,
    tau_k: float,
    w_plus: float,
    w_minus: float,
    delta_ex: float,
    zeta_ex: float,
    profile: CurvatureProfile,
) -> tuple[float, float]:
    """(mu, L) strong-convexity and smoothness moduli of the step subproblem.

    w_minus enters the subproblem only through grad_h_norm; it is accepted to
    mirror the step-construction signature.
    """
    del w_minus
    ll = l_log_pm(r_k, profile) * grad_h_norm
    mu = 2.0 * w_plus * delta_ex + tau_k * delta_plus(r_k, profile.lam_plus) - ll
    big_l = 2.0 * w_plus * zeta_ex + ll + tau_k * zeta_minus(r_k, profile.lam_minus)
    return mu, big_l
