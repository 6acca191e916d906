"""Curvature of warped metrics ``g = dr^2 + rho(r)^2 gbar``.

Closed forms are used everywhere in the library. The finite-difference
routine at the bottom builds the same quantities from the metric components
(Christoffel symbols -> Riemann -> Ricci -> scalar) and exists only so the
closed forms can be checked against something that shares no algebra with
them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, StencilRangeError


class FiberKind(enum.Enum):
    CIRCLE = "circle"
    ROUND_SPHERE2 = "sphere2"
    EUCLIDEAN2 = "euclid2"
    HYPERBOLIC2 = "hyper2"
    CONST_SCAL = "constscal"


@dataclass(frozen=True)
class FiberModel:
    """Constant-curvature fiber ``(N, gbar)`` with scalar curvature ``rbar``."""

    kind: FiberKind
    rbar: float

    def __post_init__(self):
        if not math.isfinite(self.rbar):
            raise DomainError(f"fiber scalar curvature must be finite, got {self.rbar}")
        if self.kind is FiberKind.ROUND_SPHERE2 and self.rbar != 2.0:
            raise DomainError("the unit round 2-sphere has scalar curvature 2")
        if self.kind is FiberKind.HYPERBOLIC2 and not self.rbar < 0:
            raise DomainError("a hyperbolic fiber needs negative scalar curvature")
        if self.kind in (FiberKind.CIRCLE, FiberKind.EUCLIDEAN2) and self.rbar != 0.0:
            raise DomainError(f"{self.kind.value} fiber is flat, rbar must be 0")

    @property
    def dim(self) -> int:
        return 1 if self.kind is FiberKind.CIRCLE else 2

    @classmethod
    def circle(cls) -> "FiberModel":
        return cls(FiberKind.CIRCLE, 0.0)

    @classmethod
    def sphere(cls) -> "FiberModel":
        return cls(FiberKind.ROUND_SPHERE2, 2.0)

    @classmethod
    def euclidean(cls) -> "FiberModel":
        return cls(FiberKind.EUCLIDEAN2, 0.0)

    @classmethod
    def hyperbolic(cls, rbar: float = -2.0) -> "FiberModel":
        return cls(FiberKind.HYPERBOLIC2, float(rbar))

    @classmethod
    def surface(cls, rbar: float) -> "FiberModel":
        """Pick the model surface for a given 2D fiber curvature."""
        rbar = float(rbar)
        if rbar == 2.0:
            return cls.sphere()
        if rbar == 0.0:
            return cls.euclidean()
        if rbar < 0.0:
            return cls.hyperbolic(rbar)
        return cls(FiberKind.CONST_SCAL, rbar)


@dataclass(frozen=True)
class CurvatureSample:
    r: float
    scalar_R: float
    k_gauss: Optional[float] = None
    k_rad: Optional[float] = None
    k_fib: Optional[float] = None
    ricci_rr: Optional[float] = None
    ricci_fib: Optional[float] = None


def _check_rho(rho: float) -> None:
    if not rho > 0:
        raise DomainError(f"warp factor must be positive, got rho={rho}")


def scalar_curvature_warped(n: int, rbar: float, rho: float, drho: float,
                            ddrho: float) -> float:
    """Scalar curvature of ``dr^2 + rho^2 gbar`` on an ``n``-manifold."""
    if n < 2:
        raise DomainError(f"dimension must be at least 2, got {n}")
    _check_rho(rho)
    q = drho / rho
    return rbar / rho**2 - (n - 1) * (n - 2) * q * q - 2 * (n - 1) * ddrho / rho


def gaussian_curvature_2d(rho: float, ddrho: float) -> float:
    _check_rho(rho)
    return -ddrho / rho


def curvature_sample_3d(rbar: float, rho: float, drho: float, ddrho: float,
                        r: float = 0.0) -> CurvatureSample:
    """Sectional and Ricci curvatures of a 3D warped product over a surface.

    With a constant-curvature fiber the Ricci tensor is diagonal with one
    radial eigenvalue ``2 k_rad`` and a double fiber eigenvalue
    ``k_rad + k_fib``.
    """
    _check_rho(rho)
    k_rad = -ddrho / rho
    k_fib = (0.5 * rbar - drho * drho) / rho**2
    ricci_rr = 2.0 * k_rad
    ricci_fib = (0.5 * rbar - drho * drho - rho * ddrho) / rho**2
    return CurvatureSample(
        r=r,
        scalar_R=scalar_curvature_warped(3, rbar, rho, drho, ddrho),
        k_rad=k_rad,
        k_fib=k_fib,
        ricci_rr=ricci_rr,
        ricci_fib=ricci_fib,
    )


# --------------------------------------------------------------------------
# finite-difference oracle (tests only)
# --------------------------------------------------------------------------

_THETA0 = 1.1  # generic angle, away from the coordinate singularities


def _fiber_profile(fiber: FiberModel, theta: float) -> float:
    """``f`` in the fiber chart ``dtheta^2 + f(theta)^2 dphi^2``."""
    k = 0.5 * fiber.rbar
    if k > 0:
        s = math.sqrt(k)
        return math.sin(s * theta) / s
    if k < 0:
        s = math.sqrt(-k)
        return math.sinh(s * theta) / s
    return theta


def fd_scalar_curvature_oracle(r_grid, profile, fiber: FiberModel, r: float,
                               h: Optional[float] = None) -> float:
    """Scalar curvature at ``r`` from central differences of the metric.

    ``profile`` holds warp-factor samples on the uniform grid ``r_grid`` and
    ``r`` must be a grid node at least two nodes from either end. Angular
    directions use the analytic fiber metric with the same step. Truncation
    error is O(h^2).
    """
    r_grid = np.asarray(r_grid, dtype=float)
    profile = np.asarray(profile, dtype=float)
    if r_grid.shape != profile.shape or r_grid.ndim != 1 or r_grid.size < 5:
        raise StencilRangeError("profile and grid must be matching 1D arrays of length >= 5")
    spacing = float(r_grid[1] - r_grid[0])
    if h is None:
        h = spacing
    if not math.isclose(h, spacing, rel_tol=1e-9):
        raise DomainError(f"step {h} does not match grid spacing {spacing}")
    idx = int(round((r - r_grid[0]) / h))
    if not (0 <= idx < r_grid.size) or abs(r_grid[idx] - r) > 1e-9 * max(1.0, abs(r)):
        raise StencilRangeError(f"r={r} is not a grid node")
    if idx < 2 or idx > r_grid.size - 3:
        raise StencilRangeError(f"stencil around r={r} leaves the grid")
    stencil = profile[idx - 2: idx + 3]
    if np.any(stencil <= 0):
        raise DomainError("profile must be positive on the stencil")

    dim = 1 + fiber.dim

    def metric(off):
        rho = profile[idx + off[0]]
        g = np.zeros((dim, dim))
        g[0, 0] = 1.0
        if fiber.dim == 1:
            g[1, 1] = rho * rho
        else:
            f = _fiber_profile(fiber, _THETA0 + off[1] * h)
            g[1, 1] = rho * rho
            g[2, 2] = (rho * f) ** 2
        return g

    unit = np.eye(dim, dtype=int)

    def christoffel(off):
        g = metric(off)
        ginv = np.linalg.inv(g)
        dg = np.array([(metric(off + unit[k]) - metric(off - unit[k])) / (2 * h)
                       for k in range(dim)])
        # dg[k, i, j] = d_k g_ij
        term = dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg
        # term[d, b, c] = d_b g_dc + d_c g_db - d_d g_bc
        return 0.5 * np.einsum("ad,dbc->abc", ginv, term)

    origin = np.zeros(dim, dtype=int)
    gam = christoffel(origin)
    dgam = np.array([(christoffel(origin + unit[k]) - christoffel(origin - unit[k])) / (2 * h)
                     for k in range(dim)])
    # riemann[a, b, c, d] = R^a_{bcd}
    riemann = (np.einsum("cadb->abcd", dgam) - np.einsum("dacb->abcd", dgam)
               + np.einsum("ace,edb->abcd", gam, gam)
               - np.einsum("ade,ecb->abcd", gam, gam))
    ricci = np.einsum("abad->bd", riemann)
    ginv = np.linalg.inv(metric(origin))
    return float(np.einsum("bd,bd->", ginv, ricci))
