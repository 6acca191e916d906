"""Reduced soliton equations for the warp factor ``rho = F'``.

On a gradient Yamabe soliton with metric ``dr^2 + rho^2 gbar`` the soliton
equation collapses to ``R = rho' + lam``. Feeding this into the warped scalar
curvature gives a second-order ODE for ``rho``:

* n = 2:  ``2 rho'' + rho rho' + lam rho = 0``
* n = 3:  ``rho^2 rho' + lam rho^2 + 2 rho'^2 + 4 rho rho'' - rbar = 0``

The 3D equation is written once for every sign of ``lam``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, PoleObstructionError, SingularityError
from .geometry import FiberKind, FiberModel


_EPS = float(np.finfo(float).eps)


class StartCase(enum.Enum):
    POLE = "pole"
    LINE = "line"


@dataclass(frozen=True)
class SolitonParams:
    """Dimension, soliton constant, fiber and boundary-data case.

    ``branch`` is the sign of ``rho'(0)`` at a pole (+1 for branch A,
    -1 for branch B); it is ignored on the full line.
    """

    n: int
    lam: float
    fiber: FiberModel = field(default_factory=FiberModel.circle)
    case: StartCase = StartCase.POLE
    branch: int = 1

    def __post_init__(self):
        if self.n not in (2, 3):
            raise DomainError(f"only dimensions 2 and 3 are supported, got {self.n}")
        if not math.isfinite(self.lam):
            raise DomainError("lambda must be finite")
        if self.branch not in (1, -1):
            raise DomainError("branch must be +1 (A) or -1 (B)")
        if self.n == 2 and self.fiber.kind is not FiberKind.CIRCLE:
            raise DomainError("a 2D warped product has a circle fiber")
        if self.n == 3 and self.fiber.dim != 2:
            raise DomainError("a 3D warped product needs a surface fiber")
        if self.n == 3 and self.case is StartCase.POLE:
            if self.fiber.kind is not FiberKind.ROUND_SPHERE2:
                raise PoleObstructionError(
                    f"a smooth 3D pole needs rbar = 2 rho'(0)^2 = 2 (round sphere), "
                    f"got {self.fiber.kind.value} with rbar={self.rbar}")
            if self.branch != 1:
                raise DomainError("3D pole starts use branch A (rho > 0)")

    @property
    def rbar(self) -> float:
        return self.fiber.rbar

    @property
    def regime(self) -> str:
        if self.lam > 0:
            return "shrinking"
        if self.lam < 0:
            return "expanding"
        return "steady"


@dataclass(frozen=True)
class WarpState:
    """Point of a trajectory: ``rho = F'`` and its slope at ``r``.

    ``R`` optionally carries the scalar curvature when it is known more
    accurately than ``drho + lam`` (the integrator advances ``R`` directly).
    """

    r: float
    rho: float
    drho: float
    F: float = 0.0
    R: Optional[float] = None


def rhs_2d(state: WarpState, lam: float) -> float:
    return -0.5 * state.rho * (state.drho + lam)


def cancellation_free(*terms: float) -> float:
    """Sum of ``terms``, with results inside the rounding bound set to zero.

    A sum that cancels to within a few ulps of its largest term carries no
    information, and treating it as exactly zero keeps equilibria such as
    ``rho = fl(sqrt(rbar/lam))`` fixed instead of drifting off a saddle.
    """
    total = math.fsum(terms)
    if abs(total) <= 8.0 * _EPS * sum(abs(t) for t in terms):
        return 0.0
    return total


def rhs_3d(state: WarpState, lam: float, rbar: float) -> float:
    rho, d = state.rho, state.drho
    if not rho > 0:
        raise SingularityError(f"3D soliton equation is singular at rho={rho}")
    rr = rho * rho
    return cancellation_free(rbar, -rr * (d + lam), -2.0 * d * d) / (4.0 * rho)


def rhs(state: WarpState, params: SolitonParams) -> float:
    if params.n == 2:
        return rhs_2d(state, params.lam)
    return rhs_3d(state, params.lam, params.rbar)


def scalar_from_state(state: WarpState, lam: float) -> float:
    return state.drho + lam


def third_derivative(state: WarpState, ddrho: float, params: SolitonParams) -> float:
    """``rho'''`` from the differentiated soliton equation."""
    rho, d, lam = state.rho, state.drho, params.lam
    if params.n == 2:
        return -0.5 * (d * d + rho * ddrho + lam * d)
    if not rho > 0:
        raise SingularityError(f"3D soliton equation is singular at rho={rho}")
    R, dR = d + lam, ddrho
    return -(2.0 * rho * (R - lam) * R + rho * rho * dR + 8.0 * (R - lam) * dR) / (4.0 * rho)


def residual(state: WarpState, ddrho: float, params: SolitonParams) -> float:
    """Left-hand side of the soliton ODE; zero on exact solutions."""
    rho, d, lam = state.rho, state.drho, params.lam
    if params.n == 2:
        return 2.0 * ddrho + rho * d + lam * rho
    if not rho > 0:
        raise SingularityError(f"3D soliton equation is singular at rho={rho}")
    return rho * rho * d + lam * rho * rho + 2.0 * d * d + 4.0 * rho * ddrho - params.rbar


def steady_first_integral(rho: float, drho: float) -> float:
    """Conserved quantity of the steady 3D flow with a flat fiber.

    Valid only for n = 3, lam = 0, rbar = 0.
    """
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho}")
    s = math.sqrt(rho)
    return 2.0 * s * drho + 0.2 * rho * rho * s


def steady_reduced_rhs(rho: float, C: float) -> float:
    """``rho'`` on the level set ``steady_first_integral = C``."""
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho}")
    return -0.1 * rho * rho + 0.5 * C / math.sqrt(rho)


def steady_equilibrium(C: float) -> float:
    """Zero-slope level ``(5C)^(2/5)`` of the reduced steady flow (C > 0)."""
    if not C > 0:
        raise DomainError("the steady flow has a positive equilibrium only for C > 0")
    return (5.0 * C) ** 0.4


def cigar_closed_form(r):
    """Hamilton's cigar: ``(2 tanh(r/2), sech^2(r/2), 4 log cosh(r/2))``."""
    r = np.asarray(r, dtype=float)
    half = 0.5 * r
    rho = 2.0 * np.tanh(half)
    a = np.abs(half)
    # sech^2 x = 4 e^{-2|x|} / (1 + e^{-2|x|})^2, no overflow for large |x|
    e = np.exp(-2.0 * a)
    drho = 4.0 * e / (1.0 + e) ** 2
    # log cosh x = log1p(2 sinh^2(x/2)) near 0 and |x| + log1p(e^{-2|x|}) - log 2 far out
    small = np.minimum(a, 20.0)
    F = 4.0 * np.where(a < 20.0, np.log1p(2.0 * np.sinh(0.5 * small) ** 2),
                       a + np.log1p(e) - math.log(2.0))
    if r.ndim == 0:
        return float(rho), float(drho), float(F)
    return rho, drho, F


def constant_expanding_solution(lam: float, rbar: float) -> float:
    """Warp factor of the product expanding soliton with ``R = lam``."""
    if not lam < 0:
        raise DomainError("the constant solution needs lam < 0")
    if not rbar < 0:
        raise DomainError("the constant solution needs rbar < 0")
    return math.sqrt(rbar / lam)


def predicted_scalar_2d(R0: float, rho_integral: float) -> float:
    """2D sign law: ``R(r) = R(r0) exp(-1/2 int_{r0}^r rho)``."""
    return R0 * math.exp(-0.5 * rho_integral)


def first_integral_2d(rho: float, drho: float, lam: float) -> float:
    """Conserved quantity of the 2D soliton ODE for ``lam != 0``.

    ``rho' - lam log|rho' + lam| + rho^2/4`` is constant along every
    solution on which ``R = rho' + lam`` does not vanish.
    """
    R = drho + lam
    if R == 0:
        raise DomainError("first integral is undefined on the flat solution R = 0")
    if lam == 0:
        raise DomainError("use the cigar closed form for lam = 0")
    return drho - lam * math.log(abs(R)) + 0.25 * rho * rho


def separatrix_slope_2d(rho0: float, lam: float) -> float:
    """Slope ``rho'`` at ``rho0`` of the complete expanding 2D full-line soliton.

    Complete solutions with ``lam < 0`` and ``R < 0`` must decay to
    ``rho -> 0``, ``rho' -> 0`` as ``r -> -inf``, which fixes the value of
    :func:`first_integral_2d` at ``-lam log(-lam)``. Every other slope in
    ``(0, -lam)`` breaks down at finite ``r`` going backwards.
    """
    from scipy.optimize import brentq

    if not lam < 0:
        raise DomainError("the full-line separatrix exists only for lam < 0")
    if not rho0 > 0:
        raise DomainError("rho0 must be positive")
    L = -lam
    q = 0.25 * rho0 * rho0

    # H - H_sep = q - L m(x) with x = rho'/L and m(x) = -x - log(1 - x)
    def gap(x):
        return q - L * _neg_log_remainder(x)

    hi = 1.0 - np.finfo(float).eps
    return L * brentq(gap, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def _neg_log_remainder(x: float) -> float:
    """``-x - log(1 - x) = sum_{k>=2} x^k / k`` without cancellation."""
    if x < 0.05:
        return sum(x**k / k for k in range(2, 26))
    return -x - math.log1p(-x)
