"""Adaptive integration of the reduced soliton ODEs.

The stepper is the Dormand-Prince 5(4) pair (local extrapolation, FSAL) with
cubic Hermite dense output between accepted steps. The state advanced
internally is ``(rho, rho', R, F)`` with ``R = rho' + lam`` the scalar
curvature. ``rho'`` and ``R`` share one derivative and stay equal up to
rounding, but each keeps its own relative accuracy: ``R`` in tails where
``rho' -> -lam`` (``rho' + lam`` would cancel to noise) and ``rho'`` near
the saddle ``rho' -> 0`` of the expanding full-line solutions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from . import odes
from .errors import DomainError, PoleObstructionError, SingularityError, StiffnessError
from .geometry import (CurvatureSample, curvature_sample_3d,
                       gaussian_curvature_2d, scalar_curvature_warped)
from .odes import SolitonParams, StartCase, WarpState

# Dormand & Prince (1980), as tabulated in Hairer, Norsett & Wanner vol. I
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
                187 / 2100, 1 / 40])
_E = _B5 - _B4

# DP5 keeps a positive, contractive amplification factor on [-2, 0]
_STABILITY_BOUND = 2.0


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    h_init: float = 1e-3
    h_min: float = 1e-14
    h_max: float = 0.25
    r_max: float = 50.0
    r_min: float = -50.0
    pole_offset: float = 1e-4
    rho_floor: float = 1e-8
    slope_cap: float = 1e6
    tail_window: float = 0.1
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("tolerances must be positive")
        if not (0 < self.h_min <= self.h_init <= self.h_max):
            raise DomainError("need 0 < h_min <= h_init <= h_max")
        if not self.pole_offset > 0:
            raise DomainError("pole_offset must be positive")
        if not self.rho_floor > 0 or not self.slope_cap > 0:
            raise DomainError("rho_floor and slope_cap must be positive")
        if not 0 < self.tail_window <= 1:
            raise DomainError("tail_window must lie in (0, 1]")


class EventKind(enum.Enum):
    RHO_ZERO = "RhoZero"
    DRHO_ZERO_CROSS = "DrhoZeroCross"
    SCALAR_ZERO_CROSS = "ScalarZeroCross"
    SLOPE_BLOWUP = "SlopeBlowup"
    HORIZON_REACHED = "HorizonReached"

    @property
    def terminal(self) -> bool:
        return self in (EventKind.RHO_ZERO, EventKind.SLOPE_BLOWUP,
                        EventKind.HORIZON_REACHED)


@dataclass(frozen=True)
class Event:
    kind: EventKind
    r: float
    state: WarpState


@dataclass(frozen=True)
class Sample:
    state: WarpState
    ddrho: float
    curvature: CurvatureSample
    C_steady: Optional[float]
    residual: float


@dataclass(frozen=True)
class Seed:
    state: WarpState
    breakdown_warning: bool = False
    C_steady: Optional[float] = None


@dataclass
class Trajectory:
    """Accepted samples of one integration, ordered by increasing ``r``.

    ``direction`` is ``"forward"``, ``"backward"`` or ``"both"`` (a
    full-line trajectory joined at its seed). ``seed_index`` locates the
    starting sample.
    """

    params: SolitonParams
    samples: List[Sample]
    events: List[Event]
    direction: str
    config: IntegratorConfig = field(default_factory=IntegratorConfig)
    seed_index: int = 0
    _nodes: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    _ys: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    _fs: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __len__(self):
        return len(self.samples)

    def _col(self, name):
        return np.array([getattr(s.state, name) for s in self.samples])

    @property
    def r(self):
        return self._col("r")

    @property
    def rho(self):
        return self._col("rho")

    @property
    def drho(self):
        return self._col("drho")

    @property
    def F(self):
        return self._col("F")

    @property
    def R(self):
        return self._col("R")

    @property
    def ddrho(self):
        return np.array([s.ddrho for s in self.samples])

    @property
    def K(self):
        """Gaussian curvature (2D) per sample."""
        return np.array([np.nan if s.curvature.k_gauss is None else s.curvature.k_gauss
                         for s in self.samples])

    @property
    def residuals(self):
        return np.array([s.residual for s in self.samples])

    @property
    def C_steady(self):
        return np.array([np.nan if s.C_steady is None else s.C_steady for s in self.samples])

    @property
    def terminal_event(self) -> Optional[Event]:
        for ev in self.events:
            if ev.kind.terminal and ev.kind is not EventKind.HORIZON_REACHED:
                return ev
        return None

    def events_of(self, kind: EventKind) -> List[Event]:
        return [ev for ev in self.events if ev.kind is kind]

    def dense(self, r):
        """Hermite-interpolated ``(rho, rho', R, F)`` at ``r`` (scalar or array)."""
        if self._nodes is None:
            self._build_dense()
        r = np.asarray(r, dtype=float)
        nodes = self._nodes
        if np.any(r < nodes[0] - 1e-12) or np.any(r > nodes[-1] + 1e-12):
            raise DomainError("dense output requested outside the integrated interval")
        i = np.clip(np.searchsorted(nodes, r, side="right") - 1, 0, len(nodes) - 2)
        return _hermite(nodes[i], nodes[i + 1], self._ys[i], self._ys[i + 1],
                        self._fs[i], self._fs[i + 1], r)

    def _build_dense(self):
        nodes, ys, fs = [], [], []
        for s in self.samples:
            st = s.state
            nodes.append(st.r)
            ys.append((st.rho, st.drho, st.R, st.F))
            fs.append((st.drho, s.ddrho, s.ddrho, st.rho))
        self._nodes = np.array(nodes)
        self._ys = np.array(ys)
        self._fs = np.array(fs)

    def rho_integral(self):
        """Cumulative ``int_{r_first}^{r_i} rho`` at every sample.

        Composite Simpson on each step, with the midpoint taken from the
        dense output.
        """
        if self._nodes is None:
            self._build_dense()
        nodes = self._nodes
        mids = 0.5 * (nodes[:-1] + nodes[1:])
        rho_mid = self.dense(mids)[..., 0]
        rho = self._ys[:, 0]
        pieces = np.diff(nodes) / 6.0 * (rho[:-1] + 4.0 * rho_mid + rho[1:])
        return np.concatenate([[0.0], np.cumsum(pieces)])


def _hermite(r0, r1, y0, y1, f0, f1, r):
    h = r1 - r0
    t = ((r - r0) / h)[..., None] if np.ndim(r) else (r - r0) / h
    h_ = h[..., None] if np.ndim(h) else h
    t2, t3 = t * t, t * t * t
    h00 = 2 * t3 - 3 * t2 + 1
    h10 = t3 - 2 * t2 + t
    h01 = -2 * t3 + 3 * t2
    h11 = t3 - t2
    return h00 * y0 + h10 * h_ * f0 + h01 * y1 + h11 * h_ * f1


# --------------------------------------------------------------------------
# vector field
# --------------------------------------------------------------------------

def _ddrho(params: SolitonParams, rho: float, d: float, R: float) -> float:
    """``rho''`` with the ``rho' + lam`` combinations taken from ``R``."""
    if params.n == 2:
        return -0.5 * rho * R
    if not rho > 0:
        raise SingularityError(f"3D soliton equation is singular at rho={rho}")
    return odes.cancellation_free(params.rbar, -rho * rho * R, -2.0 * d * d) / (4.0 * rho)


def _stiffness(params: SolitonParams, rho: float, d: float) -> float:
    """``|d rho''/d rho'|`` along the line ``R = rho' + lam``."""
    if params.n == 2:
        return 0.5 * abs(rho)
    return abs(rho * rho + 4.0 * d) / (4.0 * abs(rho))


def vector_field(params: SolitonParams):
    """Right-hand side on the state ``(rho, rho', R, F)``."""

    def f(r, y):
        rho, d, R = y[0], y[1], y[2]
        dd = _ddrho(params, rho, d, R)
        return np.array([d, dd, dd, rho])

    return f


def dp5_step(f, r, y, fy, h):
    """One Dormand-Prince step. Returns ``(y5, error_vector, f(r+h, y5))``."""
    k = [fy]
    for i in range(1, 7):
        yi = y + h * sum(a * kk for a, kk in zip(_A[i], k))
        k.append(f(r + _C[i] * h, yi))
    y_new = y + h * sum(b * kk for b, kk in zip(_B5, k) if b)
    err = h * sum(e * kk for e, kk in zip(_E, k))
    return y_new, err, k[6]


def fixed_step_solve(f, r0, y0, r1, n_steps):
    """Fixed-step DP5 propagation (used for order probes)."""
    h = (r1 - r0) / n_steps
    y = np.asarray(y0, dtype=float)
    fy = f(r0, y)
    r = r0
    for _ in range(n_steps):
        y, _, fy = dp5_step(f, r, y, fy, h)
        r += h
    return y


# --------------------------------------------------------------------------
# starting data
# --------------------------------------------------------------------------

def series_coefficient(n: int, lam: float, branch: int = 1) -> float:
    """``a3`` in ``rho = s (r + a3 r^3) + O(r^5)`` at a smooth pole."""
    s = branch
    if n == 2:
        return -(s + lam) / 12.0
    if n == 3:
        return -(s + lam) / 36.0
    raise DomainError(f"unsupported dimension {n}")


def series_start_pole(params: SolitonParams, config: IntegratorConfig = IntegratorConfig()
                      ) -> WarpState:
    """Odd power series from the pole ``r = 0`` to ``r = pole_offset``.

    Smooth closure needs ``rho(0) = 0``, ``rho'(0) = s = +-1`` and vanishing
    even derivatives. Matching the ``r`` (2D) or ``r^2`` (3D) coefficient of
    the ODE gives ``a3``. The potential is gauged to ``F(0) = 0``.
    """
    if params.case is not StartCase.POLE:
        raise DomainError("series start requires a pole-start parameter set")
    n, lam, s = params.n, params.lam, params.branch
    if n == 3 and params.rbar != 2.0 * s * s:
        raise PoleObstructionError(
            f"a smooth 3D pole needs rbar = 2 rho'(0)^2 = 2, got {params.rbar}")
    h = config.pole_offset
    a3 = series_coefficient(n, lam, s)
    rho = s * (h + a3 * h**3)
    drho = s * (1.0 + 3.0 * a3 * h * h)
    F = s * (0.5 * h * h + 0.25 * a3 * h**4)
    # R = (s + lam)(1 - c h^2) with c = s/4 (2D) or 1/12 (3D); factored so
    # that R keeps relative accuracy when lam is close to -s
    c = 0.25 * s if n == 2 else 1.0 / 12.0
    R = (s + lam) * (1.0 - c * h * h)
    return WarpState(r=h, rho=rho, drho=drho, F=F, R=R)


def full_line_seed(params: SolitonParams, rho0: float, drho0: float, r0: float = 0.0) -> Seed:
    """Starting state on the full line.

    In 2D with ``lam < 0`` a complete solution needs ``0 < rho' < -lam``
    everywhere, so a seed outside that interval carries a breakdown warning.
    In the steady 3D flat-fiber case the first integral is attached.
    """
    if not rho0 > 0:
        raise DomainError(f"rho0 must be positive, got {rho0}")
    lam = params.lam
    warning = False
    if params.n == 2 and lam < 0:
        warning = not (0.0 < drho0 < -lam)
    C = None
    if params.n == 3 and lam == 0 and params.rbar == 0:
        C = odes.steady_first_integral(rho0, drho0)
    state = WarpState(r=r0, rho=rho0, drho=drho0, F=0.0, R=drho0 + lam)
    return Seed(state=state, breakdown_warning=warning, C_steady=C)


# --------------------------------------------------------------------------
# integration
# --------------------------------------------------------------------------

def _make_sample(params: SolitonParams, r: float, y, ddrho: float) -> Sample:
    rho, drho, R, F = float(y[0]), float(y[1]), float(y[2]), float(y[3])
    lam = params.lam
    state = WarpState(r=r, rho=rho, drho=drho, F=F, R=R)
    C = None
    if params.n == 2:
        # the metric depends on rho^2 only; fold branch B onto rho > 0
        sgn = 1.0 if rho >= 0 else -1.0
        arho = abs(rho)
        if arho > 0:
            k = gaussian_curvature_2d(arho, sgn * ddrho)
            curv = CurvatureSample(r=r, scalar_R=scalar_curvature_warped(
                2, 0.0, arho, sgn * drho, sgn * ddrho), k_gauss=k)
        else:
            curv = CurvatureSample(r=r, scalar_R=R, k_gauss=0.5 * R)
    else:
        curv = curvature_sample_3d(params.rbar, rho, drho, ddrho, r=r)
        if lam == 0 and params.rbar == 0:
            C = odes.steady_first_integral(rho, drho)
    res = odes.residual(state, ddrho, params)
    return Sample(state=state, ddrho=ddrho, curvature=curv, C_steady=C, residual=res)


def _bisect(g, a, b, tol):
    """Root of ``g`` on ``[a, b]`` given a sign change, to within ``tol``."""
    ga = g(a)
    for _ in range(200):
        if abs(b - a) <= tol:
            break
        m = 0.5 * (a + b)
        gm = g(m)
        if gm == 0:
            return m
        if (gm > 0) == (ga > 0):
            a, ga = m, gm
        else:
            b = m
    return 0.5 * (a + b)


def integrate(params: SolitonParams, start: WarpState,
              config: IntegratorConfig = IntegratorConfig(),
              direction: str = "forward") -> Trajectory:
    """Integrate from ``start`` until a terminal event.

    Terminal events: ``RhoZero`` (``s rho`` below ``rho_floor``, with ``s``
    the pole branch sign), ``SlopeBlowup`` (``|rho'| > slope_cap``) and
    ``HorizonReached`` (``r_max`` forward, ``r_min`` backward). Sign changes
    of ``rho'`` and ``R`` are recorded and integration continues.

    Raises :class:`StiffnessError` when the step size drops below ``h_min``.
    """
    if direction not in ("forward", "backward"):
        raise DomainError("direction must be 'forward' or 'backward'")
    sgn_dir = 1.0 if direction == "forward" else -1.0
    r_end = config.r_max if direction == "forward" else config.r_min
    if (r_end - start.r) * sgn_dir <= 0:
        raise DomainError(f"start r={start.r} lies beyond the horizon {r_end}")
    s = params.branch if params.case is StartCase.POLE else 1
    if not s * start.rho > 0:
        raise DomainError("starting warp factor has the wrong sign or vanishes")
    if params.n == 3 and not start.rho > 0:
        raise SingularityError("3D integration needs rho > 0")

    lam = params.lam
    f = vector_field(params)
    R0 = start.R if start.R is not None else start.drho + lam
    y = np.array([start.rho, start.drho, R0, start.F], dtype=float)
    r = float(start.r)
    fy = f(r, y)
    samples = [_make_sample(params, r, y, fy[1])]
    events: List[Event] = []
    h = config.h_init
    rtol, atol = config.rel_tol, config.abs_tol
    crossing_noise = atol

    def hermite_at(r0, r1, y0, y1, f0, f1):
        return lambda rr: _hermite(r0, r1, y0, y1, f0, f1, rr)

    for _ in range(config.max_steps):
        remaining = (r_end - r) * sgn_dir
        stiff = _stiffness(params, y[0], y[1])
        h = min(h, config.h_max, remaining)
        if stiff > 0:
            h = min(h, _STABILITY_BOUND / stiff)
        if h < remaining < 2.0 * h:
            # split the approach evenly instead of leaving a sliver step
            h = 0.5 * remaining
        if h < config.h_min and remaining > config.h_min:
            raise StiffnessError(
                f"step size {h:.3e} fell below h_min at r={r}",
                last_state=samples[-1].state,
                trajectory=_finish(params, samples, events, direction, config))
        landing = h >= remaining
        try:
            with np.errstate(over="raise", invalid="raise"):
                y_new, err, f_new = dp5_step(f, r, y, fy, sgn_dir * h)
            ok = np.all(np.isfinite(y_new)) and np.all(np.isfinite(f_new))
        except (SingularityError, FloatingPointError):
            ok = False
        if ok:
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            en = float(np.max(np.abs(err) / scale))
        else:
            en = math.inf
        if en > 1.0:
            fac = 0.2 if not math.isfinite(en) else max(0.2, 0.9 * en ** -0.2)
            h *= fac
            continue

        r_new = r_end if landing else r + sgn_dir * h
        interp = hermite_at(r, r_new, y, y_new, fy, f_new)

        # terminal conditions inside the step
        term = None
        if s * y_new[0] < config.rho_floor:
            t = _bisect(lambda rr: s * interp(rr)[0] - config.rho_floor, r, r_new,
                        rtol * max(1.0, abs(r)))
            term = (EventKind.RHO_ZERO, t)
        if abs(y_new[1]) > config.slope_cap:
            t = _bisect(lambda rr: abs(interp(rr)[1]) - config.slope_cap, r, r_new,
                        rtol * max(1.0, abs(r)))
            if term is None or (t - term[1]) * sgn_dir < 0:
                term = (EventKind.SLOPE_BLOWUP, t)
        r_stop = term[1] if term else r_new

        # informational sign changes
        for kind, comp in ((EventKind.DRHO_ZERO_CROSS, 1),
                           (EventKind.SCALAR_ZERO_CROSS, 2)):
            a, b = y[comp], y_new[comp]
            if a * b < 0 and max(abs(a), abs(b)) > crossing_noise:
                t = _bisect(lambda rr: interp(rr)[comp], r, r_new,
                            rtol * max(1.0, abs(r)))
                if (r_stop - t) * sgn_dir >= 0:
                    yt = interp(t)
                    events.append(Event(kind, t, _state(yt, t, lam)))

        if term is not None:
            kind, t = term
            yt = interp(t)
            try:
                dd = _ddrho(params, yt[0], yt[1], yt[2])
            except SingularityError:
                dd = math.nan
            samples.append(_make_sample(params, t, yt, dd))
            events.append(Event(kind, t, _state(yt, t, lam)))
            return _finish(params, samples, events, direction, config)

        r, y, fy = r_new, y_new, f_new
        samples.append(_make_sample(params, r, y, fy[1]))
        if landing:
            events.append(Event(EventKind.HORIZON_REACHED, r, samples[-1].state))
            return _finish(params, samples, events, direction, config)
        fac = 5.0 if en == 0 else min(5.0, 0.9 * en ** -0.2)
        h *= fac

    raise StiffnessError("maximum number of steps exceeded",
                         last_state=samples[-1].state,
                         trajectory=_finish(params, samples, events, direction, config))


def _state(y, r, lam):
    return WarpState(r=float(r), rho=float(y[0]), drho=float(y[1]),
                     F=float(y[3]), R=float(y[2]))


def _finish(params, samples, events, direction, config):
    if direction == "backward":
        samples = samples[::-1]
        seed_index = len(samples) - 1
    else:
        seed_index = 0
    return Trajectory(params=params, samples=samples, events=events,
                      direction=direction, config=config, seed_index=seed_index)


def integrate_pole(params: SolitonParams, config: IntegratorConfig = IntegratorConfig()
                   ) -> Trajectory:
    return integrate(params, series_start_pole(params, config), config, "forward")


def join(backward: Trajectory, forward: Trajectory) -> Trajectory:
    """Glue the two halves of a full-line integration at their common seed."""
    if backward.direction != "backward" or forward.direction != "forward":
        raise DomainError("join expects a backward and a forward trajectory")
    samples = backward.samples[:-1] + forward.samples
    events = sorted(backward.events + forward.events, key=lambda ev: ev.r)
    return Trajectory(params=forward.params, samples=samples, events=events,
                      direction="both", config=forward.config,
                      seed_index=len(backward.samples) - 1)


def integrate_full_line(params: SolitonParams, seed: Seed,
                        config: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Integrate both ways from a full-line seed and join the halves."""
    back = integrate(params, seed.state, config, "backward")
    fwd = integrate(params, seed.state, config, "forward")
    return join(back, fwd)


def separatrix_trajectory_2d(lam: float, rho0: float = 1.0,
                             config: IntegratorConfig = IntegratorConfig(),
                             rho_start: Optional[float] = None) -> Trajectory:
    """Complete 2D expanding full-line solution through ``rho(0) = rho0``.

    The solution leaves the saddle ``(rho, rho') = (0, 0)`` along its
    unstable manifold as ``r -> -inf``. Backward integration from ``r = 0``
    is unstable along that manifold (errors grow like ``exp(mu |r|)``,
    ``mu = sqrt(-lam/2)``), so the trajectory is built forwards from a tiny
    ``rho_start`` on the manifold and shifted so that ``rho = rho0`` at
    ``r = 0``. The backward end reaches past ``config.r_min``.
    """
    if not lam < 0:
        raise DomainError("the full-line separatrix exists only for lam < 0")
    if not rho0 > 0:
        raise DomainError("rho0 must be positive")
    params = SolitonParams(2, lam, case=StartCase.LINE)
    mu = math.sqrt(-0.5 * lam)
    if rho_start is None:
        rho_start = min(1e-20, rho0 * math.exp(-mu * (abs(config.r_min) + 10.0)))
    if not 0 < rho_start < rho0:
        raise DomainError("rho_start must lie in (0, rho0)")
    cfg = replace(config, rho_floor=min(config.rho_floor, 1e-3 * rho_start))
    d_start = odes.separatrix_slope_2d(rho_start, lam)

    # locate the crossing rho = rho0 on a provisional run starting at r = 0
    r_guess = math.log(rho0 / rho_start) / mu + 20.0 / mu + 10.0
    probe = integrate(params, WarpState(0.0, rho_start, d_start, 0.0, d_start + lam),
                      replace(cfg, r_max=r_guess), "forward")
    rho = probe.rho
    above = np.nonzero(rho >= rho0)[0]
    if above.size == 0:
        raise DomainError(f"separatrix never reaches rho0={rho0}")
    j = int(above[0])
    if j == 0:
        raise DomainError("rho_start is not below rho0")
    a, b = probe.r[j - 1], probe.r[j]
    from scipy.optimize import brentq
    r_star = brentq(lambda rr: float(probe.dense(rr)[0]) - rho0, a, b,
                    xtol=1e-14, rtol=4 * np.finfo(float).eps)

    start = WarpState(-r_star, rho_start, d_start, 0.0, d_start + lam)
    fwd = integrate(params, start, replace(cfg, r_min=min(cfg.r_min, -r_star - 1.0)),
                    "forward")
    seed_index = int(np.argmin(np.abs(fwd.r)))
    return Trajectory(params=params, samples=fwd.samples, events=fwd.events,
                      direction="both", config=config, seed_index=seed_index)


def tail_fit(trajectory: Trajectory, end: str = "forward"):
    """Least-squares constant fit of ``rho'`` over a tail window.

    Returns ``(value, rms residual)`` using the trailing ``tail_window``
    fraction of samples on the forward end, or the leading fraction on the
    backward end of a full-line trajectory.
    """
    frac = trajectory.config.tail_window
    d = trajectory.drho
    if end == "forward":
        part = d[trajectory.seed_index:]
        m = max(2, int(math.ceil(frac * len(part))))
        window = part[-m:]
    else:
        part = d[:trajectory.seed_index + 1]
        m = max(2, int(math.ceil(frac * len(part))))
        window = part[:m]
    value = float(np.mean(window))
    resid = float(np.sqrt(np.mean((window - value) ** 2)))
    return value, resid
