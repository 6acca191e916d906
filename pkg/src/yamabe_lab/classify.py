"""Regime verdicts for integrated trajectories.

The monitored curvature is the Gaussian curvature ``K`` in dimension 2 and
the scalar curvature ``R`` in dimension 3. :func:`predicted_regime` encodes
what the classification theorems say about complete solutions;
:func:`classify` measures a trajectory and compares the two.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import odes
from .errors import DomainError, InsufficientDataError
from .integrate import (EventKind, IntegratorConfig, Trajectory, full_line_seed,
                        integrate_full_line, integrate_pole, tail_fit)
from .odes import SolitonParams, StartCase, WarpState

_TINY = float(np.finfo(float).tiny)

CLOSED_BOUND_TOL = 1e-6
OPEN_BOUND_TOL = 1e-9
ASYMPTOTE_TOL = 1e-3
ASYMPTOTE_RESIDUAL = 1e-4
BACKWARD_LIMIT_R = -50.0
SEPARATRIX_TOL = 1e-6
# a RhoZero event with |rho'| this small is a decaying end, not a collapse
DECAY_SLOPE = 1e-3


class ScalarSign(enum.Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"
    ZERO = "Zero"
    MIXED = "Mixed"


class Monotonicity(enum.Enum):
    STRICTLY_INCREASING = "StrictlyIncreasing"
    STRICTLY_DECREASING = "StrictlyDecreasing"
    CONSTANT = "Constant"
    NON_MONOTONE = "NonMonotone"


class Completeness(enum.Enum):
    COMPLETE = "CompleteWithinHorizon"
    RHO_ZERO = "BreakdownRhoZero"
    BLOWUP = "BreakdownBlowup"

    @property
    def breakdown(self) -> bool:
        return self is not Completeness.COMPLETE


class TheoremMatch(enum.Enum):
    MATCH = "Match"
    MISMATCH = "Mismatch"
    NOT_APPLICABLE = "NotApplicable"


class Outcome(enum.Enum):
    COMPLETE = "complete"
    FLAT = "flat"
    BREAKDOWN = "breakdown"
    # complete solutions obey the prediction, incomplete ones are unconstrained
    EITHER = "either"
    UNCLASSIFIED = "unclassified"


@dataclass(frozen=True)
class Bounds:
    lo: float
    hi: float
    lo_closed: bool
    hi_closed: bool

    def as_tuple(self) -> Tuple[float, float]:
        return (self.lo, self.hi)

    def violations(self, values: np.ndarray) -> np.ndarray:
        lo_tol = CLOSED_BOUND_TOL if self.lo_closed else OPEN_BOUND_TOL
        hi_tol = CLOSED_BOUND_TOL if self.hi_closed else OPEN_BOUND_TOL
        return (values < self.lo - lo_tol) | (values > self.hi + hi_tol)


@dataclass(frozen=True)
class Expectation:
    outcome: Outcome
    scalar_sign: Optional[ScalarSign] = None
    monotonicity: Optional[Monotonicity] = None
    k_bounds: Optional[Bounds] = None
    asymptote_drho: Optional[float] = None
    asymptote_drho_backward: Optional[float] = None
    backward_k_limit: Optional[float] = None
    note: str = ""


@dataclass
class ClassificationReport:
    params: SolitonParams
    scalar_sign: ScalarSign
    k_monotonicity: Monotonicity
    k_range: Tuple[float, float]
    predicted_k_bounds: Optional[Tuple[float, float]]
    asymptote_drho: Optional[Tuple[float, float]]
    completeness: Completeness
    theorem_match: TheoremMatch
    explanation: str
    asymptote_drho_backward: Optional[Tuple[float, float]] = None
    scalar_zero_crossings: List[float] = field(default_factory=list)
    terminal_r: Optional[float] = None
    monitored: str = "K"
    n_samples: int = 0

    def to_dict(self) -> dict:
        p = self.params
        return {
            "params": {
                "n": p.n, "lambda": p.lam, "fiber": p.fiber.kind.value,
                "rbar": p.rbar, "case": p.case.value,
                "branch": "A" if p.branch == 1 else "B",
            },
            "scalar_sign": self.scalar_sign.value,
            "k_monotonicity": self.k_monotonicity.value,
            "k_range": list(self.k_range),
            "predicted_k_bounds": None if self.predicted_k_bounds is None
            else list(self.predicted_k_bounds),
            "asymptote_drho": None if self.asymptote_drho is None
            else list(self.asymptote_drho),
            "completeness": self.completeness.value,
            "theorem_match": self.theorem_match.value,
            "explanation": self.explanation,
            "asymptote_drho_backward": None if self.asymptote_drho_backward is None
            else list(self.asymptote_drho_backward),
            "scalar_zero_crossings": list(self.scalar_zero_crossings),
            "terminal_r": self.terminal_r,
            "monitored": self.monitored,
            "n_samples": self.n_samples,
        }


# --------------------------------------------------------------------------
# expectations
# --------------------------------------------------------------------------

def _on_separatrix(seed: WarpState, lam: float) -> bool:
    R = seed.drho + lam
    if not (seed.rho > 0 and R < 0 and seed.drho > 0):
        return False
    target = -lam * math.log(-lam)
    H = odes.first_integral_2d(seed.rho, seed.drho, lam)
    return abs(H - target) <= SEPARATRIX_TOL * max(1.0, abs(target))


def predicted_regime(params: SolitonParams, seed: Optional[WarpState] = None) -> Expectation:
    """What the classification theorems predict for ``params``.

    Full-line predictions depend on the starting data. Without ``seed`` the
    2D expanding full-line entry describes the complete solution. With a
    seed it is the complete solution only when the seed lies on the
    separatrix (the level ``-lam log(-lam)`` of the first integral);
    every other seed breaks down.
    """
    n, lam = params.n, params.lam
    if n == 2:
        return _predict_2d(params, seed)
    if params.case is StartCase.POLE:
        return Expectation(Outcome.UNCLASSIFIED,
                           note="a 3D pole over the round sphere is allowed in every regime")
    rbar = params.rbar
    if rbar > 0:
        return Expectation(Outcome.UNCLASSIFIED,
                           note="full-line solutions over a positively curved fiber are not pinned down")
    if lam >= 0:
        if lam == 0 and rbar == 0 and seed is not None and seed.drho == 0:
            return Expectation(Outcome.FLAT, ScalarSign.ZERO, Monotonicity.CONSTANT,
                               note="flat product with constant warp factor")
        return Expectation(Outcome.BREAKDOWN,
                           note="no complete solution over a fiber with rbar <= 0 when lam >= 0")
    if seed is not None and rbar < 0 and seed.drho == 0 and \
            seed.rho == odes.constant_expanding_solution(lam, rbar):
        return Expectation(Outcome.COMPLETE, ScalarSign.NEGATIVE, Monotonicity.CONSTANT,
                           Bounds(lam, lam, True, True),
                           note="constant expanding solution with R = lam")
    return Expectation(Outcome.EITHER, ScalarSign.NEGATIVE,
                       note="complete expanding solutions over a flat or hyperbolic fiber "
                            "have R < 0")


def _predict_2d(params: SolitonParams, seed: Optional[WarpState]) -> Expectation:
    lam = params.lam
    if params.case is StartCase.POLE:
        if params.branch == -1:
            return Expectation(Outcome.BREAKDOWN, note="branch B never closes up completely")
        if lam > 0:
            return Expectation(Outcome.BREAKDOWN, note="no complete 2D shrinking soliton")
        top = 0.5 * (1.0 + lam)
        if lam == 0:
            return Expectation(Outcome.COMPLETE, ScalarSign.POSITIVE,
                               Monotonicity.STRICTLY_DECREASING,
                               Bounds(0.0, 0.5, False, True), asymptote_drho=0.0,
                               note="cigar soliton")
        if lam == -1:
            return Expectation(Outcome.FLAT, ScalarSign.ZERO, Monotonicity.CONSTANT,
                               Bounds(0.0, 0.0, True, True), note="flat plane")
        if lam > -1:
            return Expectation(Outcome.COMPLETE, ScalarSign.POSITIVE,
                               Monotonicity.STRICTLY_DECREASING,
                               Bounds(0.0, top, False, True), asymptote_drho=-lam,
                               note="expanding pole solution with lam > -1")
        return Expectation(Outcome.COMPLETE, ScalarSign.NEGATIVE,
                           Monotonicity.STRICTLY_INCREASING,
                           Bounds(top, 0.0, True, False), asymptote_drho=-lam,
                           note="expanding pole solution with lam < -1")

    if seed is not None and seed.drho + lam == 0:
        if lam == 0:
            return Expectation(Outcome.FLAT, ScalarSign.ZERO, Monotonicity.CONSTANT,
                               Bounds(0.0, 0.0, True, True), note="flat cylinder")
        return Expectation(Outcome.BREAKDOWN, note="flat cone reaches rho = 0")
    if lam >= 0:
        return Expectation(Outcome.BREAKDOWN,
                           note="no complete nonflat 2D full-line soliton with lam >= 0")
    complete = Expectation(Outcome.COMPLETE, ScalarSign.NEGATIVE,
                           Monotonicity.STRICTLY_INCREASING,
                           Bounds(0.5 * lam, 0.0, False, False),
                           asymptote_drho=-lam, asymptote_drho_backward=0.0,
                           backward_k_limit=0.5 * lam,
                           note="complete expanding full-line solution")
    if seed is None or _on_separatrix(seed, lam):
        return complete
    return Expectation(Outcome.BREAKDOWN,
                       note="seed is off the separatrix of the first integral")


# --------------------------------------------------------------------------
# measurements
# --------------------------------------------------------------------------

def scalar_sign(values: np.ndarray, crossings: int = 0, noise: float = 0.0) -> ScalarSign:
    """Sign of a sampled scalar curvature.

    Samples within ``noise`` of zero count only when nothing larger exists.
    """
    if crossings:
        return ScalarSign.MIXED
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    big = v[np.abs(v) > noise]
    if big.size == 0:
        big = v[v != 0]
        if big.size == 0:
            return ScalarSign.ZERO
    pos, neg = bool(np.any(big > 0)), bool(np.any(big < 0))
    if pos and neg:
        return ScalarSign.MIXED
    return ScalarSign.POSITIVE if pos else ScalarSign.NEGATIVE


def monotonicity(values: np.ndarray, rel_tol: float) -> Monotonicity:
    """Monotonicity of successive samples with a relative band ``10 rel_tol``.

    A pair whose difference is inside the band is unresolved; so is a pair
    of values below the smallest normal float. All pairs unresolved gives
    ``Constant``. Unresolved pairs are tolerated only in runs touching
    either end of the sequence, where a curvature saturates at its limit.
    """
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if v.size < 2:
        return Monotonicity.CONSTANT
    a, b = v[:-1], v[1:]
    d = b - a
    mag = np.maximum(np.abs(a), np.abs(b))
    resolved = (np.abs(d) > 10.0 * rel_tol * mag) & (mag >= _TINY)
    if not np.any(resolved):
        return Monotonicity.CONSTANT
    idx = np.nonzero(resolved)[0]
    if not np.all(resolved[idx[0]: idx[-1] + 1]):
        return Monotonicity.NON_MONOTONE
    signs = np.sign(d[resolved])
    if np.all(signs > 0):
        return Monotonicity.STRICTLY_INCREASING
    if np.all(signs < 0):
        return Monotonicity.STRICTLY_DECREASING
    return Monotonicity.NON_MONOTONE


def monitored_curvature(traj: Trajectory) -> np.ndarray:
    if traj.params.n == 2:
        return traj.K
    return traj.R


def completeness(traj: Trajectory) -> Completeness:
    for ev in traj.events:
        if ev.kind is EventKind.SLOPE_BLOWUP:
            return Completeness.BLOWUP
        if ev.kind is EventKind.RHO_ZERO and abs(ev.state.drho) > DECAY_SLOPE:
            return Completeness.RHO_ZERO
    return Completeness.COMPLETE


def _has_backward_end(traj: Trajectory) -> bool:
    return traj.direction == "both"


def classify(traj: Trajectory) -> ClassificationReport:
    """Measure ``traj`` and compare with :func:`predicted_regime`."""
    if len(traj) < 10:
        raise InsufficientDataError(f"need at least 10 samples, got {len(traj)}")
    params = traj.params
    cfg = traj.config
    kvals = monitored_curvature(traj)
    finite = kvals[np.isfinite(kvals)]
    if finite.size == 0:
        raise InsufficientDataError("no finite curvature samples")
    crossings = traj.events_of(EventKind.SCALAR_ZERO_CROSS)
    sign = scalar_sign(traj.R, len(crossings), cfg.abs_tol)
    mono = monotonicity(kvals, cfg.rel_tol)
    comp = completeness(traj)
    asym = tail_fit(traj, "forward")
    asym_b = tail_fit(traj, "backward") if _has_backward_end(traj) else None
    term = traj.terminal_event

    seed = traj.samples[traj.seed_index].state if params.case is StartCase.LINE else None
    exp = predicted_regime(params, seed)
    match, why = _compare(exp, traj, kvals, sign, mono, comp, asym, asym_b)
    return ClassificationReport(
        params=params,
        scalar_sign=sign,
        k_monotonicity=mono,
        k_range=(float(finite.min()), float(finite.max())),
        predicted_k_bounds=None if exp.k_bounds is None else exp.k_bounds.as_tuple(),
        asymptote_drho=asym,
        completeness=comp,
        theorem_match=match,
        explanation=why,
        asymptote_drho_backward=asym_b,
        scalar_zero_crossings=[ev.r for ev in crossings],
        terminal_r=None if term is None else term.r,
        monitored="K" if params.n == 2 else "R",
        n_samples=len(traj),
    )


def _compare(exp: Expectation, traj, kvals, sign, mono, comp, asym, asym_b):
    if exp.outcome is Outcome.UNCLASSIFIED:
        return TheoremMatch.NOT_APPLICABLE, exp.note
    if exp.outcome is Outcome.BREAKDOWN:
        if comp.breakdown:
            return TheoremMatch.MATCH, f"{exp.note}; observed {comp.value}"
        return TheoremMatch.MISMATCH, f"{exp.note}; but the trajectory stayed complete"
    if exp.outcome is Outcome.EITHER and comp.breakdown:
        return TheoremMatch.MATCH, f"{exp.note}; this trajectory is incomplete ({comp.value})"
    if comp.breakdown:
        return TheoremMatch.MISMATCH, f"{exp.note}; but observed {comp.value}"

    problems = []
    if exp.scalar_sign is not None and sign is not exp.scalar_sign:
        problems.append(f"scalar sign {sign.value}, expected {exp.scalar_sign.value}")
    if exp.monotonicity is not None and mono is not exp.monotonicity:
        problems.append(f"monotonicity {mono.value}, expected {exp.monotonicity.value}")
    if exp.k_bounds is not None:
        bad = exp.k_bounds.violations(kvals[np.isfinite(kvals)])
        if np.any(bad):
            problems.append(f"{int(bad.sum())} samples outside {exp.k_bounds.as_tuple()}")
    if exp.asymptote_drho is not None:
        v, res = asym
        if abs(v - exp.asymptote_drho) > ASYMPTOTE_TOL or res >= ASYMPTOTE_RESIDUAL:
            problems.append(f"forward rho' tail {v:.6g} (rms {res:.2g}), "
                            f"expected {exp.asymptote_drho:g}")
    if exp.asymptote_drho_backward is not None and asym_b is not None:
        v, res = asym_b
        if abs(v - exp.asymptote_drho_backward) > ASYMPTOTE_TOL or res >= ASYMPTOTE_RESIDUAL:
            problems.append(f"backward rho' tail {v:.6g} (rms {res:.2g}), "
                            f"expected {exp.asymptote_drho_backward:g}")
    if exp.backward_k_limit is not None and traj.r[0] <= BACKWARD_LIMIT_R:
        k_end = 0.5 * float(traj.dense(BACKWARD_LIMIT_R)[2])
        if abs(k_end - exp.backward_k_limit) > ASYMPTOTE_TOL:
            problems.append(f"K({BACKWARD_LIMIT_R:g}) = {k_end:.6g}, "
                            f"expected {exp.backward_k_limit:g}")
    if problems:
        return TheoremMatch.MISMATCH, f"{exp.note}: " + "; ".join(problems)
    return TheoremMatch.MATCH, exp.note


# --------------------------------------------------------------------------
# sweeps
# --------------------------------------------------------------------------

@dataclass
class SweepRow:
    lam: float
    seed: Optional[Tuple[float, float]]
    report: Optional[ClassificationReport] = None
    error: Optional[str] = None


def run_one(template: SolitonParams, lam: float, seed: Optional[Tuple[float, float]],
            config: IntegratorConfig) -> SweepRow:
    try:
        params = replace(template, lam=float(lam))
        if params.case is StartCase.POLE:
            traj = integrate_pole(params, config)
        else:
            rho0, drho0 = seed
            traj = integrate_full_line(params, full_line_seed(params, rho0, drho0), config)
        return SweepRow(lam, seed, report=classify(traj))
    except Exception as exc:  # recorded per row; a sweep never aborts
        return SweepRow(lam, seed, error=f"{type(exc).__name__}: {exc}")


def default_threads() -> int:
    env = os.environ.get("YAMABE_LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, min(8, os.cpu_count() or 1))


def sweep(template: SolitonParams, lambda_grid: Sequence[float],
          seed_grid: Optional[Sequence[Tuple[float, float]]] = None,
          config: IntegratorConfig = IntegratorConfig(),
          threads: Optional[int] = None) -> List[SweepRow]:
    """One classification per (lambda, seed) in input order.

    Pole templates ignore ``seed_grid``. Rows are independent, so the
    result does not depend on ``threads``.
    """
    lambda_grid = list(lambda_grid)
    if not lambda_grid:
        raise DomainError("lambda grid is empty")
    if template.case is StartCase.LINE:
        seeds = list(seed_grid or [])
        if not seeds:
            raise DomainError("a full-line sweep needs a nonempty seed grid")
        jobs = [(lam, tuple(sd)) for lam in lambda_grid for sd in seeds]
    else:
        jobs = [(lam, None) for lam in lambda_grid]
    workers = threads if threads is not None else default_threads()
    if workers <= 1:
        return [run_one(template, lam, sd, config) for lam, sd in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: run_one(template, job[0], job[1], config), jobs))
