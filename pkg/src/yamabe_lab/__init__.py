"""Numerical laboratory for gradient Yamabe solitons on warped products."""

from .errors import (DomainError, InsufficientDataError, PoleObstructionError,
                     SingularityError, StencilRangeError, StiffnessError, YamabeLabError)
from .geometry import (CurvatureSample, FiberKind, FiberModel, curvature_sample_3d,
                       fd_scalar_curvature_oracle, gaussian_curvature_2d,
                       scalar_curvature_warped)
from .odes import (SolitonParams, StartCase, WarpState, cigar_closed_form,
                   constant_expanding_solution, first_integral_2d, predicted_scalar_2d,
                   residual, rhs, rhs_2d, rhs_3d, scalar_from_state, separatrix_slope_2d,
                   steady_equilibrium, steady_first_integral, steady_reduced_rhs,
                   third_derivative)
from .integrate import (Event, EventKind, IntegratorConfig, Seed, Trajectory,
                        full_line_seed, integrate, integrate_full_line, integrate_pole,
                        separatrix_trajectory_2d, series_start_pole, tail_fit)
from .classify import (ClassificationReport, Completeness, Monotonicity, ScalarSign,
                       TheoremMatch, classify, predicted_regime, sweep)

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "InsufficientDataError",
    "PoleObstructionError",
    "SingularityError",
    "StencilRangeError",
    "StiffnessError",
    "YamabeLabError",
    "CurvatureSample",
    "FiberKind",
    "FiberModel",
    "curvature_sample_3d",
    "fd_scalar_curvature_oracle",
    "gaussian_curvature_2d",
    "scalar_curvature_warped",
    "SolitonParams",
    "StartCase",
    "WarpState",
    "cigar_closed_form",
    "constant_expanding_solution",
    "first_integral_2d",
    "predicted_scalar_2d",
    "residual",
    "rhs",
    "rhs_2d",
    "rhs_3d",
    "scalar_from_state",
    "separatrix_slope_2d",
    "steady_equilibrium",
    "steady_first_integral",
    "steady_reduced_rhs",
    "third_derivative",
    "Event",
    "EventKind",
    "IntegratorConfig",
    "Seed",
    "Trajectory",
    "full_line_seed",
    "integrate",
    "integrate_full_line",
    "integrate_pole",
    "separatrix_trajectory_2d",
    "series_start_pole",
    "tail_fit",
    "ClassificationReport",
    "Completeness",
    "Monotonicity",
    "ScalarSign",
    "TheoremMatch",
    "classify",
    "predicted_regime",
    "sweep",
]
