import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from yamabe_lab import odes
from yamabe_lab.errors import DomainError, PoleObstructionError, SingularityError
from yamabe_lab.geometry import FiberModel
from yamabe_lab.integrate import IntegratorConfig, integrate_pole
from yamabe_lab.odes import SolitonParams, StartCase, WarpState

_r = sp.symbols("r", real=True)
_CIGAR = 2 * sp.tanh(_r / 2)
_CIGAR_D = [sp.lambdify(_r, sp.diff(_CIGAR, _r, k), "mpmath") for k in range(4)]


def cigar_derivs(r):
    """rho, rho', rho'', rho''' of the cigar from symbolic differentiation."""
    return [float(f(r)) for f in _CIGAR_D]


P2 = SolitonParams(2, 0.0)


class TestParams:
    def test_two_dimensions_need_circle(self):
        with pytest.raises(DomainError):
            SolitonParams(2, 0.0, FiberModel.sphere())

    def test_three_dimensional_pole_needs_sphere(self):
        with pytest.raises(PoleObstructionError):
            SolitonParams(3, 0.0, FiberModel.euclidean(), StartCase.POLE)
        SolitonParams(3, 0.0, FiberModel.euclidean(), StartCase.LINE)

    def test_rejects_bad_values(self):
        with pytest.raises(DomainError):
            SolitonParams(4, 0.0)
        with pytest.raises(DomainError):
            SolitonParams(2, math.inf)
        with pytest.raises(DomainError):
            SolitonParams(2, 0.0, branch=0)
        with pytest.raises(DomainError):
            SolitonParams(3, 0.0, FiberModel.sphere(), branch=-1)

    def test_regime_names(self):
        assert SolitonParams(2, 1.0).regime == "shrinking"
        assert SolitonParams(2, 0.0).regime == "steady"
        assert SolitonParams(2, -1.0).regime == "expanding"


class TestRightHandSides:
    def test_rhs_2d_flat(self):
        assert odes.rhs_2d(WarpState(0, 1.0, 0.0), 0.0) == 0.0

    def test_rhs_2d_cigar(self):
        rho, d, dd, _ = cigar_derivs(1.0)
        val = odes.rhs_2d(WarpState(1.0, rho, d), 0.0)
        assert val == pytest.approx(dd, rel=1e-14)
        assert val == pytest.approx(-math.tanh(0.5) / math.cosh(0.5) ** 2, rel=1e-14)

    def test_rhs_2d_arithmetic(self):
        assert odes.rhs_2d(WarpState(0, 1.0, 0.5), -1.0) == 0.25

    def test_rhs_3d_constant_solution_is_equilibrium(self):
        assert odes.rhs_3d(WarpState(0, math.sqrt(2.0), 0.0), -1.0, -2.0) == 0.0

    def test_rhs_3d_arithmetic(self):
        assert odes.rhs_3d(WarpState(0, 1.0, 0.0), 0.0, 2.0) == 0.5
        assert odes.rhs_3d(WarpState(0, 1.0, 1.0), 0.0, 2.0) == -0.25

    @pytest.mark.parametrize("rho", [0.0, -0.5])
    def test_rhs_3d_singular(self, rho):
        with pytest.raises(SingularityError):
            odes.rhs_3d(WarpState(0, rho, 1.0), 0.0, 2.0)

    def test_dispatch(self):
        s = WarpState(0, 1.0, 0.2)
        assert odes.rhs(s, P2) == odes.rhs_2d(s, 0.0)
        p3 = SolitonParams(3, 0.5, FiberModel.hyperbolic(), StartCase.LINE)
        assert odes.rhs(s, p3) == odes.rhs_3d(s, 0.5, -2.0)

    def test_cancellation_free(self):
        assert odes.cancellation_free(2.0, -2.0000000000000004) == 0.0
        assert odes.cancellation_free(1.0, -0.5) == 0.5
        assert odes.cancellation_free(1e-3, 0.0) == 1e-3


class TestScalarAndThirdDerivative:
    def test_scalar_examples(self):
        assert odes.scalar_from_state(WarpState(0, 1.0, 0.0), -1.0) == -1.0
        assert odes.scalar_from_state(WarpState(0, 1.0, 1.0), 0.0) == 1.0
        sech2 = 1 / math.cosh(1.0) ** 2
        assert odes.scalar_from_state(WarpState(2.0, 0.0, sech2), 0.0) == \
            pytest.approx(0.419974, abs=5e-7)

    def test_scalar_is_minus_twice_ddrho_over_rho_on_cigar(self):
        rho, d, dd, _ = cigar_derivs(2.0)
        assert odes.scalar_from_state(WarpState(2.0, rho, d), 0.0) == \
            pytest.approx(-2 * dd / rho, rel=1e-14)

    def test_third_derivative_flat(self):
        assert odes.third_derivative(WarpState(0, 1.0, 0.0), 0.0, P2) == 0.0

    def test_third_derivative_cigar(self):
        rho, d, dd, ddd = cigar_derivs(1.0)
        assert abs(odes.third_derivative(WarpState(1.0, rho, d), dd, P2) - ddd) <= 1e-12

    def test_third_derivative_constant_3d(self):
        p = SolitonParams(3, -1.0, FiberModel.hyperbolic(), StartCase.LINE)
        assert odes.third_derivative(WarpState(0, math.sqrt(2.0), 0.0), 0.0, p) == 0.0

    def test_third_derivative_singular(self):
        p = SolitonParams(3, 0.0, FiberModel.euclidean(), StartCase.LINE)
        with pytest.raises(SingularityError):
            odes.third_derivative(WarpState(0, 0.0, 1.0), 0.0, p)

    @given(st.floats(0.2, 5), st.floats(-2, 2), st.floats(-2, 2), st.floats(-3, 3))
    def test_third_derivative_is_derivative_of_rhs_3d(self, rho, d, lam, rbar):
        p = SolitonParams(3, lam, FiberModel.surface(rbar), StartCase.LINE)
        s = WarpState(0, rho, d)
        dd = odes.rhs(s, p)
        eps = 1e-6

        def f(t):
            return odes.rhs(WarpState(0, rho + t * d + 0.5 * t * t * dd, d + t * dd), p)

        fd = (f(eps) - f(-eps)) / (2 * eps)
        assert odes.third_derivative(s, dd, p) == pytest.approx(fd, rel=1e-5, abs=1e-5)


class TestResidual:
    @given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-5, 5))
    def test_definitional_2d(self, rho, d, lam):
        p = SolitonParams(2, lam)
        s = WarpState(0, rho, d)
        scale = max(1.0, abs(rho * d), abs(lam * rho))
        assert abs(odes.residual(s, odes.rhs(s, p), p)) <= 1e-13 * scale

    @given(st.floats(1e-2, 10), st.floats(-10, 10), st.floats(-5, 5), st.floats(-5, 5))
    def test_definitional_3d(self, rho, d, lam, rbar):
        p = SolitonParams(3, lam, FiberModel.surface(rbar), StartCase.LINE)
        s = WarpState(0, rho, d)
        scale = max(1.0, rho * rho * abs(d), abs(lam) * rho * rho, 2 * d * d, abs(rbar))
        assert abs(odes.residual(s, odes.rhs(s, p), p)) <= 1e-13 * scale

    def test_cigar_samples(self):
        for r in np.linspace(-10, 10, 81):
            rho, d, dd, _ = cigar_derivs(r)
            assert abs(odes.residual(WarpState(r, rho, d), dd, P2)) <= 1e-14

    def test_cigar_equation_over_range(self):
        worst = max(abs(2 * dd + rho * d) for rho, d, dd, _ in
                    (cigar_derivs(r) for r in np.linspace(-10, 10, 201)))
        assert worst <= 1e-12

    def test_constant_solution(self):
        p = SolitonParams(3, -1.0, FiberModel.hyperbolic(), StartCase.LINE)
        assert odes.residual(WarpState(0, math.sqrt(2.0), 0.0), 0.0, p) == \
            pytest.approx(0.0, abs=1e-15)


class TestSteadyFirstIntegral:
    def test_equilibrium_level(self):
        rho = 5.0 ** 0.4
        assert rho == pytest.approx(1.903654, abs=5e-7)
        assert odes.steady_first_integral(rho, 0.0) == pytest.approx(1.0, rel=1e-15)
        assert odes.steady_equilibrium(1.0) == pytest.approx(rho, rel=1e-15)

    def test_examples(self):
        assert odes.steady_first_integral(1.0, 0.0) == pytest.approx(0.2, rel=1e-15)
        assert odes.steady_first_integral(4.0, -3.15) == pytest.approx(-6.2, rel=1e-14)

    def test_reduced_rhs_examples(self):
        assert odes.steady_reduced_rhs(5.0 ** 0.4, 1.0) == pytest.approx(0.0, abs=1e-15)
        assert odes.steady_reduced_rhs(1.0, 0.0) == -0.1
        assert odes.steady_reduced_rhs(2.0, 1.0) == pytest.approx(-0.046447, abs=5e-7)

    @given(st.floats(1e-3, 100), st.floats(-100, 100))
    def test_round_trip(self, rho, C):
        back = odes.steady_first_integral(rho, odes.steady_reduced_rhs(rho, C))
        assert abs(back - C) <= 1e-12 * max(1.0, abs(C), rho ** 2.5)

    @pytest.mark.parametrize("rho", [0.0, -1.0])
    def test_domain(self, rho):
        with pytest.raises(DomainError):
            odes.steady_first_integral(rho, 0.0)
        with pytest.raises(DomainError):
            odes.steady_reduced_rhs(rho, 1.0)

    def test_equilibrium_needs_positive_C(self):
        with pytest.raises(DomainError):
            odes.steady_equilibrium(0.0)


class TestClosedFormSolutions:
    def test_cigar_at_pole(self):
        assert odes.cigar_closed_form(0.0) == (0.0, 1.0, 0.0)

    def test_cigar_value(self):
        rho, _, _ = odes.cigar_closed_form(1.0)
        assert rho == pytest.approx(0.924234, abs=5e-7)
        assert rho == pytest.approx(cigar_derivs(1.0)[0], rel=1e-15)

    def test_cigar_tail(self):
        rho, d, F = odes.cigar_closed_form(2000.0)
        assert rho == 2.0 and d == 0.0
        assert F == pytest.approx(4 * (1000.0 - math.log(2.0)), rel=1e-15)

    def test_cigar_potential(self):
        r = np.linspace(-20, 20, 41)
        _, _, F = odes.cigar_closed_form(r)
        assert np.allclose(F, 4 * np.log(np.cosh(r / 2)), rtol=1e-13, atol=1e-15)

    def test_constant_expanding_examples(self):
        assert odes.constant_expanding_solution(-1.0, -2.0) == math.sqrt(2.0)
        assert odes.constant_expanding_solution(-2.0, -2.0) == 1.0
        assert odes.constant_expanding_solution(-0.5, -3.0) == pytest.approx(2.449490, abs=5e-7)

    @pytest.mark.parametrize("lam, rbar", [(1.0, -2.0), (0.0, -2.0), (-1.0, 0.0), (-1.0, 2.0)])
    def test_constant_expanding_domain(self, lam, rbar):
        with pytest.raises(DomainError):
            odes.constant_expanding_solution(lam, rbar)

    @given(st.floats(-20, -1e-3), st.floats(-20, -1e-3))
    def test_equilibrium_exact(self, lam, rbar):
        rho = odes.constant_expanding_solution(lam, rbar)
        assert odes.rhs_3d(WarpState(0, rho, 0.0), lam, rbar) == 0.0


class TestSignLaw:
    def test_zero_stays_zero(self):
        assert odes.predicted_scalar_2d(0.0, 17.0) == 0.0

    def test_constant_profile(self):
        p, c, dr = 1.7, -0.3, 2.5
        assert odes.predicted_scalar_2d(c, p * dr) == pytest.approx(c * math.exp(-p * dr / 2))

    def test_cigar_trajectory(self):
        traj = integrate_pole(P2, IntegratorConfig(r_max=3.0))
        A = traj.rho_integral()
        r = traj.r
        i0 = int(np.argmin(np.abs(r - 0.1)))
        R0 = 1 / math.cosh(r[i0] / 2) ** 2
        for i in range(i0, len(r)):
            pred = odes.predicted_scalar_2d(R0, A[i] - A[i0])
            assert pred == pytest.approx(1 / math.cosh(r[i] / 2) ** 2, abs=1e-9)


class TestFirstIntegral2D:
    @pytest.mark.parametrize("lam", [-0.5, -2.0, 1.0])
    def test_conserved_along_pole_trajectories(self, lam):
        traj = integrate_pole(SolitonParams(2, lam), IntegratorConfig(r_max=10.0))
        # log|R| amplifies absolute error once R has decayed, so stay where |R| is O(1e-3)
        H = [odes.first_integral_2d(s.state.rho, s.state.drho, lam) for s in traj.samples
             if abs(s.state.R) > 1e-3]
        assert len(H) > 20
        assert np.ptp(H) <= 1e-8

    def test_undefined_cases(self):
        with pytest.raises(DomainError):
            odes.first_integral_2d(1.0, 1.0, -1.0)
        with pytest.raises(DomainError):
            odes.first_integral_2d(1.0, 1.0, 0.0)

    def test_separatrix_level(self):
        for lam in (-0.5, -1.0, -3.0):
            for rho0 in (1e-6, 0.3, 1.0, 4.0):
                d = odes.separatrix_slope_2d(rho0, lam)
                assert 0 < d < -lam
                H = odes.first_integral_2d(rho0, d, lam)
                assert H == pytest.approx(-lam * math.log(-lam), abs=1e-12)

    def test_separatrix_value_at_unit_height(self):
        assert odes.separatrix_slope_2d(1.0, -1.0) == pytest.approx(0.5512179735153754,
                                                                    rel=1e-14)

    def test_separatrix_linear_regime(self):
        # near the saddle rho' ~ sqrt(-lam/2) rho
        for lam in (-1.0, -2.0):
            ratio = odes.separatrix_slope_2d(1e-12, lam) / 1e-12
            assert ratio == pytest.approx(math.sqrt(-lam / 2), rel=1e-9)

    def test_separatrix_domain(self):
        with pytest.raises(DomainError):
            odes.separatrix_slope_2d(1.0, 0.5)
        with pytest.raises(DomainError):
            odes.separatrix_slope_2d(0.0, -1.0)
