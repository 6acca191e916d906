import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from yamabe_lab.errors import DomainError, StencilRangeError
from yamabe_lab.geometry import (FiberKind, FiberModel, curvature_sample_3d,
                                 fd_scalar_curvature_oracle, gaussian_curvature_2d,
                                 scalar_curvature_warped)

finite = st.floats(-50, 50, allow_nan=False)
positive = st.floats(1e-3, 50)


class TestFiberModel:
    def test_named_models(self):
        assert FiberModel.sphere().rbar == 2.0
        assert FiberModel.circle().dim == 1
        assert FiberModel.euclidean().dim == 2
        assert FiberModel.hyperbolic().rbar == -2.0

    @pytest.mark.parametrize("kind, rbar", [
        (FiberKind.ROUND_SPHERE2, 1.0),
        (FiberKind.HYPERBOLIC2, 0.0),
        (FiberKind.HYPERBOLIC2, 1.0),
        (FiberKind.CIRCLE, 0.5),
        (FiberKind.EUCLIDEAN2, -1.0),
        (FiberKind.CONST_SCAL, math.nan),
    ])
    def test_invariants_enforced(self, kind, rbar):
        with pytest.raises(DomainError):
            FiberModel(kind, rbar)

    def test_surface_picks_model(self):
        assert FiberModel.surface(2.0).kind is FiberKind.ROUND_SPHERE2
        assert FiberModel.surface(0.0).kind is FiberKind.EUCLIDEAN2
        assert FiberModel.surface(-3.0).kind is FiberKind.HYPERBOLIC2
        assert FiberModel.surface(5.0).kind is FiberKind.CONST_SCAL


class TestClosedForms:
    def test_product_cylinder_over_sphere(self):
        assert scalar_curvature_warped(3, 2.0, 1.0, 0.0, 0.0) == 2.0

    def test_flat_cylinder(self):
        assert scalar_curvature_warped(2, 0.0, 1.0, 0.0, 0.0) == 0.0
        assert gaussian_curvature_2d(1.0, 0.0) == 0.0

    def test_unit_three_sphere(self):
        s, c = math.sin(1.0), math.cos(1.0)
        assert scalar_curvature_warped(3, 2.0, s, c, -s) == pytest.approx(6.0, abs=1e-12)

    def test_unit_two_sphere(self):
        s = math.sin(0.7)
        assert gaussian_curvature_2d(s, -s) == pytest.approx(1.0, abs=1e-15)

    def test_cigar_gaussian_curvature(self):
        t = math.tanh(0.5)
        sech2 = 1.0 / math.cosh(0.5) ** 2
        k = gaussian_curvature_2d(2.0 * t, -sech2 * t)
        assert k == pytest.approx(sech2 / 2.0, rel=1e-15)
        assert k == pytest.approx(0.393224, abs=5e-7)

    def test_sample_cylinder_over_sphere(self):
        cs = curvature_sample_3d(2.0, 1.0, 0.0, 0.0)
        assert (cs.k_rad, cs.k_fib, cs.scalar_R) == (0.0, 1.0, 2.0)

    def test_sample_three_sphere(self):
        r = 0.3
        cs = curvature_sample_3d(2.0, math.sin(r), math.cos(r), -math.sin(r), r=r)
        assert cs.k_rad == pytest.approx(1.0, abs=1e-14)
        assert cs.k_fib == pytest.approx(1.0, abs=1e-14)
        assert cs.scalar_R == pytest.approx(6.0, abs=1e-13)
        assert cs.r == r

    def test_sample_constant_expanding(self):
        cs = curvature_sample_3d(-2.0, math.sqrt(2.0), 0.0, 0.0)
        assert cs.scalar_R == pytest.approx(-1.0, rel=1e-15)

    @pytest.mark.parametrize("rho", [0.0, -1.0])
    def test_nonpositive_rho_rejected(self, rho):
        with pytest.raises(DomainError):
            scalar_curvature_warped(3, 2.0, rho, 0.0, 0.0)
        with pytest.raises(DomainError):
            gaussian_curvature_2d(rho, 0.0)
        with pytest.raises(DomainError):
            curvature_sample_3d(2.0, rho, 0.0, 0.0)

    def test_dimension_one_rejected(self):
        with pytest.raises(DomainError):
            scalar_curvature_warped(1, 0.0, 1.0, 0.0, 0.0)

    def test_general_dimension_round_sphere(self):
        # rho = sin r over the unit (n-1)-sphere is the unit n-sphere, R = n(n-1)
        r = 0.9
        for n in range(2, 7):
            rbar = (n - 1) * (n - 2)
            R = scalar_curvature_warped(n, rbar, math.sin(r), math.cos(r), -math.sin(r))
            assert R == pytest.approx(n * (n - 1), rel=1e-13)

    def test_round_sphere_sectional_curvatures(self):
        for r in np.linspace(0.05, math.pi / 2 - 0.05, 20):
            cs = curvature_sample_3d(2.0, math.sin(r), math.cos(r), -math.sin(r), r=r)
            assert cs.k_rad == pytest.approx(1.0, abs=1e-13)
            assert cs.k_fib == pytest.approx(1.0, abs=1e-13)


class TestIdentities:
    @given(st.floats(-10, 10), positive, finite, finite)
    def test_trace_identity_3d(self, rbar, rho, drho, ddrho):
        cs = curvature_sample_3d(rbar, rho, drho, ddrho)
        scale = abs(rbar) / rho**2 + 2 * drho**2 / rho**2 + 4 * abs(ddrho) / rho
        assert abs(cs.scalar_R - (cs.ricci_rr + 2 * cs.ricci_fib)) <= 1e-12 * max(scale, 1e-300)

    @given(st.floats(-10, 10), positive, finite, finite)
    def test_ricci_decomposition(self, rbar, rho, drho, ddrho):
        cs = curvature_sample_3d(rbar, rho, drho, ddrho)
        assert cs.ricci_rr == 2 * cs.k_rad
        scale = abs(cs.k_rad) + abs(cs.k_fib)
        assert abs(cs.ricci_fib - (cs.k_rad + cs.k_fib)) <= 1e-12 * max(scale, 1e-300)

    @given(positive, finite, finite)
    def test_two_dimensional_scalar_is_twice_gauss(self, rho, drho, ddrho):
        R = scalar_curvature_warped(2, 0.0, rho, drho, ddrho)
        assert R == pytest.approx(2 * gaussian_curvature_2d(rho, ddrho), rel=1e-15, abs=1e-300)


def _grid(r, h, profile):
    grid = r + h * np.arange(-2, 3)
    return grid, np.array([profile(x) for x in grid])


class TestFiniteDifferenceOracle:
    def test_flat_cylinder(self):
        grid = np.linspace(0.0, 1.0, 11)
        val = fd_scalar_curvature_oracle(grid, np.ones_like(grid), FiberModel.circle(), 0.5)
        assert abs(val) <= 1e-8

    def test_three_sphere(self):
        grid, prof = _grid(0.8, 1e-3, math.sin)
        val = fd_scalar_curvature_oracle(grid, prof, FiberModel.sphere(), 0.8, 1e-3)
        assert val == pytest.approx(6.0, abs=1e-4)
        assert val > 0  # sign convention: positive on the round sphere

    def test_cigar_matches_gauss(self):
        grid, prof = _grid(1.0, 1e-3, lambda x: 2 * math.tanh(x / 2))
        val = fd_scalar_curvature_oracle(grid, prof, FiberModel.circle(), 1.0, 1e-3)
        t, sech2 = math.tanh(0.5), 1 / math.cosh(0.5) ** 2
        assert val == pytest.approx(2 * gaussian_curvature_2d(2 * t, -t * sech2), abs=1e-4)

    @pytest.mark.parametrize("fiber", [FiberModel.sphere(), FiberModel.euclidean(),
                                       FiberModel.hyperbolic(-2.0), FiberModel.surface(0.7)])
    def test_generic_profile_second_order(self, fiber):
        # a C^4 profile unrelated to any soliton
        def prof(x):
            return 1.5 + 0.4 * math.sin(1.3 * x) + 0.05 * x * x

        def exact(x):
            rho = prof(x)
            d = 0.52 * math.cos(1.3 * x) + 0.1 * x
            dd = -0.676 * math.sin(1.3 * x) + 0.1
            return scalar_curvature_warped(3, fiber.rbar, rho, d, dd)

        rng = np.random.default_rng(3)
        pts = rng.uniform(-3.0, 3.0, 100)
        errs = []
        for h in (2e-3, 1e-3):
            e = []
            for r in pts:
                grid, p = _grid(r, h, prof)
                e.append(abs(fd_scalar_curvature_oracle(grid, p, fiber, r, h) - exact(r)))
            errs.append(np.array(e))
        assert errs[1].max() <= 1e-4
        assert math.log2(errs[0].sum() / errs[1].sum()) >= 1.9

    def test_stencil_leaving_grid(self):
        grid = np.linspace(0.0, 1.0, 11)
        with pytest.raises(StencilRangeError):
            fd_scalar_curvature_oracle(grid, np.ones(11), FiberModel.circle(), 0.1)

    def test_point_off_grid(self):
        grid = np.linspace(0.0, 1.0, 11)
        with pytest.raises(StencilRangeError):
            fd_scalar_curvature_oracle(grid, np.ones(11), FiberModel.circle(), 0.55)

    def test_nonpositive_profile(self):
        grid = np.linspace(0.0, 1.0, 11)
        prof = np.ones(11)
        prof[5] = 0.0
        with pytest.raises(DomainError):
            fd_scalar_curvature_oracle(grid, prof, FiberModel.circle(), 0.5)

    def test_mismatched_step(self):
        grid = np.linspace(0.0, 1.0, 11)
        with pytest.raises(DomainError):
            fd_scalar_curvature_oracle(grid, np.ones(11), FiberModel.circle(), 0.5, h=0.2)
