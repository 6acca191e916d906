"""Closed-form curvature of dr^2 + rho^2 g versus brute-force finite differences.

The oracle builds the metric on a coordinate grid and differentiates it
through Christoffel symbols, Riemann and Ricci. The error shrinks like h^2.
"""
import math

import numpy as np

from yamabe_lab import FiberModel, fd_scalar_curvature_oracle, scalar_curvature_warped


def profile(r):
    return 1.0 + 0.3 * math.sin(r) + 0.1 * r * r


def closed(n, rbar, r):
    rho = profile(r)
    drho = 0.3 * math.cos(r) + 0.2 * r
    ddrho = -0.3 * math.sin(r) + 0.2
    return scalar_curvature_warped(n, rbar, rho, drho, ddrho)


for fiber in (FiberModel.circle(), FiberModel.sphere(), FiberModel.euclidean(),
              FiberModel.hyperbolic()):
    errs = []
    for h in (2e-3, 1e-3, 5e-4):
        grid = 0.7 + h * np.arange(-2, 3)
        vals = np.array([profile(x) for x in grid])
        fd = fd_scalar_curvature_oracle(grid, vals, fiber, 0.7, h)
        errs.append(abs(fd - closed(fiber.dim + 1, fiber.rbar, 0.7)))
    order = math.log2(errs[0] / errs[1]), math.log2(errs[1] / errs[2])
    print(f"{fiber.kind.value:>9}: errors {errs[0]:.1e} {errs[1]:.1e} {errs[2]:.1e}, "
          f"order {order[0]:.2f} {order[1]:.2f}")
