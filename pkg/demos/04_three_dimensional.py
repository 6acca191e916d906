"""3D warped products over surfaces.

1. lam = -1 over a hyperbolic fiber (rbar = -2): rho = sqrt(2) is an exact
   product solution with R = -1, a saddle of the ODE.
2. lam = 0 over a flat fiber: C = 2 sqrt(rho) rho' + rho^(5/2)/5 is
   conserved, and solutions end in a slope blow-up.
3. lam >= 0 over a nonpositive fiber: every seed breaks down.
"""

import numpy as np

from yamabe_lab import (FiberModel, IntegratorConfig, SolitonParams, StartCase, classify,
                        full_line_seed, integrate, integrate_full_line, odes, sweep)

hyper = SolitonParams(3, -1.0, FiberModel.hyperbolic(), StartCase.LINE)
rs = odes.constant_expanding_solution(-1.0, -2.0)
traj = integrate_full_line(hyper, full_line_seed(hyper, rs, 0.0))
print(f"constant solution: max|rho - sqrt2| = {np.max(np.abs(traj.rho - rs)):.1e}, "
      f"R in [{traj.R.min()}, {traj.R.max()}]")
for delta in (-0.1, 0.1):
    t = integrate_full_line(hyper, full_line_seed(hyper, rs + delta, 0.0),
                            IntegratorConfig(r_min=-20.0, r_max=20.0))
    rep = classify(t)
    print(f"  seed sqrt2{delta:+}: r in [{t.r[0]:.2f}, {t.r[-1]:.2f}], "
          f"max R = {t.R.max():.3e}, {rep.completeness.value}")

flat = SolitonParams(3, 0.0, FiberModel.euclidean(), StartCase.LINE)
seed = full_line_seed(flat, 10.0, -3.15)
t = integrate(flat, seed.state, IntegratorConfig(), "forward")
print(f"steady flat fiber: C = {seed.C_steady!r}, forward drift "
      f"{np.nanmax(np.abs(t.C_steady - seed.C_steady)):.1e}")
t = integrate(flat, seed.state, IntegratorConfig(), "backward")
print(f"  backward: {t.terminal_event.kind.value} at r = {t.terminal_event.r:.4f}")

seeds = [(a, b) for a in (0.5, 1.0, 2.0) for b in (-1.0, -0.1, 0.1, 1.0)]
for lam in (0.0, 1.0):
    for rbar in (0.0, -2.0):
        p = SolitonParams(3, lam, FiberModel.surface(rbar), StartCase.LINE)
        rows = sweep(p, [lam], seeds, IntegratorConfig(r_min=-200.0, r_max=200.0))
        broke = sum(r.report is not None and r.report.completeness.breakdown for r in rows)
        print(f"lam={lam}, rbar={rbar}: {broke}/{len(rows)} seeds break down")
