"""All 2D pole starts, from shrinking to strongly expanding.

lam > 0 collapses at finite r. lam = 0 is the cigar. For -1 < lam < 0 the
curvature is positive and decreasing from (1+lam)/2, for lam < -1 it is
negative and increasing from (1+lam)/2, and lam = -1 is the flat plane.
"""
from yamabe_lab import SolitonParams, classify, integrate_pole, predicted_regime

print(f"{'lam':>6} {'K(0+)':>10} {'sign':>9} {'K trend':>19} {'end':>22} {'rho tail':>9} match")
for lam in (2.0, 1.0, 0.5, 0.0, -0.5, -0.9, -1.0, -1.5, -2.0, -3.0):
    params = SolitonParams(2, lam)
    traj = integrate_pole(params)
    rep = classify(traj)
    tail = rep.asymptote_drho[0] if rep.asymptote_drho else float("nan")
    print(f"{lam:6.2f} {traj.K[0]:10.6f} {rep.scalar_sign.value:>9} "
          f"{rep.k_monotonicity.value:>19} {rep.completeness.value:>22} {tail:9.5f} "
          f"{rep.theorem_match.value}")

print()
print("expected at lam=-0.5:", predicted_regime(SolitonParams(2, -0.5)).note)
