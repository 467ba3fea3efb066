"""
Approaching incompressibility
=============================

Penalty-law materials with growing ``C`` push the determinant to one. Their
punctured-ball minimisers approach ``r(R) = (R^3 + lam^3 - 1)^(1/3)`` and the
energies increase toward the value of the incompressible map.
"""

from cavitation import incompressible_energy, incompressible_profile
from cavitation.solver import incompressible_study

lam, eps = 1.05, 0.005
rows, _ = incompressible_study([20, 40, 80, 160, 320, 640], lam=lam, eps=eps)
print(f"{'C':>5} {'energy':>10} {'r(eps)':>10} {'sup |r - r_inc|':>16}")
for row in rows:
    print(f"{row['C']:5g} {row['energy']:10.5f} {row['cavity']:10.5f} {row['sup_dist_inc']:16.2e}")
print(f"incompressible: energy {incompressible_energy(lam):.5f}, "
      f"cavity {float(incompressible_profile(0.0, lam)):.6f}")
