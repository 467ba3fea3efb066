"""
Stored energies, modified stress and the homogeneous threshold
==============================================================

The radial stored energy depends on the radial stretch ``nu = r'`` and the
transverse stretch ``v = r/R``. Adding a null Lagrangian gives the modified
energy, whose radial stress ``T_hat`` is finite at a cavity surface.
"""

import numpy as np

from cavitation import penalty_material, power_law_material

# power-law volumetric term h(d) = C d^gamma + D d^-delta, with D chosen so
# that the reference configuration is stress free
m = power_law_material(n=3, kappa=1.0, C=1.0, gamma=2.0, delta_exp=2.0)
print("D =", m.vol.D)                      # 11/6
print("Phi(1, 1) =", m.phi(1.0, 1.0))       # 23/6
print("T_hat(1, 1) =", m.modified_stress(1.0, 1.0))

# T_hat is strictly increasing in nu, so it can be inverted for r'
nu = np.geomspace(1e-3, 10, 6)
T = m.modified_stress(nu, 2.0)
print("T_hat(nu, 2):", np.round(T, 4))
print("recovered nu:", [round(m.invert_nu_hat(t, 2.0), 6) for t in T])

# the Cauchy stress and its modified version differ by a log of v
for v in (0.5, 1.0, 2.0):
    print(f"v={v}: T - T_hat = {m.cauchy_stress(0.7, v) - m.modified_stress(0.7, v):+.6f}")

# the homogeneous threshold solves g(lam) = T_hat(lam, lam) = 0
print("bar lambda =", m.bar_lambda())

# penalty law approaching incompressibility: minimum of h near d = 1 + 1/C
p = penalty_material(C=20.0)
d = np.linspace(0.9, 1.2, 7)
print("penalty h(d):", np.round(p.vol.h(d), 4))
