"""
A cavitating equilibrium on punctured balls
===========================================

For ``lam = 1.05`` the minimiser of the modified energy opens a hole. On the
annulus ``eps < R < 1`` the interior condition ``T_hat(r(eps)) = 0`` is
imposed and the problem is solved by outward shooting on the hole radius.
"""

import numpy as np

from cavitation import RadialField, eps_sweep, graded_mesh, modified_energy, power_law_material

m = power_law_material()

res = eps_sweep(m, 1.05, [0.3, 0.2, 1e-2, 1e-4])
print(f"{'eps':>8} {'r(eps)':>10} {'energy':>10} {'sup |r - 1.05 R|':>18}")
for row in res.rows:
    print(f"{row['eps']:8g} {row['cavity']:10.6f} {row['energy']:10.6f} "
          f"{row['sup_dist_affine']:18.6f}")

# the cavitating state beats the affine deformation
affine = modified_energy(m, RadialField.affine(1.05, graded_mesh(1e-8, 2048)))
b = res.bundles[-1]
print(f"affine energy {affine:.5f}, cavitating energy {b.energy.modified:.5f}")

# energy identities evaluated on the solution
for name, val in b.energy.identity_residuals.items():
    print(f"{name:12s} residual {val:.2e}")
print("boundary-term energy", b.energy.boundary_formula)

# near the hole the Cauchy stress grows like 2 kappa ln R
R = b.R[b.R < 1e-2]
T = b.cauchy_profile(m)[b.R < 1e-2]
print("T - 2 ln R near the hole ranges over", np.ptp(T - 2 * np.log(R)))

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots()
    for bb in res.bundles:
        ax.plot(bb.R, bb.r, label=f"eps={bb.eps:g}")
    ax.set_xlabel("R")
    ax.set_ylabel("r")
    ax.legend()
    fig.savefig("cavitating_profiles.svg")
    print("wrote cavitating_profiles.svg")
except ImportError:
    pass
