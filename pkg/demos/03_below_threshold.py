"""
Below the critical displacement: affine limits and boundary layers
==================================================================

For ``lam < 1`` the punctured solutions converge to ``lam R`` and ``T_hat``
tends to a negative constant away from the puncture. Between ``1`` and the
critical displacement the limit is again affine but the strain near
``R = eps`` keeps a sharp boundary layer.
"""

import numpy as np

from cavitation import eps_sweep, power_law_material

m = power_law_material()
eps_list = [0.2, 0.1, 0.05, 1e-4]

finest = {}
for lam in (0.95, 1.01):
    res = eps_sweep(m, lam, eps_list)
    finest[lam] = res.bundles[-1]
    print(f"lam = {lam}")
    for row, b in zip(res.rows, res.bundles):
        tail = b.that_profile[b.R >= 0.1]
        print(f"  eps={row['eps']:<7g} sup|r - lam R| = {row['sup_dist_affine']:.2e} "
              f"T_hat on [0.1,1]: {tail.min():+.5f} .. {tail.max():+.5f}  "
              f"r'(eps) = {b.field.node_slopes[0]:.4f}")

# below the threshold r' > r/R and r is concave; above it both flip
for lam, b in finest.items():
    s = b.field.node_slopes
    d = np.diff(s)
    trend = "decreasing" if np.all(d <= 0) else "increasing" if np.all(d >= 0) else "mixed"
    print(f"lam={lam}: r'(eps) - r(eps)/eps = {s[0] - b.field.v[0]:+.4f}, r' {trend}")
