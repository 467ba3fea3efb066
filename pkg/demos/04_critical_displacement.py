"""
The critical boundary displacement
==================================

Writing the solution in terms of ``omega = R/r`` turns the cavitating
problem into an initial value problem for ``T_hat(omega)`` starting at the
cavity (``omega = 0``). It meets the homogeneous locus ``g(1/omega)`` at
``omega* = 1/lambda_c``. Every cavitating solution is a rescaling of the
critical one.
"""

import numpy as np

from cavitation import critical_lambda, power_law_material, solve_punctured

m = power_law_material()
c = critical_lambda(m)
print(f"lambda_c = {c.lambda_c:.8f}, bar lambda = {c.bar_lambda}, "
      f"cross-check residual {c.integral_check:.1e}")

# r_lam(R) = r_c(alpha R) / alpha with r_c(alpha) / alpha = lam
lam = 1.05
alpha = c.scale_for(lam)
print(f"alpha for lam={lam}: {alpha:.6f}")
scaled = c.scaled_profile(lam)
b = solve_punctured(m, lam, 1e-4)
R = np.array([0.01, 0.1, 0.5, 1.0])
print("scaled critical:", np.round(scaled(R), 6))
print("shooting       :", np.round(b.field(R), 6))
print("implied cavity  ", scaled(np.array([0.0]))[0], "vs", b.cavity)
