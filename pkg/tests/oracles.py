"""Independent reference computations for the test-suite.

Nothing here imports the package under test. Derivatives come from sympy,
radial equilibria from scipy's ``solve_ivp`` (DOP853) with Brent on the
cavity radius, energies from adaptive quadrature along the dense output.
"""

import functools
import math

import numpy as np
import sympy as sp
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq


# --------------------------------------------------------------------------
# materials
# --------------------------------------------------------------------------


def stress_free_power_D(n, kappa, C, gamma, delta_exp):
    """Solve d/dnu Phi_hat(nu, 1, ..., 1) = 0 at nu = 1 for D with sympy."""
    D, d = sp.symbols("D d", positive=True)
    h = C * d**gamma + D * d ** (-delta_exp)
    # Phi_hat_1(1, 1) = kappa + h'(1) + kappa (n - 1)/n
    eq = kappa + sp.diff(h, d).subs(d, 1) + kappa * sp.Rational(n - 1, n)
    return float(sp.solve(eq, D)[0])


@functools.lru_cache(maxsize=None)
def law(kind, C, delta_exp, D, gamma=1.0):
    """``(h, h', h'')`` as plain float callables."""
    d = sp.symbols("d", positive=True)
    if kind == "power":
        h = C * d**gamma + D * d ** (-delta_exp)
    else:
        h = C * (d - 1 - sp.Float(1) / C) ** 2 + D * d ** (-delta_exp)
    return tuple(sp.lambdify(d, e, "math") for e in (h, sp.diff(h, d), sp.diff(h, d, 2)))


@functools.lru_cache(maxsize=None)
def symbolic_partials(n, kappa, kind, C, delta_exp, D, gamma=1.0):
    """Radial restrictions of Phi, Phi_hat and their partials via sympy.

    Returns a dict of callables ``f(nu, v)``; ``*_2`` differentiate in the
    second stretch only, with the other transverse stretches held fixed.
    """
    vs = sp.symbols(f"v1:{n + 1}", positive=True)
    dd = sp.symbols("dd", positive=True)
    if kind == "power":
        hsym = C * dd**gamma + D * dd ** (-delta_exp)
    else:
        hsym = C * (dd - 1 - sp.Float(1) / C) ** 2 + D * dd ** (-delta_exp)
    det = sp.Mul(*vs)
    trans = sp.Mul(*vs[1:])
    phi = sp.Rational(1, n) * kappa * sum(x**n for x in vs) + hsym.subs(dd, det)
    phat = (sp.Rational(1, n) * kappa * vs[0] ** n + hsym.subs(dd, det)
            + kappa * det * (sp.Rational(n - 1, n) + sp.log(trans)))
    nu, v = sp.symbols("nu v", positive=True)
    radial = {x: v for x in vs[1:]}
    radial[vs[0]] = nu
    exprs = {
        "phi": phi,
        "phi_1": sp.diff(phi, vs[0]),
        "phi_2": sp.diff(phi, vs[1]),
        "phi_11": sp.diff(phi, vs[0], 2),
        "phi_12": sp.diff(phi, vs[0], vs[1]),
        "phi_hat": phat,
        "phi_hat_1": sp.diff(phat, vs[0]),
        "phi_hat_2": sp.diff(phat, vs[1]),
        "cauchy_stress": sp.diff(phi, vs[0]) / trans,
        "modified_stress": sp.diff(phat, vs[0]) / trans,
    }
    return {k: sp.lambdify((nu, v), e.subs(radial), "math") for k, e in exprs.items()}


# --------------------------------------------------------------------------
# radial equilibria
# --------------------------------------------------------------------------


class RadialOracle:
    """Outward shooting on the cavity radius with scipy building blocks."""

    def __init__(self, n, kappa, kind, C, delta_exp, D, gamma=1.0):
        self.n, self.k = n, kappa
        self.h, self.hp, self.hpp = law(kind, C, delta_exp, D, gamma)

    def rhs(self, s, y):
        n, k, hp, hpp = self.n, self.k, self.hp, self.hpp
        R = math.exp(s)
        r, nu = y
        v = r / R
        d = nu * v ** (n - 1)
        P1 = k * nu ** (n - 1) + v ** (n - 1) * hp(d)
        P2 = k * v ** (n - 1) + nu * v ** (n - 2) * hp(d)
        P11 = k * (n - 1) * nu ** (n - 2) + v ** (2 * (n - 1)) * hpp(d)
        P12 = v ** (n - 2) * hp(d) + nu * v ** (2 * n - 3) * hpp(d)
        return [R * nu, (n - 1) / P11 * (P2 - P1 - P12 * (nu - v))]

    def that(self, nu, v):
        n, k = self.n, self.k
        return k * (nu / v) ** (n - 1) + self.hp(nu * v ** (n - 1)) + (n - 1) * k * (1 / n + math.log(v))

    def nu_hat(self, T, v):
        f = lambda x: self.that(math.exp(x), v) - T  # noqa: E731
        a = b = math.log(v)
        while f(a) > 0:
            a -= 1
        while f(b) < 0:
            b += 1
        return math.exp(brentq(f, a, b, xtol=1e-15, rtol=1e-15))

    def phi_hat(self, nu, v):
        n, k = self.n, self.k
        d = nu * v ** (n - 1)
        return k / n * nu**n + self.h(d) + k * d * ((n - 1) / n + (n - 1) * math.log(v))

    def shoot(self, c, eps):
        nu = self.nu_hat(0.0, c / eps)
        return solve_ivp(self.rhs, [math.log(eps), 0.0], [c, nu], method="DOP853",
                         rtol=1e-12, atol=1e-30, dense_output=True)

    @functools.lru_cache(maxsize=None)
    def solve(self, lam, eps):
        """``(cavity, modified energy, dense solution in s = ln R)``."""
        f = lambda c: self.shoot(c, eps).y[0, -1] - lam  # noqa: E731
        cs = np.geomspace(eps * 1e-3, lam, 30)
        fs = [f(c) for c in cs]
        i = next(j for j in range(len(cs) - 1) if fs[j] * fs[j + 1] < 0)
        c = brentq(f, cs[i], cs[i + 1], xtol=1e-15, rtol=1e-15)
        sol = self.shoot(c, eps)
        n = self.n

        def integrand(t):
            r, nu = sol.sol(t)
            R = math.exp(t)
            return R**n * self.phi_hat(nu, r / R)

        E = quad(integrand, math.log(eps), 0.0, limit=500, epsabs=1e-13)[0]
        E -= self.k * (n - 1) / n * lam**n * math.log(lam)
        return c, E, sol

    def critical_lambda(self):
        n, k = self.n, self.k

        def f(w, y):
            if w <= 0:
                return [0.0]
            nu = self.nu_hat(y[0], 1 / w)
            return [(n - 1) * k * sum(w**j * nu ** (j + 1) for j in range(n - 1))]

        def ev(w, y):
            return y[0] - self.that(1 / w, 1 / w)

        ev.terminal = True
        sol = solve_ivp(f, [1e-8, 1.0], [0.0], rtol=1e-12, atol=1e-14, events=ev)
        return 1.0 / sol.t_events[0][0]


@functools.lru_cache(maxsize=None)
def example1():
    D = stress_free_power_D(3, 1.0, 1.0, 2.0, 2.0)
    return RadialOracle(3, 1.0, "power", 1.0, 2.0, D, gamma=2.0)


@functools.lru_cache(maxsize=None)
def example2(C):
    return RadialOracle(3, 3.0, "penalty", float(C), 2.0, 1.5)


def affine_modified_energy(n, kappa, h, lam):
    """Closed form: the log terms cancel against the subtracted constant."""
    return (kappa * lam**n + h(lam**n)) / n


def incompressible_energy(lam, n=3, kappa=3.0, D=1.5, eps=0.0):
    def density(R):
        r = (R**n + lam**n - 1) ** (1 / n)
        t = (r / R) ** (n - 1)
        return R ** (n - 1) * (kappa / n * t ** (-n) + D + kappa * ((n - 1) / n + math.log(t)))

    val = quad(density, eps, 1.0, limit=400, epsabs=1e-13)[0]
    return val - kappa * (n - 1) / n * lam**n * math.log(lam)
