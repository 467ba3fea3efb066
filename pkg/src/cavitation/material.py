"""Stored-energy laws for radial deformations of compressible balls.

The stored energy has the form

    Phi(v_1, ..., v_n) = (kappa / n) * sum(v_i ** n) + h(v_1 * ... * v_n)

and is evaluated on radial deformations, where the principal stretches are
``nu = r'(R)`` (radial) and ``v = r(R) / R`` (repeated ``n - 1`` times).
``Phi_hat`` is the modified, non-isotropic energy obtained by adding a null
Lagrangian that makes cavitating states finite-energy.

All functions accept python floats or numpy arrays. Scalars take a fast path
through :mod:`math`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import BracketError, NumericalError, StrainDomainError

STRAIN_FLOOR = 1e-300


def _log(x):
    if isinstance(x, float):
        return math.log(x)
    return np.log(x)


def _guard(name, x):
    """Reject non-positive or non-finite strains."""
    if isinstance(x, float):
        if not (x >= STRAIN_FLOOR and x < math.inf):
            raise StrainDomainError(f"{name} = {x!r} is outside (0, inf)")
        return x
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        return _guard(name, float(arr))
    bad = ~((arr >= STRAIN_FLOOR) & np.isfinite(arr))
    if bad.any():
        idx = int(np.flatnonzero(bad)[0])
        raise StrainDomainError(f"{name}[{idx}] = {arr.flat[idx]!r} is outside (0, inf)")
    return arr


class LawKind(str, enum.Enum):
    POWER = "power"
    PENALTY = "penalty"


@dataclass(frozen=True)
class VolumetricLaw:
    """Volumetric part ``h(d)`` of the stored energy.

    ``power``:   h(d) = C d**gamma + D d**(-delta_exp)
    ``penalty``: h(d) = C (d - 1 - 1/C)**2 + D d**(-delta_exp)

    The penalty law approaches incompressibility as C grows.
    """

    kind: LawKind
    C: float
    delta_exp: float
    D: float
    gamma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", LawKind(self.kind))
        if self.C < 0:
            raise ValueError(f"C must be nonnegative, got {self.C}")
        if self.delta_exp <= 0 or self.D <= 0:
            raise ValueError("delta_exp and D must be positive")
        if self.kind is LawKind.POWER and self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.kind is LawKind.PENALTY and self.C == 0:
            raise ValueError("penalty law needs C > 0")
        d = np.logspace(-6, 6, 241)
        if np.any(self.h_second(d) < 0):
            raise ValueError(f"h is not convex for {self}")

    @classmethod
    def power(cls, C, gamma, delta_exp, D):
        return cls(LawKind.POWER, float(C), float(delta_exp), float(D), float(gamma))

    @classmethod
    def penalty(cls, C, delta_exp, D):
        return cls(LawKind.PENALTY, float(C), float(delta_exp), float(D))

    def h(self, d):
        d = _guard("d", d)
        if self.kind is LawKind.POWER:
            return self.C * d**self.gamma + self.D * d ** (-self.delta_exp)
        return self.C * (d - 1.0 - 1.0 / self.C) ** 2 + self.D * d ** (-self.delta_exp)

    def h_prime(self, d):
        d = _guard("d", d)
        tail = -self.delta_exp * self.D * d ** (-self.delta_exp - 1.0)
        if self.kind is LawKind.POWER:
            return self.C * self.gamma * d ** (self.gamma - 1.0) + tail
        return 2.0 * self.C * (d - 1.0 - 1.0 / self.C) + tail

    def h_second(self, d):
        d = _guard("d", d)
        a = self.delta_exp
        tail = a * (a + 1.0) * self.D * d ** (-a - 2.0)
        if self.kind is LawKind.POWER:
            g = self.gamma
            return self.C * g * (g - 1.0) * d ** (g - 2.0) + tail
        return 2.0 * self.C + tail


def stress_free_D(n, kappa, C, gamma, delta_exp, kind=LawKind.POWER):
    """Coefficient D making the reference configuration stress free.

    Solves ``Phi_hat_1(1, ..., 1) = 0``, i.e. ``h'(1) = -(1 + (n-1)/n) kappa``.
    """
    for name, val in (("n", n), ("kappa", kappa), ("delta_exp", delta_exp)):
        if val <= 0:
            raise ValueError(f"{name} must be positive, got {val}")
    base = (1.0 + (n - 1) / n) * kappa
    if LawKind(kind) is LawKind.POWER:
        if C < 0 or gamma <= 0:
            raise ValueError("power law needs C >= 0 and gamma > 0")
        return (base + C * gamma) / delta_exp
    # penalty: h'(1) = -2 - delta_exp * D, independent of C
    D = (base - 2.0) / delta_exp
    if D <= 0:
        raise ValueError(f"no stress-free penalty law for n={n}, kappa={kappa}")
    return D


@dataclass(frozen=True)
class MaterialLaw:
    """Radial reduction of the stored energy.

    Parameters
    ----------
    n : int
        Space dimension (2 or 3).
    kappa : float
        Shear-like modulus multiplying the ``|F|^n`` growth term.
    vol : VolumetricLaw
        Volumetric term ``h``.
    tol_inv : float
        Absolute tolerance on the stress residual in :meth:`invert_nu_hat`.
    """

    n: int
    kappa: float
    vol: VolumetricLaw
    tol_inv: float = field(default=1e-12, compare=False)

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError(f"n must be 2 or 3, got {self.n}")
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")

    # -- original energy --------------------------------------------------

    def jacobian(self, nu, v):
        return nu * v ** (self.n - 1)

    def phi(self, nu, v):
        nu, v = _guard("nu", nu), _guard("v", v)
        n, k = self.n, self.kappa
        return k / n * (nu**n + (n - 1) * v**n) + self.vol.h(nu * v ** (n - 1))

    def phi_1(self, nu, v):
        nu, v = _guard("nu", nu), _guard("v", v)
        n = self.n
        return self.kappa * nu ** (n - 1) + v ** (n - 1) * self.vol.h_prime(nu * v ** (n - 1))

    def phi_2(self, nu, v):
        """Partial derivative with respect to one transverse stretch."""
        nu, v = _guard("nu", nu), _guard("v", v)
        n = self.n
        return self.kappa * v ** (n - 1) + nu * v ** (n - 2) * self.vol.h_prime(nu * v ** (n - 1))

    def phi_11(self, nu, v):
        nu, v = _guard("nu", nu), _guard("v", v)
        n = self.n
        return (self.kappa * (n - 1) * nu ** (n - 2)
                + v ** (2 * (n - 1)) * self.vol.h_second(nu * v ** (n - 1)))

    def phi_12(self, nu, v):
        nu, v = _guard("nu", nu), _guard("v", v)
        n = self.n
        d = nu * v ** (n - 1)
        return v ** (n - 2) * self.vol.h_prime(d) + nu * v ** (2 * n - 3) * self.vol.h_second(d)

    def cauchy_stress(self, nu, v):
        """Radial Cauchy stress ``T = v**(1-n) * Phi_1``."""
        nu, v = _guard("nu", nu), _guard("v", v)
        n = self.n
        return self.kappa * (nu / v) ** (n - 1) + self.vol.h_prime(nu * v ** (n - 1))

    # -- modified energy --------------------------------------------------

    def phi_hat(self, nu, v):
        nu, v = _guard("nu", nu), _guard("v", v)
        n, k = self.n, self.kappa
        d = nu * v ** (n - 1)
        return k / n * nu**n + self.vol.h(d) + k * d * ((n - 1) / n + (n - 1) * _log(v))

    def phi_hat_1(self, nu, v):
        nu, v = _guard("nu", nu), _guard("v", v)
        n, k = self.n, self.kappa
        d = nu * v ** (n - 1)
        return k * nu ** (n - 1) + v ** (n - 1) * (
            self.vol.h_prime(d) + (n - 1) * k * (1.0 / n + _log(v)))

    def phi_hat_2(self, nu, v):
        """Partial derivative of ``Phi_hat`` with respect to ``v_2``."""
        nu, v = _guard("nu", nu), _guard("v", v)
        n, k = self.n, self.kappa
        d = nu * v ** (n - 1)
        return nu * v ** (n - 2) * (
            self.vol.h_prime(d) + k + k * (n - 1) * (1.0 / n + _log(v)))

    def phi_hat_hessian(self, nu, v):
        """Second derivatives of ``Phi_hat(nu, v, ..., v)`` in ``(nu, v)``.

        ``v`` moves all ``n - 1`` transverse stretches together. Returns
        ``(d2/dnu2, d2/dnu dv, d2/dv2)``.
        """
        nu, v = _guard("nu", nu), _guard("v", v)
        n, k = self.n, self.kappa
        d = nu * v ** (n - 1)
        hp, hpp = self.vol.h_prime(d), self.vol.h_second(d)
        bracket = hp + k + k * (n - 1) * (1.0 / n + _log(v))
        q = (n - 1) * nu * v ** (n - 2)
        h11 = self.phi_11(nu, v)
        h1v = (n - 1) * v ** (n - 2) * bracket + q * hpp * v ** (n - 1)
        hvv = ((n - 1) * (n - 2) * nu * v ** (n - 3) * bracket
               + q * (hpp * q + k * (n - 1) / v))
        return h11, h1v, hvv

    def phi_hat_general(self, stretches):
        """``Phi_hat(v_1, ..., v_n)`` for arbitrary (not radial) stretches."""
        s = np.asarray(stretches, dtype=float)
        if s.shape[-1] != self.n:
            raise ValueError(f"expected {self.n} stretches, got {s.shape[-1]}")
        _guard("stretches", s)
        n, k = self.n, self.kappa
        trans = np.prod(s[..., 1:], axis=-1)
        d = s[..., 0] * trans
        return k / n * s[..., 0] ** n + self.vol.h(d) + k * d * ((n - 1) / n + np.log(trans))

    def modified_stress(self, nu, v):
        """Modified radial Cauchy stress ``T_hat(nu, v)``; increasing in ``nu``."""
        nu, v = _guard("nu", nu), _guard("v", v)
        n, k = self.n, self.kappa
        return (k * (nu / v) ** (n - 1) + self.vol.h_prime(nu * v ** (n - 1))
                + (n - 1) * k * (1.0 / n + _log(v)))

    def modified_stress_dnu(self, nu, v):
        nu, v = _guard("nu", nu), _guard("v", v)
        n = self.n
        return (self.kappa * (n - 1) * nu ** (n - 2) / v ** (n - 1)
                + v ** (n - 1) * self.vol.h_second(nu * v ** (n - 1)))

    def homogeneous_stress(self, v):
        """``g(v) = T_hat(v, v)``, the modified stress of the affine map ``r = vR``."""
        v = _guard("v", v)
        n, k = self.n, self.kappa
        return k + self.vol.h_prime(v**n) + (n - 1) * k * (1.0 / n + _log(v))

    def bar_lambda(self):
        """Unique root of :meth:`homogeneous_stress`."""
        f = lambda x: self.homogeneous_stress(math.exp(x))
        lo, hi = -1.0, 1.0
        for _ in range(200):
            if f(lo) < 0:
                break
            lo *= 2
        for _ in range(200):
            if f(hi) > 0:
                break
            hi *= 2
        if not (f(lo) < 0 < f(hi)):
            raise NumericalError("could not bracket the homogeneous threshold")
        return math.exp(brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))

    def invert_nu_hat(self, target, v, tol=None, guess=None):
        """Solve ``modified_stress(nu, v) = target`` for ``nu > 0``.

        Brackets the root by repeated doubling/halving from ``nu = v`` (or
        ``guess``) and then runs Newton on ``log(nu)`` safeguarded by
        bisection.
        """
        tol = self.tol_inv if tol is None else tol
        v = float(_guard("v", v))
        target = float(target)
        if not math.isfinite(target):
            raise ValueError(f"target stress must be finite, got {target}")

        def resid(x):
            try:
                return self.modified_stress(math.exp(x), v) - target
            except OverflowError:
                # h'(d) diverges to -inf as d -> 0 and to +inf as d -> inf
                return -math.inf if x < 0 else math.inf
            except StrainDomainError:
                return -math.inf if x < 0 else math.inf

        ln2 = math.log(2.0)
        x0 = math.log(v if guess is None else float(guess))
        f0 = resid(x0)
        if f0 == 0.0:
            return math.exp(x0)
        xlo = xhi = x0
        flo = fhi = f0
        for _ in range(200):
            if f0 > 0:
                xlo -= ln2
                flo = resid(xlo)
                if flo < 0:
                    break
                xhi, fhi = xlo, flo
            else:
                xhi += ln2
                fhi = resid(xhi)
                if fhi > 0:
                    break
                xlo, flo = xhi, fhi
        else:
            raise BracketError(
                f"invert_nu_hat: no bracket for T_hat = {target} at v = {v} "
                f"after 200 doublings (last residuals {flo}, {fhi})")

        x = xlo if abs(flo) < abs(fhi) else xhi
        fx = flo if x == xlo else fhi
        for _ in range(200):
            if abs(fx) <= tol:
                return math.exp(x)
            nu = math.exp(x)
            dfdx = nu * self.modified_stress_dnu(nu, v)
            step_ok = False
            if math.isfinite(fx) and dfdx > 0:
                xn = x - fx / dfdx
                step_ok = xlo < xn < xhi
            if not step_ok:
                xn = 0.5 * (xlo + xhi)
            fn = resid(xn)
            if fn < 0:
                xlo, flo = xn, fn
            else:
                xhi, fhi = xn, fn
            if xhi - xlo <= 4 * np.finfo(float).eps * max(1.0, abs(xn)):
                return math.exp(xn)
            x, fx = xn, fn
        raise NumericalError(f"invert_nu_hat did not converge (T_hat={target}, v={v})")


def power_law_material(n=3, kappa=1.0, C=1.0, gamma=2.0, delta_exp=2.0, D=None):
    """Power-law material; ``D=None`` picks the stress-free value."""
    if D is None:
        D = stress_free_D(n, kappa, C, gamma, delta_exp, LawKind.POWER)
    return MaterialLaw(n, float(kappa), VolumetricLaw.power(C, gamma, delta_exp, D))


def penalty_material(C, n=3, kappa=3.0, delta_exp=2.0, D=None):
    """Near-incompressible penalty material; ``D=None`` picks the stress-free value."""
    if D is None:
        D = stress_free_D(n, kappa, C, 0.0, delta_exp, LawKind.PENALTY)
    return MaterialLaw(n, float(kappa), VolumetricLaw.penalty(C, delta_exp, D))
