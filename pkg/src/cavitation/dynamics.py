"""Right-hand sides of the radial ODEs and an adaptive Runge-Kutta integrator.

The radial equilibrium equation is integrated as a first-order system in
``(r, r')``. The integrator is a Dormand-Prince 5(4) pair with an elementary
(proportional) step-size controller, cubic Hermite dense output on accepted
steps and terminal/non-terminal event location.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NumericalError, StepSizeError, StrainDomainError

# --------------------------------------------------------------------------
# state types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PhaseState:
    """Point of the autonomous system in ``s = ln R``: ``v = r/R``, ``vdot = dv/ds``."""

    v: float
    vdot: float

    @property
    def nu(self):
        return self.vdot + self.v


@dataclass(frozen=True)
class OmegaState:
    """Point of the stress initial value problem: ``omega = R/r`` and ``T_hat``."""

    omega: float
    That: float


# --------------------------------------------------------------------------
# right-hand sides
# --------------------------------------------------------------------------


def equilibrium_rhs(m, R, r, rprime):
    """``r''`` from the radial equilibrium equation.

    Expanding ``d/dR[R^(n-1) Phi_1] = (n-1) R^(n-2) Phi_2`` gives
    ``r'' = (n-1) / (R Phi_11) * [Phi_2 - Phi_1 - Phi_12 (r' - r/R)]``.
    """
    v = r / R
    n = m.n
    return (n - 1) / (R * m.phi_11(rprime, v)) * (
        m.phi_2(rprime, v) - m.phi_1(rprime, v) - m.phi_12(rprime, v) * (rprime - v))


def equilibrium_rhs_modified(m, R, r, rprime):
    """``r''`` from the Euler-Lagrange equation of the modified energy.

    Uses ``Phi_hat`` in place of ``Phi``. Since the two energies differ by a
    null Lagrangian the result agrees with :func:`equilibrium_rhs` up to
    rounding; it is kept separate as an independent check.
    """
    v = r / R
    n, k = m.n, m.kappa
    d = rprime * v ** (n - 1)
    hp, hpp = m.vol.h_prime(d), m.vol.h_second(d)
    lv = math.log(v) if isinstance(v, float) else np.log(v)
    p1 = m.phi_hat_1(rprime, v)
    p2 = m.phi_hat_2(rprime, v)
    p11 = k * (n - 1) * rprime ** (n - 2) + v ** (2 * (n - 1)) * hpp
    # d/dv_2 of Phi_hat_1 at equal transverse stretches
    p12 = (v ** (n - 2) * (hp + (n - 1) * k * (1.0 / n + lv)) + rprime * v ** (2 * n - 3) * hpp
           + k * v ** (n - 2))
    return (n - 1) / (R * p11) * (p2 - p1 - p12 * (rprime - v))


def radial_system(m, modified=False):
    """Return ``f(s, y)`` for ``y = (r, r')`` with independent variable ``s = ln R``."""
    acc = equilibrium_rhs_modified if modified else equilibrium_rhs

    def f(s, y):
        R = math.exp(s)
        r, rp = y[0], y[1]
        return np.array([R * rp, R * acc(m, R, r, rp)])

    return f


def autonomous_rhs(m, state: PhaseState):
    """``(dv/ds, d2v/ds2)`` of the autonomous form under ``R = e^s``.

    ``R r''`` is homogeneous of degree zero in ``R``, so it is evaluated at
    ``R = 1`` and the result carries no ``s`` dependence.
    """
    v, vdot = state.v, state.vdot
    nu = vdot + v
    return vdot, equilibrium_rhs(m, 1.0, v, nu) - vdot


def stress_rhs(m, R, r, rprime):
    """``d T_hat / dR`` along a solution of the equilibrium equation."""
    n = m.n
    v = r / R
    return (n - 1) * m.kappa * (rprime / r) * (1.0 - (rprime / v) ** (n - 1))


def nu_hat_limit(m, That, omega):
    """``nu_hat(T_hat, 1/omega)``, extended by its limit 0 at ``omega = 0``."""
    if omega <= 0.0:
        return 0.0
    return m.invert_nu_hat(That, 1.0 / omega)


def ivp_T_rhs(m, state: OmegaState):
    """``d T_hat / d omega`` of the stress initial value problem.

    As ``omega -> 0`` the radial stretch ``nu_hat(T, 1/omega)`` tends to zero,
    so the bounded extension of the right-hand side at ``omega = 0`` is 0.
    """
    w = state.omega
    if w < 0:
        raise StrainDomainError(f"omega must be nonnegative, got {w}")
    nu = nu_hat_limit(m, state.That, w)
    n = m.n
    return (n - 1) * m.kappa * sum(w**k * nu ** (k + 1) for k in range(n - 1))


def det_vs_v_rhs(m, v, jac):
    """``d(jac)/dv`` for the determinant of a cavitating solution as a function of ``v = r/R``."""
    if v <= 0 or jac <= 0:
        raise StrainDomainError(f"need v, jac > 0, got v={v}, jac={jac}")
    n, k = m.n, m.kappa
    q = jac / v ** (n - 1)
    lhs = 1.0 + v ** (n * (n - 1)) * m.vol.h_second(jac) / ((n - 1) * k * jac ** (n - 2))
    bracket = (-v ** (n - 1)
               - v ** (n - 1) * sum(v ** (-j) * q**j for j in range(1, n - 1))
               + (n - 1) * jac ** (n - 1) / v ** ((n - 1) ** 2))
    return v ** (n * (n - 2)) / jac ** (n - 2) * bracket / lhs


# --------------------------------------------------------------------------
# integrator
# --------------------------------------------------------------------------

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


class Event:
    """Wraps a scalar event function ``g(t, y)``.

    A crossing is a sign change of ``g`` between accepted steps; its location
    is refined by bisection on the dense output. ``direction`` filters
    crossings (+1 rising, -1 falling, 0 both).
    """

    def __init__(self, func, terminal=True, direction=0, name=None):
        self.func = func
        self.terminal = terminal
        self.direction = direction
        self.name = name or getattr(func, "__name__", "event")

    def __call__(self, t, y):
        return self.func(t, y)


def _as_event(e):
    if isinstance(e, Event):
        return e
    return Event(e, terminal=getattr(e, "terminal", True), direction=getattr(e, "direction", 0))


@dataclass
class Trajectory:
    """Accepted steps of an integration with cubic Hermite dense output."""

    t: np.ndarray
    y: np.ndarray
    f: np.ndarray
    status: str = "success"
    t_events: list = field(default_factory=list)
    y_events: list = field(default_factory=list)
    event_names: list = field(default_factory=list)
    nfev: int = 0
    naccept: int = 0
    nreject: int = 0

    def __call__(self, tq):
        """Evaluate the Hermite interpolant at ``tq`` (scalar or array)."""
        scalar = np.ndim(tq) == 0
        tq = np.atleast_1d(np.asarray(tq, dtype=float))
        t = self.t
        forward = t[-1] >= t[0]
        ts = t if forward else t[::-1]
        idx = np.searchsorted(ts, tq, side="right") - 1
        idx = np.clip(idx, 0, len(t) - 2)
        if not forward:
            idx = len(t) - 2 - idx
        out = _hermite(t[idx], t[idx + 1], self.y[idx], self.y[idx + 1],
                       self.f[idx], self.f[idx + 1], tq)
        return out[0] if scalar else out

    def derivative(self, tq):
        """Derivative of the Hermite interpolant."""
        scalar = np.ndim(tq) == 0
        tq = np.atleast_1d(np.asarray(tq, dtype=float))
        t = self.t
        forward = t[-1] >= t[0]
        ts = t if forward else t[::-1]
        idx = np.clip(np.searchsorted(ts, tq, side="right") - 1, 0, len(t) - 2)
        if not forward:
            idx = len(t) - 2 - idx
        out = _hermite_deriv(t[idx], t[idx + 1], self.y[idx], self.y[idx + 1],
                             self.f[idx], self.f[idx + 1], tq)
        return out[0] if scalar else out

    @property
    def t_final(self):
        return self.t[-1]

    @property
    def y_final(self):
        return self.y[-1]

    def to_csv(self, path, x=None):
        """Write ``x,y1,...,yk`` rows (accepted steps, or the interpolant at ``x``)."""
        xs = self.t if x is None else np.asarray(x, dtype=float)
        ys = self.y if x is None else self(xs)
        k = ys.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x"] + [f"y{i + 1}" for i in range(k)])
            for xi, yi in zip(xs, ys):
                w.writerow([repr(float(xi))] + [repr(float(v)) for v in yi])


def _hermite(t0, t1, y0, y1, f0, f1, tq):
    h = (t1 - t0)[:, None]
    th = ((tq - t0) / (t1 - t0))[:, None]
    h00 = (1 + 2 * th) * (1 - th) ** 2
    h10 = th * (1 - th) ** 2
    h01 = th**2 * (3 - 2 * th)
    h11 = th**2 * (th - 1)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def _hermite_deriv(t0, t1, y0, y1, f0, f1, tq):
    h = (t1 - t0)[:, None]
    th = ((tq - t0) / (t1 - t0))[:, None]
    d00 = 6 * th**2 - 6 * th
    d10 = 3 * th**2 - 4 * th + 1
    d01 = -d00
    d11 = 3 * th**2 - 2 * th
    return (d00 * y0 + d01 * y1) / h + d10 * f0 + d11 * f1


def _error_norm(err, scale):
    return math.sqrt(float(np.mean((err / scale) ** 2)))


def _initial_step(fun, t0, y0, f0, direction, rtol, atol, span):
    scale = atol + np.abs(y0) * rtol
    d0 = _error_norm(y0, scale)
    d1 = _error_norm(f0, scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = y0 + direction * h0 * f0
    f1 = np.asarray(fun(t0 + direction * h0, y1), dtype=float)
    d2 = _error_norm(f1 - f0, scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, span)


_RECOVERABLE = (StrainDomainError, OverflowError, ZeroDivisionError, FloatingPointError)


def integrate(rhs: Callable, y0: Sequence[float], span: tuple[float, float],
              rtol: float = 1e-10, atol: float = 1e-12, *, events=(),
              first_step: float | None = None, max_step: float = math.inf,
              fixed_step: float | None = None, tstops: Sequence[float] = (),
              max_steps: int = 1_000_000) -> Trajectory:
    """Integrate ``y' = rhs(t, y)`` over ``span`` with Dormand-Prince 5(4).

    Parameters
    ----------
    rhs : callable
        ``rhs(t, y) -> array_like``.
    y0 : sequence of float
        Initial state.
    span : (t0, t1)
        Integration interval; ``t1 < t0`` integrates backwards.
    rtol, atol : float
        Mixed error tolerance of the embedded estimate.
    events : sequence
        Event functions ``g(t, y)`` or :class:`Event` instances.
    first_step, max_step : float, optional
        Step size hints.
    fixed_step : float, optional
        Disable adaptivity and march with this step (used for order checks).
    tstops : sequence of float
        Points the integrator must step onto exactly.

    Raises
    ------
    StepSizeError
        If the step falls below ``1e-14 * |t1 - t0|``.
    """
    t0, t1 = float(span[0]), float(span[1])
    length = abs(t1 - t0)
    if length == 0:
        raise ValueError("empty integration span")
    direction = 1.0 if t1 > t0 else -1.0
    y = np.array(y0, dtype=float)
    events = [_as_event(e) for e in events]
    stops = sorted((s for s in tstops if (s - t0) * direction > 0 and (t1 - s) * direction > 0),
                   key=lambda s: direction * s)
    stops.append(t1)
    stop_i = 0

    nfev = 0

    def fun(t, yy):
        nonlocal nfev
        nfev += 1
        return np.asarray(rhs(t, yy), dtype=float)

    t = t0
    f = fun(t, y)
    ts, ys, fs = [t], [y.copy()], [f.copy()]
    gvals = [e(t, y) for e in events]
    traj = Trajectory(np.empty(0), np.empty(0), np.empty(0))

    if fixed_step is not None:
        h = abs(fixed_step)
    elif first_step is not None:
        h = abs(first_step)
    else:
        h = _initial_step(fun, t, y, f, direction, rtol, atol, length)
    h = min(h, max_step)
    h_min = 1e-14 * length
    naccept = nreject = 0
    status = "success"

    for _ in range(max_steps):
        target = stops[stop_i]
        remaining = (target - t) * direction
        h_try = min(h, remaining)
        landing = h_try >= remaining * (1 - 1e-12)
        if landing:
            h_try = remaining
        if h_try < h_min and not landing:
            raise StepSizeError(f"step size underflow at t={t} (h={h_try:.3e})")
        hs = h_try * direction
        try:
            k = [f]
            for i in range(1, 7):
                yi = y + hs * sum(a * kj for a, kj in zip(_A[i], k))
                k.append(fun(t + _C[i] * hs, yi))
            y_new = y + hs * sum(b * kj for b, kj in zip(_B, k) if b)
            if not np.all(np.isfinite(y_new)):
                raise FloatingPointError
            f_new = k[6]
            if not np.all(np.isfinite(f_new)):
                raise FloatingPointError
            err_vec = hs * sum(e * kj for e, kj in zip(_E, k) if e)
        except _RECOVERABLE:
            if fixed_step is not None:
                raise NumericalError(f"right-hand side failed at t={t}")
            nreject += 1
            h = 0.25 * h_try
            if h < h_min:
                raise StepSizeError(f"step size underflow at t={t}: right-hand side "
                                    f"not evaluable") from None
            continue

        if fixed_step is None:
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = _error_norm(err_vec, scale)
            if err > 1.0:
                nreject += 1
                h = h_try * max(_MIN_FACTOR, _SAFETY * err ** (-0.2))
                if h < h_min:
                    raise StepSizeError(f"step size underflow at t={t} (h={h:.3e})")
                continue
            factor = _MAX_FACTOR if err == 0 else min(_MAX_FACTOR, _SAFETY * err ** (-0.2))
        else:
            factor = 1.0

        t_new = target if landing else t + hs
        naccept += 1
        # events
        hit = None
        if events:
            new_g = [e(t_new, y_new) for e in events]
            for j, e in enumerate(events):
                g0, g1 = gvals[j], new_g[j]
                crossed = (g0 < 0 <= g1) or (g0 > 0 >= g1)
                if crossed and e.direction and np.sign(g1 - g0) != e.direction:
                    crossed = False
                if crossed:
                    te, ye = _locate(e, t, t_new, y, y_new, f, f_new)
                    traj.t_events.append(te)
                    traj.y_events.append(ye)
                    traj.event_names.append(e.name)
                    if e.terminal and (hit is None or (te - hit[0]) * direction < 0):
                        hit = (te, ye)
            gvals = new_g
        if hit is not None:
            te, ye = hit
            fe = fun(te, ye)
            ts.append(te)
            ys.append(ye)
            fs.append(fe)
            status = "event"
            break
        t, y, f = t_new, y_new, f_new
        ts.append(t)
        ys.append(y.copy())
        fs.append(f.copy())
        if landing:
            stop_i += 1
            if stop_i == len(stops):
                break
        if fixed_step is None:
            h = min(h_try * factor, max_step)
    else:
        raise NumericalError(f"integration exceeded {max_steps} steps")

    traj.t = np.array(ts)
    traj.y = np.array(ys)
    traj.f = np.array(fs)
    traj.status = status
    traj.nfev = nfev
    traj.naccept = naccept
    traj.nreject = nreject
    return traj


def _locate(event, ta, tb, ya, yb, fa, fb, xtol=1e-14):
    """Bisection for the event crossing on the Hermite interpolant of one step."""
    interp = lambda tq: _hermite(np.array([ta]), np.array([tb]), ya[None], yb[None],
                                 fa[None], fb[None], np.array([tq]))[0]
    lo, hi = ta, tb
    glo = event(lo, ya)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        ym = interp(mid)
        gm = event(mid, ym)
        if gm == 0:
            lo = hi = mid
            break
        if (gm < 0) == (glo < 0):
            lo, glo = mid, gm
        else:
            hi = mid
        if abs(hi - lo) <= xtol * max(1.0, abs(mid)):
            break
    te = hi
    return te, interp(te)
