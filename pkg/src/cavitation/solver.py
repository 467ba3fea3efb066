"""Punctured-ball equilibria, gradient-flow predictor and critical displacement.

Two shooting formulations are available:

``outward`` (default)
    Parametrised by the cavity radius ``c = r(eps)``. The inner condition
    ``T_hat(r(eps)) = 0`` fixes ``r'(eps) = nu_hat(0, c/eps)`` exactly, the
    equilibrium equation is integrated out to ``R = 1`` and ``c`` is adjusted
    until ``r(1) = lam``. Integrating away from the puncture follows the
    decaying mode of the linearisation about the affine state, so the
    problem stays well conditioned for every ``lam``.
``inward``
    Parametrised by ``p = r'(1)``; integrates from ``R = 1`` to ``R = eps``
    and adjusts ``p`` until ``T_hat(r(eps)) = 0``. Perturbations grow like
    ``(1/eps)^n`` in this direction, so it is only reliable for moderate
    ``eps`` or when the solution cavitates strongly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson
from scipy.linalg import solveh_banded
from scipy.optimize import brentq

from . import energy as en
from .dynamics import Event, integrate, nu_hat_limit, radial_system
from .errors import (BracketError, ConfigError, NumericalError, StagnationError,
                     StepSizeError, StrainDomainError)
from .material import MaterialLaw

log = logging.getLogger(__name__)

_FAILURES = (StepSizeError, StrainDomainError, NumericalError, OverflowError, ZeroDivisionError)


@dataclass
class SolutionBundle:
    """Converged punctured-ball equilibrium plus diagnostics."""

    field: en.RadialField
    cavity: float
    slope_at_outer: float
    energy: en.EnergyReport
    that_profile: np.ndarray
    iterations: int
    residual: float
    lam: float
    eps: float
    method: str = "outward"
    status: str = "converged"

    @property
    def R(self):
        return self.field.R

    @property
    def r(self):
        return self.field.r

    def cauchy_profile(self, m):
        return m.cauchy_stress(self.field.node_slopes, self.field.v)

    def sup_distance(self, other):
        """Sup-distance to a callable profile ``other(R)`` over the mesh."""
        return float(np.max(np.abs(self.field.r - other(self.field.R))))

    def to_csv(self, path, m):
        import csv

        f = self.field
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["R", "r", "dr", "v", "That", "T", "jac"])
            rows = zip(f.R, f.r, f.node_slopes, f.v, self.that_profile,
                       self.cauchy_profile(m), f.jac)
            for row in rows:
                w.writerow([f"{x:.17g}" for x in row])

    def metadata(self):
        return {
            "lambda": self.lam,
            "eps": self.eps,
            "cavity": self.cavity,
            "energy": self.energy.modified,
            "iterations": self.iterations,
            "residual": self.residual,
            "method": self.method,
            "status": self.status,
        }

    def write_metadata(self, path):
        with open(path, "w") as fh:
            for key, val in self.metadata().items():
                fh.write(f"{key}={val!r}\n" if isinstance(val, float) else f"{key}={val}\n")


def _bundle(m, lam, eps, traj_values, slopes, R, iterations, residual, method, status="converged"):
    # keep integrated values; |r(1) - lam| is reported as the residual
    r = np.array(traj_values, dtype=float)
    fld = en.RadialField(R, r, n=m.n, slopes=slopes)
    return SolutionBundle(
        field=fld,
        cavity=float(r[0]),
        slope_at_outer=float(slopes[-1]),
        energy=en.energy_report(m, fld),
        that_profile=m.modified_stress(fld.node_slopes, fld.v),
        iterations=iterations,
        residual=float(residual),
        lam=float(lam),
        eps=float(eps),
        method=method,
        status=status,
    )


def affine_bundle(m, lam, eps, nodes=4096, status="affine"):
    R = en.graded_mesh(eps, nodes)
    return _bundle(m, lam, eps, lam * R, np.full_like(R, lam), R, 0, math.nan, "affine", status)


def _collapse_event(t, y):
    return y[1] - 1e-290 if y[0] > 0 else -1.0


def _scan(F, grid, start):
    """Walk the grid from ``start`` toward a sign change of ``F``."""
    vals = {}

    def val(i):
        if i not in vals:
            vals[i] = F(grid[i])
        return vals[i]

    i = start
    f0 = val(i)
    step = 1 if (not math.isfinite(f0) and f0 < 0) or f0 < 0 else -1
    if math.isnan(f0):
        step = -1
    while 0 <= i + step < len(grid):
        j = i + step
        fi, fj = val(i), val(j)
        if math.isfinite(fi) or math.isfinite(fj):
            if fi * fj < 0 or fi == 0 or fj == 0:
                lo, hi = (i, j) if i < j else (j, i)
                return grid[lo], grid[hi], len(vals)
        i = j
    # fall back to an exhaustive scan
    for i in range(len(grid) - 1):
        fi, fj = val(i), val(i + 1)
        if fi * fj <= 0 and not (math.isnan(fi) or math.isnan(fj)):
            return grid[i], grid[i + 1], len(vals)
    raise BracketError(f"no sign change on [{grid[0]:.3e}, {grid[-1]:.3e}] "
                       f"({len(vals)} shots: {sorted(vals.items())})")


def shoot_punctured(m: MaterialLaw, lam, eps, tol_bc=1e-9, *, nodes=4096, guess=None,
                    direction="outward", rtol=1e-10, atol=1e-30, scan_points=32):
    """Solve the punctured-ball problem by shooting.

    Parameters
    ----------
    m : MaterialLaw
    lam : float
        Prescribed outer radius ``r(1)``.
    eps : float
        Puncture radius, ``0 < eps < 1``.
    tol_bc : float
        Tolerance on the boundary residual being shot for
        (``r(1) - lam`` outward, ``T_hat(r(eps))`` inward).
    guess : float, optional
        Initial parameter (cavity ``r(eps)`` outward, slope ``r'(1)`` inward);
        the bracket scan starts from the nearest grid point.
    direction : {"outward", "inward"}
    rtol, atol : float
        Integrator tolerances. The slope ``r'`` drops to ~1e-8 near a small
        puncture, so the default ``atol`` makes the error control
        effectively relative.

    Returns
    -------
    SolutionBundle
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    R = en.graded_mesh(eps, nodes)
    s_nodes = np.log(R)
    s_eps = math.log(eps)
    rhs = radial_system(m)
    collapse = Event(_collapse_event, terminal=True, name="collapse")

    if direction == "outward":
        def run(c, tstops=()):
            nu0 = m.invert_nu_hat(0.0, c / eps)
            return integrate(rhs, [c, nu0], (s_eps, 0.0), rtol, atol,
                             events=[collapse], tstops=tstops)

        def F(c):
            try:
                tr = run(c)
            except _FAILURES as exc:
                log.debug("outward shot c=%g failed: %s", c, exc)
                return math.nan
            if tr.status == "event":
                return -math.inf
            return float(tr.y_final[0] - lam)

        grid = np.geomspace(1e-3 * eps * min(1.0, lam), lam, scan_points)
    elif direction == "inward":
        def run(p, tstops=()):
            return integrate(rhs, [lam, p], (0.0, s_eps), rtol, atol,
                             events=[collapse], tstops=tstops)

        def F(p):
            try:
                tr = run(p)
            except _FAILURES as exc:
                log.debug("inward shot p=%g failed: %s", p, exc)
                return -math.inf
            if tr.status == "event":
                return -math.inf
            r_e, nu_e = tr.y_final
            if r_e <= 0 or nu_e <= 0:
                return -math.inf
            return float(m.modified_stress(nu_e, r_e / eps))

        grid = np.geomspace(1e-6, lam, scan_points)
        if lam < m.bar_lambda():
            # the root lies above lam when the solution is concave
            grid = np.concatenate([grid, np.geomspace(lam, 4 * lam, scan_points)[1:]])
    else:
        raise ValueError(f"unknown direction {direction!r}")

    start = len(grid) - 1 if guess is None else int(np.argmin(np.abs(np.log(grid / guess))))
    a, b, nscan = _scan(F, grid, start)
    fa, fb = F(a), F(b)
    if fa == 0:
        root, nit = a, 0
    elif fb == 0:
        root, nit = b, 0
    else:
        # finite values are needed for brentq; -inf marks a collapsed shot
        def Fs(x):
            val = F(x)
            if math.isnan(val):
                raise NumericalError(f"{direction} shot failed at parameter {x!r}")
            return max(val, -1e300)

        root, info = brentq(Fs, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                            maxiter=200, full_output=True)
        nit = info.iterations
    resid = F(root)
    if not abs(resid) <= tol_bc:
        raise NumericalError(f"{direction} shooting residual {resid:.3e} exceeds "
                             f"tol_bc={tol_bc:.1e} at parameter {root!r}")
    tr = run(root, tstops=s_nodes[1:-1])
    vals = tr(s_nodes)
    bundle = _bundle(m, lam, eps, vals[:, 0], vals[:, 1], R, nscan + nit, abs(resid), direction)
    return bundle


def solve_punctured(m, lam, eps, tol_bc=1e-9, *, nodes=4096, predictor=True,
                    predictor_nodes=129, predictor_steps=50, fallback_affine=True, **kw):
    """Predictor/corrector pipeline: gradient flow for a guess, then shooting.

    If the outward bracket scan fails below the homogeneous threshold, the
    affine field is reported with ``status="affine-fallback"``.
    """
    guess = kw.pop("guess", None)
    if predictor and guess is None:
        Rp = en.graded_mesh(eps, predictor_nodes)
        # start from a cavitating trial field when cavitation is possible
        r0 = incompressible_profile(Rp, lam, m.n) if lam > m.bar_lambda() and lam > 1 else None
        try:
            pred = gradient_flow_minimize(m, lam, eps, Rp, steps=predictor_steps, r0=r0)
        except StagnationError as exc:
            pred = exc.field
        except NumericalError as exc:
            log.info("predictor failed (%s); scanning without a guess", exc)
            pred = None
        if pred is not None:
            if kw.get("direction", "outward") == "inward":
                guess = float(pred.node_slopes[-1])
            else:
                guess = max(pred.cavity, 1e-3 * eps * min(1.0, lam))
    try:
        return shoot_punctured(m, lam, eps, tol_bc, nodes=nodes, guess=guess, **kw)
    except BracketError:
        if fallback_affine and lam < m.bar_lambda():
            log.warning("no interior-condition solution for lam=%g eps=%g; "
                        "reporting the affine field", lam, eps)
            return affine_bundle(m, lam, eps, nodes, status="affine-fallback")
        raise


# --------------------------------------------------------------------------
# gradient flow
# --------------------------------------------------------------------------


def discrete_energy(m, R, r):
    """Discrete modified energy of nodal values ``r`` on mesh ``R``."""
    n, k = m.n, m.kappa
    w = (R[1:] ** n - R[:-1] ** n) / n
    dr = np.diff(r) / np.diff(R)
    vm = (r[1:] + r[:-1]) / (R[1:] + R[:-1])
    lam = r[-1]
    return float(np.dot(w, m.phi_hat(dr, vm)) - k * (n - 1) / n * lam**n * math.log(lam))


def discrete_gradient(m, R, r):
    """Gradient of :func:`discrete_energy` with respect to all nodal values."""
    n = m.n
    h = np.diff(R)
    w = (R[1:] ** n - R[:-1] ** n) / n
    dr = np.diff(r) / h
    S = R[1:] + R[:-1]
    vm = (r[1:] + r[:-1]) / S
    p1 = m.phi_hat_1(dr, vm)
    pv = (n - 1) * m.phi_hat_2(dr, vm)
    g = np.zeros_like(r)
    g[:-1] += w * (-p1 / h + pv / S)
    g[1:] += w * (p1 / h + pv / S)
    return g


def _banded(d00, d11, d01, N):
    diag = np.zeros(N)
    diag += d00[:N]
    diag[1:] += d11[: N - 1]
    ab = np.zeros((2, N))
    ab[0, 1:] = d01[: N - 1]
    ab[1] = diag
    return ab


def _metric_parts(m, R, r):
    """Discrete Hessian and ``H^1`` stiffness form on the free nodes (banded)."""
    n = m.n
    h = np.diff(R)
    S = R[1:] + R[:-1]
    w = (R[1:] ** n - R[:-1] ** n) / n
    dr = np.diff(r) / h
    vm = (r[1:] + r[:-1]) / S
    a, b, c = m.phi_hat_hessian(dr, vm)
    # chain rule through dr = (r1 - r0)/h, vm = (r0 + r1)/S
    p, q = 1 / h, 1 / S
    d00 = w * (a * p * p - 2 * b * p * q + c * q * q)
    d11 = w * (a * p * p + 2 * b * p * q + c * q * q)
    d01 = w * (-a * p * p + c * q * q)
    stiff = w * a * p * p
    N = len(r) - 1  # last node is fixed
    return _banded(d00, d11, d01, N), _banded(stiff, stiff, -stiff, N)


def _descent_direction(m, R, r, g):
    """Solve ``(H + mu K) d = -g`` with the smallest ``mu`` in a ladder that
    makes the matrix positive definite (``K`` is the ``H^1`` form)."""
    H, K = _metric_parts(m, R, r)
    scale = np.max(np.abs(K[1]))
    for mu in (0.0, 1e-8, 1e-6, 1e-4, 1e-2, 1e-1, 1.0):
        A = H + mu * K
        A[1] += 1e-14 * scale
        try:
            return -solveh_banded(A, g)
        except np.linalg.LinAlgError:
            continue
    return -solveh_banded(K + 1e-14 * scale * np.array([[0.0], [1.0]]), g)


def gradient_flow_minimize(m, lam, eps, mesh=None, steps=200, *, nodes=257, r0=None,
                           reduction=1e-8, history=None):
    """Discrete gradient flow for the punctured-ball modified energy.

    Steepest descent on the nodal values in a variable Sobolev metric (the
    discrete Hessian, shifted by the ``H^1`` form where it is indefinite;
    see :func:`_descent_direction`), with ``r[-1] = lam`` fixed,
    ``r[0] >= 0`` enforced by projection and a backtracking Armijo line
    search that rejects non-monotone iterates.

    Parameters
    ----------
    mesh : array, optional
        Nodes on ``[eps, 1]``; default is a graded mesh with ``nodes`` points.
    steps : int
        Maximum number of descent steps.
    r0 : array, optional
        Initial nodal values; default is the affine field ``lam * R``.
    reduction : float
        Stop once the metric gradient norm has dropped by this factor.
    history : list, optional
        Receives ``(energy, gradient_norm)`` for every iterate.

    Raises
    ------
    StagnationError
        If the line search fails 60 times in a row before the gradient norm
        dropped tenfold; the best iterate is attached to the exception.
    """
    R = en.graded_mesh(eps, nodes) if mesh is None else np.asarray(mesh, dtype=float)
    r = lam * R if r0 is None else np.array(r0, dtype=float)
    r[-1] = lam
    E = discrete_energy(m, R, r)
    g0norm = None
    gnorm = math.inf
    for it in range(steps + 1):
        g = discrete_gradient(m, R, r)[:-1]
        d = _descent_direction(m, R, r, g)
        gnorm = math.sqrt(max(-float(np.dot(g, d)), 0.0))
        if g0norm is None:
            g0norm = gnorm
        if history is not None:
            history.append((E, gnorm))
        if gnorm <= reduction * g0norm or gnorm == 0.0 or it == steps:
            break
        slope = float(np.dot(g, d))
        alpha = 1.0
        for _ in range(60):
            trial = r.copy()
            trial[:-1] += alpha * d
            trial[0] = max(trial[0], 0.0)
            if np.all(np.diff(trial) > 0):
                try:
                    Et = discrete_energy(m, R, trial)
                except (StrainDomainError, OverflowError, FloatingPointError):
                    Et = math.inf
                if Et <= E + 1e-4 * alpha * slope:
                    break
            alpha *= 0.5
        else:
            fld = en.RadialField(R, r, n=m.n)
            if gnorm <= 0.1 * g0norm:
                break
            raise StagnationError(
                f"line search failed after 60 halvings at iteration {it} "
                f"(gradient norm {gnorm:.3e} of initial {g0norm:.3e})", field=fld)
        r, E = trial, Et
    if gnorm > 0.1 * g0norm and g0norm > 0:
        raise StagnationError(
            f"gradient norm only reduced from {g0norm:.3e} to {gnorm:.3e} in {steps} steps",
            field=en.RadialField(R, r, n=m.n))
    return en.RadialField(R, r, n=m.n)


# --------------------------------------------------------------------------
# critical displacement
# --------------------------------------------------------------------------


@dataclass
class CriticalResult:
    """Critical boundary displacement and the reconstructed critical solution.

    ``omega, That, lnR`` sample the trajectory of the stress initial value
    problem together with ``ln R`` normalised so that the cavity of ``r_c``
    is close to 1.
    """

    lambda_c: float
    omega_star: float
    integral_check: float
    bar_lambda: float
    omega: np.ndarray = field(repr=False)
    That: np.ndarray = field(repr=False)
    lnR: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not self.lambda_c > 1:
            raise NumericalError(f"lambda_c = {self.lambda_c} is not > 1")

    def omega_at(self, R):
        return np.interp(np.log(R), self.lnR, self.omega)

    def profile(self, R):
        """Critical cavitating solution ``r_c(R) = R / omega(R)``."""
        R = np.asarray(R, dtype=float)
        Rc = np.clip(R, math.exp(self.lnR[0]), math.exp(self.lnR[-1]))
        return Rc / self.omega_at(Rc) + (R - Rc) * self.lambda_c

    def samples(self):
        """Nodes ``(R, r_c(R))`` with ``r_c`` strictly increasing.

        Close to the cavity ``r_c - r_c(0)`` shrinks like ``R^n`` and drops
        below the accuracy of the reconstruction; samples that do not
        increase on their predecessor are skipped.
        """
        R = np.exp(self.lnR)
        r = self.profile(R)
        keep = np.ones(len(r), dtype=bool)
        top = r[0]
        for i in range(1, len(r)):
            keep[i] = r[i] > top
            top = max(top, r[i])
        return R[keep], r[keep]

    def scale_for(self, lam):
        """``alpha`` with ``r_c(alpha)/alpha = lam``; needs ``lam > lambda_c``."""
        if lam <= self.lambda_c:
            raise ValueError(f"lam={lam} must exceed lambda_c={self.lambda_c}")
        return math.exp(np.interp(1.0 / lam, self.omega, self.lnR))

    def scaled_profile(self, lam):
        alpha = self.scale_for(lam)
        return lambda R: self.profile(alpha * np.asarray(R)) / alpha


def critical_lambda(m: MaterialLaw, rtol=1e-11, atol=1e-13, omega0=1e-6, euler_step=1e-8):
    """Critical displacement from the stress initial value problem.

    Integrates ``dT_hat/domega`` from ``(0, 0)`` until ``T_hat(omega)`` meets
    the homogeneous locus ``g(1/omega)``; then ``lambda_c = 1/omega*``.
    """
    lb = m.bar_lambda()
    if abs(lb - 1.0) > 1e-8:
        raise ConfigError(f"material is not stress free: homogeneous threshold {lb!r} != 1")
    n, k = m.n, m.kappa

    def nu(T, w):
        return nu_hat_limit(m, T, w)

    def dT(w, T):
        nh = nu(T, w)
        return (n - 1) * k * sum(w**j * nh ** (j + 1) for j in range(n - 1))

    def rhs(w, y):
        return [dT(w, y[0])]

    def meets_locus(w, y):
        return y[0] - m.homogeneous_stress(1.0 / w)

    # frozen-rhs Euler step off the omega = 0 singularity
    T1 = euler_step * dT(0.0, 0.0)
    tr = integrate(rhs, [T1], (euler_step, 1.0), rtol, atol,
                   events=[Event(meets_locus, terminal=True, direction=1, name="locus")])
    if tr.status != "event":
        raise ConfigError("T_hat never meets the homogeneous locus for omega in (0, 1]")
    w_star = float(tr.t_final)

    # reconstruct ln R(omega), anchored so that r_c(omega0) = R/omega = 1
    def rhs2(w, y):
        nh = nu(y[0], w)
        return [dT(w, y[0]), 1.0 / (w * (1.0 - w * nh))]

    T0 = float(tr(omega0)[0])
    w_end = w_star * (1.0 - 1e-7)
    tr2 = integrate(rhs2, [T0, math.log(omega0)], (omega0, w_end), rtol, atol)
    ws = np.unique(np.concatenate([
        tr2.t, omega0 + (w_end - omega0) * (1 - np.geomspace(1, 1e-7, 4000))[:-1]]))
    ys = tr2(ws)
    That, lnR = ys[:, 0], ys[:, 1]

    # independent check: g(lambda_c) against the integral of dT_hat/dR over R
    Rs = np.exp(lnR)
    rs = Rs / ws
    slopes = np.array([nu(T, w) for T, w in zip(That, ws)])
    integrand = (n - 1) * k * (slopes / rs) * (1.0 - (slopes * ws) ** (n - 1))
    integral = float(simpson(integrand * Rs, x=lnR)) + That[0]
    lam_c = 1.0 / w_star
    target = float(m.homogeneous_stress(lam_c))
    check = abs(integral - target) / abs(target)
    return CriticalResult(lam_c, w_star, check, lb, ws, That, lnR)


# --------------------------------------------------------------------------
# sweeps and the incompressible limit
# --------------------------------------------------------------------------


@dataclass
class SweepResult:
    lam: float
    bundles: list
    rows: list
    errors: dict


def eps_sweep(m, lam, eps_list, *, warm_start=True, **kw):
    """Solve a decreasing list of punctured problems and tabulate convergence.

    Each row holds ``eps, cavity, energy, sup_dist_affine, sup_dist_prev,
    sup_dist_final``; failed solves are recorded in ``errors`` and get NaN
    entries.
    """
    eps_list = [float(e) for e in eps_list]
    if not eps_list or any(not 0 < e < 1 for e in eps_list):
        raise ValueError("eps values must lie in (0, 1)")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    bundles, errors = [], {}
    guess = kw.pop("guess", None)
    for eps in eps_list:
        try:
            b = solve_punctured(m, lam, eps, guess=guess if warm_start else None, **kw)
        except Exception as exc:  # noqa: BLE001 - collected per solve
            errors[eps] = f"{type(exc).__name__}: {exc}"
            bundles.append(None)
            continue
        bundles.append(b)
        if warm_start:
            guess = b.cavity
    final = next((b for b in reversed(bundles) if b is not None), None)
    rows, prev = [], None
    for eps, b in zip(eps_list, bundles):
        if b is None:
            rows.append({"eps": eps, "cavity": math.nan, "energy": math.nan,
                         "sup_dist_affine": math.nan, "sup_dist_prev": math.nan,
                         "sup_dist_final": math.nan, "status": "failed"})
            continue
        row = {
            "eps": eps,
            "cavity": b.cavity,
            "energy": b.energy.modified,
            "sup_dist_affine": b.sup_distance(lambda R: lam * R),
            "sup_dist_prev": math.nan,
            "sup_dist_final": _common_sup(b, final),
            "status": b.status,
        }
        if prev is not None:
            row["sup_dist_prev"] = _common_sup(prev, b)
        rows.append(row)
        prev = b
    return SweepResult(lam, bundles, rows, errors)


def _common_sup(coarse, fine):
    """Sup-distance on the mesh of ``coarse`` (the larger puncture)."""
    R = coarse.field.R
    return float(np.max(np.abs(coarse.field.r - fine.field(R))))


def incompressible_profile(R, lam, n=3):
    """The only radial incompressible map with ``r(1) = lam``."""
    return (np.asarray(R, dtype=float) ** n + lam**n - 1.0) ** (1.0 / n)


def incompressible_energy(lam, n=3, kappa=3.0, D=1.5, eps=1e-8, nodes=4096):
    """Modified energy of the incompressible map under the limiting stored energy.

    Uses the cell quadrature of :func:`energy.modified_energy` on a graded
    mesh down to ``eps`` and subtracts the same ``lam^n ln lam`` constant.
    """
    if lam <= 1:
        raise ValueError("the incompressible map needs lam > 1")
    R = en.graded_mesh(eps, nodes)
    r = incompressible_profile(R, lam, n)
    w = (R[1:] ** n - R[:-1] ** n) / n
    vm = (r[1:] + r[:-1]) / (R[1:] + R[:-1])
    trans = vm ** (n - 1)
    density = kappa / n * trans ** (-n) + D + kappa * ((n - 1) / n + np.log(trans))
    return float(np.dot(w, density) - kappa * (n - 1) / n * lam**n * math.log(lam))


def incompressible_study(C_list, lam=1.05, eps=0.005, n=3, kappa=3.0, D=1.5, delta_exp=2.0,
                         **kw):
    """Solve the penalty-law punctured problems of the incompressible limit."""
    from .material import MaterialLaw as _ML, VolumetricLaw

    rows, bundles = [], []
    guess = None
    for C in C_list:
        mat = _ML(n, kappa, VolumetricLaw.penalty(C, delta_exp, D))
        try:
            b = solve_punctured(mat, lam, eps, predictor=False, guess=guess, **kw)
        except Exception as exc:  # noqa: BLE001 - reported per C
            rows.append({"C": C, "energy": math.nan, "cavity": math.nan,
                         "sup_dist_inc": math.nan, "status": f"failed: {exc}"})
            bundles.append(None)
            continue
        guess = b.cavity
        bundles.append(b)
        rows.append({"C": C, "energy": b.energy.modified, "cavity": b.cavity,
                     "sup_dist_inc": b.sup_distance(lambda R: incompressible_profile(R, lam, n)),
                     "status": b.status})
    return rows, bundles


# --------------------------------------------------------------------------
# invariants
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class InvariantCheck:
    name: str
    value: float
    limit: float
    passed: bool

    def line(self):
        return (f"{'PASS' if self.passed else 'FAIL'}  {self.name}: "
                f"{self.value:.3e} (limit {self.limit:.1e})")


def check_invariants(m, b: SolutionBundle, slack=1e-8):
    """Evaluate the bundle invariants; returns a list of :class:`InvariantCheck`.

    ``T_hat`` is checked for monotonicity in the direction set by the sign of
    ``lam - bar_lambda``: nondecreasing above the threshold, nonincreasing
    below it.
    """
    f = b.field
    out = []

    def add(name, value, limit):
        out.append(InvariantCheck(name, float(value), float(limit), bool(value <= limit)))

    add("flux-form equilibrium residual", b.energy.identity_residuals["equilibrium"], 1e-6)
    add("divergence identity / scale", b.energy.identity_residuals["divergence"]
        / en.divergence_identity_scale(m, f), 1e-4)
    dT = np.diff(b.that_profile)
    lb = m.bar_lambda()
    if b.lam >= lb:
        add("T_hat decrease (nondecreasing profile)", max(0.0, -dT.min()), slack)
    else:
        add("T_hat increase (nonincreasing profile)", max(0.0, dT.max()), slack)
    cavitating = b.cavity > 100 * b.eps
    if b.lam > lb and cavitating:
        add("max r' - r/R", max(0.0, float(np.max(f.node_slopes - f.v))), 0.0)
    if cavitating and b.eps <= 1e-3:
        add("|boundary formula - modified energy|",
            abs(b.energy.boundary_formula - b.energy.modified), 1e-2)
    return out
