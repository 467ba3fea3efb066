"""Radial fields on meshes, energy quadrature and energy identities.

Quadrature is cell based: the radial stretch ``r'`` is the node difference
quotient of each cell, the circumferential stretch ``r/R`` is taken at the
cell midpoint and the weight ``R^(n-1)`` is integrated exactly over the cell.
Affine fields are therefore integrated exactly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, StrainDomainError

CSV_FIELDS = ("R", "r", "dr", "v", "jac")


def graded_mesh(eps, nodes=4096):
    """Geometric mesh on ``[eps, 1]``, refined toward ``eps``.

    The grading ratio is ``(1/eps)**(1/(nodes-1))``; ``nodes`` is raised if
    needed so that the first cell is no wider than ``eps/10``.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    nodes = int(nodes)
    if nodes < 5:
        raise ValueError("need at least 5 nodes")
    while math.expm1(-math.log(eps) / (nodes - 1)) > 0.1:
        nodes *= 2
    R = np.exp(np.linspace(math.log(eps), 0.0, nodes))
    R[0], R[-1] = eps, 1.0
    return R


def fd_weights(x):
    """First-derivative weights on 5-point stencils (exact for quartics).

    Returns ``(idx, w)`` with ``idx[i]`` the stencil indices for node ``i`` and
    ``w[i]`` the matching weights; stencils are centred except within two
    nodes of either end.
    """
    x = np.asarray(x, dtype=float)
    N = len(x)
    if N < 5:
        raise ValueError("need at least 5 nodes for 5-point differences")
    start = np.clip(np.arange(N) - 2, 0, N - 5)
    idx = start[:, None] + np.arange(5)[None, :]
    h = np.maximum(np.abs(x[idx] - x[:, None]).max(axis=1), 1e-300)
    z = (x[idx] - x[:, None]) / h[:, None]
    A = z[:, None, :] ** np.arange(5)[None, :, None]
    b = np.zeros((N, 5))
    b[:, 1] = 1.0
    w = np.linalg.solve(A, b[..., None])[..., 0] / h[:, None]
    return idx, w


def fd_derivative(x, y):
    idx, w = fd_weights(x)
    return np.sum(w * np.asarray(y)[idx], axis=1)


@dataclass(frozen=True, eq=False)
class RadialField:
    """Strictly increasing radial profile ``r(R)`` sampled on ``[eps, 1]``.

    Parameters
    ----------
    R : array
        Mesh nodes, strictly increasing, ``R[0] = eps > 0``, ``R[-1] = 1``.
    r : array
        Nodal values, strictly increasing with ``r[0] >= 0``.
    n : int
        Space dimension.
    slopes : array, optional
        Exact nodal derivatives ``r'(R_i)`` (e.g. from an ODE solve). When
        missing they are recovered by 5-point differences.
    """

    R: np.ndarray
    r: np.ndarray
    n: int = 3
    slopes: np.ndarray | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        R = np.array(self.R, dtype=float)
        r = np.array(self.r, dtype=float)
        if R.ndim != 1 or R.shape != r.shape or len(R) < 2:
            raise ValueError("R and r must be 1-D arrays of equal length >= 2")
        if not R[0] > 0:
            raise StrainDomainError(f"mesh must start at eps > 0, got {R[0]}")
        if np.any(np.diff(R) <= 0):
            raise ValueError("mesh must be strictly increasing")
        if not np.all(np.isfinite(r)) or r[0] < 0:
            raise StrainDomainError("r must be finite with r[0] >= 0")
        dr = np.diff(r)
        if np.any(dr <= 0):
            i = int(np.flatnonzero(dr <= 0)[0])
            raise StrainDomainError(f"r is not strictly increasing at node {i}")
        R.flags.writeable = False
        r.flags.writeable = False
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "r", r)
        if self.slopes is not None:
            s = np.array(self.slopes, dtype=float)
            if s.shape != R.shape:
                raise ValueError("slopes must match the mesh")
            s.flags.writeable = False
            object.__setattr__(self, "slopes", s)

    @classmethod
    def affine(cls, lam, R, n=3):
        R = np.asarray(R, dtype=float)
        return cls(R, lam * R, n=n, slopes=np.full_like(R, lam))

    @property
    def lam(self):
        return float(self.r[-1])

    @property
    def eps(self):
        return float(self.R[0])

    @property
    def cavity(self):
        return float(self.r[0])

    @property
    def v(self):
        return self.r / self.R

    @property
    def node_slopes(self):
        if self.slopes is not None:
            return self.slopes
        if "slopes" not in self._cache:
            self._cache["slopes"] = fd_derivative(self.R, self.r)
        return self._cache["slopes"]

    @property
    def jac(self):
        """Nodal Jacobian determinant ``r' (r/R)^(n-1)``."""
        return self.node_slopes * self.v ** (self.n - 1)

    def cells(self):
        """Cell quadrature data ``(weights, r', r/R)``."""
        R, r, n = self.R, self.r, self.n
        w = (R[1:] ** n - R[:-1] ** n) / n
        dr = np.diff(r) / np.diff(R)
        vm = (r[1:] + r[:-1]) / (R[1:] + R[:-1])
        return w, dr, vm

    def __call__(self, Rq):
        """Piecewise cubic Hermite interpolant through the nodes."""
        from scipy.interpolate import CubicHermiteSpline

        if "spline" not in self._cache:
            self._cache["spline"] = CubicHermiteSpline(self.R, self.r, self.node_slopes)
        return self._cache["spline"](Rq)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_FIELDS)
            for row in zip(self.R, self.r, self.node_slopes, self.v, self.jac):
                w.writerow([f"{x:.17g}" for x in row])

    @classmethod
    def from_csv(cls, path, n=3):
        """Load any CSV with ``R`` and ``r`` columns (``dr`` is used as nodal slopes)."""
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows or "R" not in rows[0] or "r" not in rows[0]:
            raise ValueError(f"{path}: expected columns R and r")
        R = [float(row["R"]) for row in rows]
        r = [float(row["r"]) for row in rows]
        slopes = [float(row["dr"]) for row in rows] if "dr" in rows[0] else None
        return cls(np.array(R), np.array(r), n=n, slopes=slopes)


def _checked(values, what):
    bad = ~np.isfinite(values)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise NumericalError(f"non-finite {what} integrand in cell {i} (nodes {i}, {i + 1})")
    return values


def _integrand(fn, f, what):
    w, dr, vm = f.cells()
    try:
        vals = fn(dr, vm)
    except StrainDomainError as exc:
        for i in range(len(w)):
            try:
                fn(float(dr[i]), float(vm[i]))
            except StrainDomainError:
                break
        raise NumericalError(f"{what} undefined in cell {i} (nodes {i}, {i + 1}): {exc}") from exc
    return w, _checked(np.asarray(vals, dtype=float), what)


def modified_energy(m, f):
    """Modified energy of ``f`` over ``[eps, 1]`` (the punctured-ball functional)."""
    w, vals = _integrand(m.phi_hat, f, "modified energy")
    n, k, lam = m.n, m.kappa, f.lam
    return float(np.dot(w, vals) - k * (n - 1) / n * lam**n * math.log(lam))


def original_energy_annulus(m, f):
    """Original (unmodified) energy of ``f`` over ``[eps, 1]``."""
    w, vals = _integrand(m.phi, f, "original energy")
    return float(np.dot(w, vals))


def boundary_energy_formula(m, f, cavity=None):
    """Modified energy from the boundary-term expression for equilibria.

    The limit at the cavity is evaluated at ``R = eps`` and the cavity radius
    ``r(0)`` is approximated by ``r(eps)`` unless given.
    """
    n, k = m.n, m.kappa
    lam, eps = f.lam, f.eps
    s = f.node_slopes
    p1, c = s[-1], f.cavity if cavity is None else cavity
    outer = (m.phi(p1, lam) - p1 * m.phi_1(p1, lam) + lam**n * m.cauchy_stress(p1, lam)) / n
    r_eps = f.cavity
    v_eps = r_eps / eps
    limit = (m.cauchy_stress(s[0], v_eps) + k * (n - 1) * math.log(v_eps)) * r_eps**n / n
    return float(outer - k * (n - 1) / n**2 * c**n - limit)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(5)


def _gauss_cells(f):
    """Gauss points of the piecewise-linear interpolant: (R, r, r', weight)."""
    R, r = f.R, f.r
    a, b = R[:-1], R[1:]
    half = 0.5 * (b - a)
    Rq = 0.5 * (a + b)[:, None] + half[:, None] * _GL_X[None, :]
    s = (np.diff(r) / np.diff(R))[:, None]
    rq = r[:-1, None] + s * (Rq - a[:, None])
    wq = half[:, None] * _GL_W[None, :]
    return Rq, rq, np.broadcast_to(s, Rq.shape), wq


def identity_bddbe_residual(m, f):
    """Residual of the change-of-variables identity behind the lower bound.

    ``int R^(n-1) jac ln(r/R) dR = int_{r(eps)}^{lam} u^(n-1) ln u du
    - int R^(n-1) jac ln R dR``, evaluated on the piecewise-linear interpolant.
    """
    n = m.n
    Rq, rq, sq, wq = _gauss_cells(f)
    jac = sq * (rq / Rq) ** (n - 1)
    lhs = np.sum(wq * Rq ** (n - 1) * jac * np.log(rq / Rq))
    log_term = np.sum(wq * Rq ** (n - 1) * jac * np.log(Rq))

    def prim(u):
        return 0.0 if u == 0 else u**n * math.log(u) / n - u**n / n**2

    middle = prim(f.lam) - prim(f.cavity)
    return float(abs(lhs - middle + log_term))


def _nodal(m, f):
    nu = f.node_slopes
    v = f.v
    return nu, v


def divergence_residual_nodal(m, R, r, nu, interior=2):
    """Nodal residual of the radial divergence identity from raw arrays.

    ``R^(n-1) Phi - d/dR[(R^n/n)(Phi - r' Phi_1) + (r^n/n) T]`` with the
    derivative taken by 5-point differences and ``nu`` the nodal slopes.
    No monotonicity of ``r`` is required, only ``nu, r/R > 0``.
    Returns the sup over nodes, skipping ``interior`` nodes at each end.
    """
    n = m.n
    R, r, nu = (np.asarray(x, dtype=float) for x in (R, r, nu))
    v = r / R
    Phi = m.phi(nu, v)
    G = R**n / n * (Phi - nu * m.phi_1(nu, v)) + r**n / n * m.cauchy_stress(nu, v)
    res = np.abs(R ** (n - 1) * Phi - fd_derivative(R, G))
    return float(res[interior:len(R) - interior].max())


def identity_divergence_residual(m, f, interior=2):
    """Sup over interior nodes of the divergence identity residual of ``f``."""
    return divergence_residual_nodal(m, f.R, f.r, f.node_slopes, interior)


def divergence_identity_scale(m, f):
    nu, v = _nodal(m, f)
    return float(np.max(np.abs(f.R ** (m.n - 1) * m.phi(nu, v))))


def equilibrium_residual(m, f, interior=2):
    """Sup of ``|d/dR[R^(n-1) Phi_1] - (n-1) R^(n-2) Phi_2|`` over interior nodes."""
    n = m.n
    R = f.R
    nu, v = _nodal(m, f)
    flux = R ** (n - 1) * m.phi_1(nu, v)
    res = np.abs(fd_derivative(R, flux) - (n - 1) * R ** (n - 2) * m.phi_2(nu, v))
    return float(res[interior:len(R) - interior].max())


@dataclass(frozen=True)
class EnergyReport:
    modified: float
    original_annulus: float
    boundary_formula: float
    identity_residuals: dict

    def __post_init__(self):
        vals = [self.modified, self.original_annulus, self.boundary_formula,
                *self.identity_residuals.values()]
        if not all(math.isfinite(x) for x in vals):
            raise NumericalError(f"non-finite entry in energy report {self}")


def energy_report(m, f):
    return EnergyReport(
        modified=modified_energy(m, f),
        original_annulus=original_energy_annulus(m, f),
        boundary_formula=boundary_energy_formula(m, f),
        identity_residuals={
            "bddbe": identity_bddbe_residual(m, f),
            "divergence": identity_divergence_residual(m, f),
            "equilibrium": equilibrium_residual(m, f),
        },
    )
