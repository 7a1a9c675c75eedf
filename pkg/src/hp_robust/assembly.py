"""Galerkin discretisation: element systems, banded global assembly, solve.

DOFs are numbered element block by element block (left vertex, bubbles,
right vertex), so element ``j`` occupies a contiguous index range and the
half-bandwidth is at most max_j p_j.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack

from . import kernels
from .errors import SolverError
from .polybasis import element_tables, legendre_differentiate, legendre_series, quad_points, shape_to_legendre

PIVOT_TOL = 1e-14
RESIDUAL_TOL = 1e-10


def _element_parts(xl, xr, p, problem, nq=None):
    rule, N, dN = element_tables(p, nq or quad_points(p))
    x, wq = rule.mapped(xl, xr)
    h = xr - xl
    dvals = np.ascontiguousarray(problem.d(x), dtype=np.float64)
    A = kernels.element_matrix(N, dN, rule.weights, dvals, float(problem.epsilon), float(h))
    b = N @ (wq * problem.f(x))
    if np.any(dvals < 0):
        # diagonal of eps*stiffness + |d|*mass: size before cancellation
        absA = kernels.element_matrix(N, dN, rule.weights, np.abs(dvals), float(problem.epsilon), float(h))
        scale = np.diag(absA).copy()
    else:
        scale = np.diag(A).copy()
    return A, b, scale


def element_system(xl, xr, p, problem, nq=None):
    """Local matrix and load vector on (xl, xr) with degree ``p``.

    Rows/columns follow the shape function order: left hat, right hat,
    bubbles.
    """
    A, b, _ = _element_parts(xl, xr, p, problem, nq)
    return A, b


def dof_map(mesh):
    """Global index of every local shape function; -1 on Dirichlet vertices."""
    n = mesh.n_elements
    maps = []
    pos = 0
    left = -1
    for j, p in enumerate(mesh.degrees):
        bubbles = list(range(pos, pos + p - 1))
        pos += p - 1
        if j < n - 1:
            right = pos
            pos += 1
        else:
            right = -1
        maps.append(np.array([left, right] + bubbles, dtype=np.int64))
        left = right
    return maps


@dataclass
class GlobalSystem:
    """Banded system over the free DOFs.

    ``band`` is stored in LAPACK upper symmetric layout:
    ``band[kd + i - k, k] = A[i, k]`` for i <= k.  ``scale`` is the largest
    diagonal of eps*stiffness + |d|*mass, the reference for pivot size
    checks.
    """

    mesh: object
    band: np.ndarray
    rhs: np.ndarray
    dofs: list
    kd: int
    positive: bool
    scale: float
    local_matrices: list = field(repr=False, default_factory=list)

    @property
    def size(self):
        return self.rhs.size

    def dense(self):
        n, kd = self.size, self.kd
        A = np.zeros((n, n))
        for k in range(n):
            for i in range(max(0, k - kd), k + 1):
                A[i, k] = A[k, i] = self.band[kd + i - k, k]
        return A

    def matvec(self, x):
        n, kd = self.size, self.kd
        y = self.band[kd] * x
        for off in range(1, kd + 1):
            diag = self.band[kd - off, off:]
            y[: n - off] += diag * x[off:]
            y[off:] += diag * x[: n - off]
        return y


def _d_nonnegative(problem, mesh):
    x = np.linspace(*mesh.domain, 8 * mesh.n_elements + 1)
    for j in range(mesh.n_elements):
        rule, _, _ = element_tables(mesh.degrees[j], quad_points(mesh.degrees[j]))
        x = np.concatenate([x, rule.mapped(*mesh.element(j)[:2])[0]])
    return bool(np.all(np.asarray(problem.d(x)) >= 0))


def assemble(mesh, problem):
    maps = dof_map(mesh)
    n = mesh.n_dofs
    kd = max(int(mesh.max_degree), 1)
    band = np.zeros((kd + 1, max(n, 1)))
    rhs = np.zeros(n)
    diagscale = np.zeros(n)
    locs = [_element_parts(*mesh.element(j), problem) for j in range(mesh.n_elements)]
    for (A, b, diag), g in zip(locs, maps):
        free = np.nonzero(g >= 0)[0]
        gi = g[free]
        np.add.at(rhs, gi, b[free])
        I, K = np.meshgrid(gi, gi, indexing="ij")
        upper = I <= K
        Af = A[np.ix_(free, free)]
        np.add.at(band, (kd + I[upper] - K[upper], K[upper]), Af[upper])
        np.add.at(diagscale, gi, diag[free])
    return GlobalSystem(mesh, band, rhs, maps, kd, _d_nonnegative(problem, mesh),
                        float(diagscale.max()) if n else 0.0, [A for A, _, _ in locs])


def _general_band(system):
    """Full band (rows kd super, diagonal, kd sub) in LAPACK general layout."""
    n, kd = system.size, system.kd
    ab = np.zeros((2 * kd + 1, n))
    for off in range(kd + 1):
        diag = system.band[kd - off, off:]
        ab[kd - off, off:] = diag
        ab[kd + off, : n - off] = diag
    return ab


def _solve_banded(system):
    n, kd = system.size, system.kd
    full = _general_band(system)
    anorm = max(float(np.max(np.sum(np.abs(full), axis=0))), system.scale)
    if system.positive:
        c, info = lapack.dpbtrf(system.band, lower=0)
        if info == 0 and np.min(c[kd] ** 2) >= PIVOT_TOL * anorm:
            x, info = lapack.dpbtrs(c, system.rhs, lower=0)
            if info == 0:
                return x
    # LU with partial pivoting; dgbtrf needs kd extra rows for fill-in.
    ab = np.vstack([np.zeros((kd, n)), full])
    lu, piv, info = lapack.dgbtrf(ab, kd, kd)
    if info != 0 or np.min(np.abs(lu[2 * kd])) < PIVOT_TOL * anorm:
        raise SolverError("singular or near-singular system", condition=np.linalg.cond(system.dense()))
    x, info = lapack.dgbtrs(lu, kd, kd, system.rhs, piv)
    if info != 0:
        raise SolverError(f"banded back-substitution failed (info={info})")
    return x


class HpSolution:
    """Piecewise polynomial u_hp with one Legendre coefficient vector per element."""

    def __init__(self, mesh, element_coeffs, dof_values=None):
        self.mesh = mesh
        self.element_coeffs = [np.asarray(c, dtype=np.float64) for c in element_coeffs]
        self.dof_values = dof_values

    def element_values(self, j, xi, derivative=0):
        """d^k u_hp/dx^k on element ``j`` at reference points ``xi``."""
        c = self.derivative_coeffs(j, derivative)
        return legendre_series(c, xi)

    def derivative_coeffs(self, j, order):
        """Legendre coefficients (reference variable) of d^order u_hp/dx^order on element j."""
        c = self.element_coeffs[j]
        scale = 2.0 / (self.mesh.breakpoints[j + 1] - self.mesh.breakpoints[j])
        for _ in range(order):
            c = legendre_differentiate(c) * scale
        return c

    def __call__(self, x, derivative=0):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        bp = self.mesh.breakpoints
        idx = np.clip(np.searchsorted(bp, x, side="right") - 1, 0, self.mesh.n_elements - 1)
        out = np.empty_like(x)
        for j in np.unique(idx):
            sel = idx == j
            xl, xr = bp[j], bp[j + 1]
            xi = np.clip((2 * x[sel] - xl - xr) / (xr - xl), -1.0, 1.0)
            out[sel] = self.element_values(j, xi, derivative)
        return out


def to_solution(mesh, maps, x):
    coeffs = []
    for j, g in enumerate(maps):
        local = np.where(g >= 0, x[np.maximum(g, 0)], 0.0) if x.size else np.zeros(g.size)
        coeffs.append(shape_to_legendre(int(mesh.degrees[j])) @ local)
    return HpSolution(mesh, coeffs, x)


def solve_system(system):
    """Direct banded solve, then conversion to element Legendre coefficients."""
    if system.size == 0:
        return to_solution(system.mesh, system.dofs, np.zeros(0))
    bnorm = np.linalg.norm(system.rhs)
    if bnorm == 0.0:
        return to_solution(system.mesh, system.dofs, np.zeros(system.size))
    x = _solve_banded(system)
    res = np.linalg.norm(system.matvec(x) - system.rhs) / bnorm
    if not res <= RESIDUAL_TOL:
        raise SolverError(f"relative residual {res:.3e} exceeds {RESIDUAL_TOL}",
                          condition=np.linalg.cond(system.dense()))
    return to_solution(system.mesh, system.dofs, x)


def solve(mesh, problem):
    return solve_system(assemble(mesh, problem))
