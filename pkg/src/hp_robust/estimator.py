"""Residual a posteriori error indicators and efficiency diagnostics.

For element K_j the indicator is

    eta_j^2 = alpha_j (||Pi f + eps u'' - d u||^2 + ||f - Pi f||^2)
              + eps^2/2 (gamma_{j-1} [u']_{j-1}^2 + gamma_j [u']_j^2)

with the weights alpha, beta, gamma built from h, p, eps and sup|1/d| on
the element patch.  The unknown reliability constant is not included.
"""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .errors import InvalidInput, MissingExactSolution, check
from .mesh import patch_interval
from .polybasis import gauss_legendre, legendre_series, legendre_table, quad_points
from .problem import inv_d_sup

GAMMA_RTOL = 1e-14
# denominators below this fraction of the discrete energy are roundoff
ROUNDOFF_FLOOR = 1e-26


@dataclass(frozen=True)
class ElementIndicator:
    eta_sq: float
    alpha: float
    beta: float
    gamma_left: float
    gamma_right: float
    residual_part: float
    oscillation_part: float
    jump_left: float
    jump_right: float


@dataclass
class ErrorEstimate:
    indicators: list
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    jumps: np.ndarray

    @property
    def eta_sq(self):
        return np.array([ind.eta_sq for ind in self.indicators])

    @property
    def total(self):
        return global_estimate(self.indicators)


def compute_alpha(mesh, problem, j):
    xl, xr, p = mesh.element(j)
    a_h = (xr - xl) ** 2 / (problem.epsilon * p * p)
    l, r = patch_interval(mesh, j)
    pmax = max(int(mesh.degrees[i]) for i in range(max(j - 1, 0), min(j + 2, mesh.n_elements)))
    bound = inv_d_sup(problem, l, r, pmax)
    return min(a_h, bound) if math.isfinite(bound) else a_h


def compute_beta(alpha, h, epsilon):
    beta = alpha / h + 2.0 * math.sqrt(alpha / epsilon)
    root = math.sqrt(alpha / epsilon)
    check("beta_window", 2 * root <= beta * (1 + GAMMA_RTOL) and beta <= 3 * root * (1 + GAMMA_RTOL),
          f"beta={beta} outside [2, 3] * sqrt(alpha/eps)={root}")
    return beta


def compute_gamma(betas):
    """gamma_0..gamma_N, harmonic-type means of neighbouring betas."""
    betas = np.asarray(betas, dtype=float)
    n = betas.size
    if n < 1:
        raise InvalidInput("need at least one element")
    gamma = np.zeros(n + 1)
    for j in range(1, n):
        b0, b1 = betas[j - 1], betas[j]
        s = b0 + b1
        g = b0 * b1 / s if s > 0 else 0.0
        lo = min(b0, b1)
        check("gamma_window", 0.5 * lo * (1 - GAMMA_RTOL) <= g <= lo * (1 + GAMMA_RTOL),
              f"gamma={g} outside [min/2, min] for betas ({b0}, {b1})")
        gamma[j] = g
    return gamma


def l2_project(f, xl, xr, p, nq=None):
    """Legendre coefficients (reference variable) of the L2 projection of f."""
    rule = gauss_legendre(nq or quad_points(p))
    x = 0.5 * (xl + xr) + 0.5 * (xr - xl) * rule.nodes
    P = legendre_table(p, rule.nodes)
    k = np.arange(p + 1)
    return (2 * k + 1) / 2.0 * (P @ (rule.weights * np.asarray(f(x), dtype=float)))


def flux_jump(solution, i):
    """u_hp'(x_i^+) - u_hp'(x_i^-) at interior node ``i`` (1 <= i <= N-1)."""
    n = solution.mesh.n_elements
    if not 1 <= i <= n - 1:
        raise IndexError(f"node {i} is not interior (N={n})")
    right = solution.element_values(i, np.array([-1.0]), derivative=1)[0]
    left = solution.element_values(i - 1, np.array([1.0]), derivative=1)[0]
    return right - left


def _element_quadrature(solution, j, nq):
    xl, xr, p = solution.mesh.element(j)
    rule = gauss_legendre(nq)
    x, w = rule.mapped(xl, xr)
    return rule, x, w


def element_indicator(solution, problem, j, alpha, beta, gamma, jumps, nq=None):
    """Indicator of element ``j`` given precomputed weights and flux jumps.

    ``gamma`` and ``jumps`` are indexed by node (length N+1, zero at the ends).
    """
    xl, xr, p = solution.mesh.element(j)
    rule, x, w = _element_quadrature(solution, j, nq or quad_points(p))
    pif = legendre_series(l2_project(problem.f, xl, xr, p, len(rule)), rule.nodes)
    u = solution.element_values(j, rule.nodes)
    upp = legendre_series(solution.derivative_coeffs(j, 2), rule.nodes)
    fx = np.asarray(problem.f(x), dtype=float)
    res = pif + problem.epsilon * upp - np.asarray(problem.d(x), dtype=float) * u
    residual_part = alpha * float(np.dot(w, res * res))
    oscillation_part = alpha * float(np.dot(w, (fx - pif) ** 2))
    eps2 = problem.epsilon ** 2
    jl = eps2 * gamma[j] * jumps[j] ** 2
    jr = eps2 * gamma[j + 1] * jumps[j + 1] ** 2
    eta_sq = residual_part + oscillation_part + 0.5 * jl + 0.5 * jr
    return ElementIndicator(eta_sq, alpha, beta, float(gamma[j]), float(gamma[j + 1]),
                            residual_part, oscillation_part, jl, jr)


def estimate(solution, problem, nq_extra=0):
    """All element indicators for ``solution``.

    ``nq_extra`` adds quadrature points beyond the default p + 10.
    """
    mesh = solution.mesh
    n = mesh.n_elements
    h = mesh.h
    alpha = np.array([compute_alpha(mesh, problem, j) for j in range(n)])
    beta = np.array([compute_beta(alpha[j], h[j], problem.epsilon) for j in range(n)])
    gamma = compute_gamma(beta)
    jumps = np.zeros(n + 1)
    for i in range(1, n):
        jumps[i] = flux_jump(solution, i)
    inds = [
        element_indicator(solution, problem, j, alpha[j], beta[j], gamma, jumps,
                          quad_points(int(mesh.degrees[j])) + nq_extra)
        for j in range(n)
    ]
    return ErrorEstimate(inds, alpha, beta, gamma, jumps)


def global_estimate(indicators):
    return math.sqrt(sum(ind.eta_sq for ind in indicators))


def scaled_distance(x, xl, xr):
    """Distance to the nearer endpoint divided by the element length."""
    return np.minimum(np.abs(x - xl), np.abs(x - xr)) / (xr - xl)


def _projection_degree(p, osc_degree):
    if osc_degree == "p":
        return p
    if osc_degree == "2p":
        return 2 * p
    raise InvalidInput(f"osc_degree must be 'p' or '2p', got {osc_degree!r}")


@lru_cache(maxsize=None)
def _half_jacobi(n, beta_exp):
    """Gauss-Jacobi rules on the two element halves for the weight Phi^beta.

    On each half Phi is linear and vanishes at the outer end, so Phi^beta is a
    Jacobi weight and polynomial data are integrated exactly. Returned nodes
    live on the reference element; weights already include Phi^beta.
    """
    t, wl = roots_jacobi(n, 0.0, beta_exp)  # weight (1 + t)^beta
    scale = 0.25 * 4.0 ** -beta_exp  # dx = h/4 dt, Phi = (1 + t)/4 on the left half
    left = 0.5 * (t - 1.0)
    nodes = np.concatenate([left, -left[::-1]])
    weights = np.concatenate([wl, wl[::-1]]) * scale
    return nodes, weights


def oscillation_R(solution, problem, i, beta_exp=1.0, osc_degree="p", nq=None):
    """Phi-weighted data oscillation of element ``i``."""
    if not 0.5 < beta_exp <= 1.0:
        raise InvalidInput(f"beta exponent must lie in (1/2, 1], got {beta_exp}")
    xl, xr, p = solution.mesh.element(i)
    q = _projection_degree(p, osc_degree)
    nq = nq or quad_points(q)
    h = xr - xl

    def du(t):
        xi = (2 * np.asarray(t) - xl - xr) / h
        return np.asarray(problem.d(t), dtype=float) * solution.element_values(i, xi)

    def to_x(xi):
        return 0.5 * (xl + xr) + 0.5 * h * xi

    cf = l2_project(problem.f, xl, xr, q, nq)
    cd = l2_project(du, xl, xr, q, nq)

    def osc(xi):
        x = to_x(xi)
        f_osc = np.asarray(problem.f(x), dtype=float) - legendre_series(cf, xi)
        return f_osc, du(x) - legendre_series(cd, xi)

    rule = gauss_legendre(nq)
    w = 0.5 * h * rule.weights
    f_osc, du_osc = osc(rule.nodes)
    plain = math.sqrt(np.dot(w, f_osc ** 2)) + math.sqrt(np.dot(w, du_osc ** 2))
    nodes, wj = _half_jacobi(nq, float(beta_exp))
    f_osc, du_osc = osc(nodes)
    wj = h * wj
    weighted = math.sqrt(np.dot(wj, f_osc ** 2)) + math.sqrt(np.dot(wj, du_osc ** 2))
    return p ** beta_exp * weighted + plain


@dataclass
class EfficiencyDiagnostics:
    """Lower-bound ratios; NaN marks entries with zero denominator."""

    R: np.ndarray
    rho_vol: np.ndarray
    rho_jump: np.ndarray
    beta_exponent: float

    def max_finite(self):
        vals = np.concatenate([self.rho_vol, self.rho_jump[1:-1]])
        vals = vals[np.isfinite(vals)]
        return float(vals.max()) if vals.size else 0.0


def _discrete_energy_sq(solution, problem):
    """eps |u'|^2 + |d| u^2 integrated over the mesh."""
    total = 0.0
    for i in range(solution.mesh.n_elements):
        p = solution.mesh.degrees[i]
        rule, x, w = _element_quadrature(solution, i, quad_points(p))
        u = solution.element_values(i, rule.nodes)
        du = solution.element_values(i, rule.nodes, derivative=1)
        total += np.dot(w, problem.epsilon * du ** 2 + np.abs(problem.d(x)) * u ** 2)
    return float(total)


def efficiency_diagnostics(solution, problem, beta_exp=1.0, osc_degree="p", est=None):
    """Volume and jump lower-bound ratios against the true local error.

    The jump ratio uses the flux jump [u_hp'] at the node.
    """
    from .analysis import energy_norm_error

    if not problem.has_exact:
        raise MissingExactSolution("efficiency diagnostics need the exact solution")
    mesh = solution.mesh
    n = mesh.n_elements
    est = est or estimate(solution, problem)
    err = energy_norm_error(solution, problem).per_element
    R = np.array([oscillation_R(solution, problem, i, beta_exp, osc_degree) for i in range(n)])
    p = mesh.degrees.astype(float)
    floor = ROUNDOFF_FLOOR * _discrete_energy_sq(solution, problem)
    rho_vol = np.full(n, np.nan)
    for i in range(n):
        xl, xr, pi_ = mesh.element(i)
        rule, x, w = _element_quadrature(solution, i, quad_points(pi_))
        u = solution.element_values(i, rule.nodes)
        upp = legendre_series(solution.derivative_coeffs(i, 2), rule.nodes)
        r = np.asarray(problem.f(x), float) + problem.epsilon * upp - np.asarray(problem.d(x), float) * u
        num = est.alpha[i] * np.dot(w, r * r)
        den = p[i] ** 2 * err[i] + est.alpha[i] * R[i] ** 2
        if den > floor:
            rho_vol[i] = num / den
    rho_jump = np.full(n + 1, np.nan)
    eps2 = problem.epsilon ** 2
    for i in range(1, n):
        num = est.gamma[i] * eps2 * est.jumps[i] ** 2
        den = p[i - 1] ** 2 * (err[i - 1] + err[i]) + est.alpha[i - 1] * R[i - 1] ** 2 + est.alpha[i] * R[i] ** 2
        if den > floor:
            rho_jump[i] = num / den
    return EfficiencyDiagnostics(R, rho_vol, rho_jump, beta_exp)
