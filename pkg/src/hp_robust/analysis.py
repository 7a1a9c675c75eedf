"""True-error measurement, efficiency indices and convergence fits."""
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, MissingExactSolution
from .polybasis import gauss_legendre

AGREE_RTOL = 1e-4
MAX_LEVELS = 12
EXTRA_POINTS = 20


@dataclass
class ErrorReport:
    energy_error: float
    per_element: np.ndarray
    converged: np.ndarray
    estimate: float = math.nan

    @property
    def efficiency(self):
        return efficiency_index(self.estimate, self.energy_error)


def _composite(fun, xl, xr, rule, level):
    m = 2 ** level
    edges = np.linspace(xl, xr, m + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    x = (edges[:-1] + half)[:, None] + half[:, None] * rule.nodes[None, :]
    return float(np.sum(half[:, None] * rule.weights[None, :] * fun(x.ravel()).reshape(x.shape)))


def _element_error_sq(solution, problem, j, rtol=AGREE_RTOL, max_levels=MAX_LEVELS, extra_levels=0):
    xl, xr, p = solution.mesh.element(j)
    rule = gauss_legendre(p + EXTRA_POINTS)
    eps = problem.epsilon

    def integrand(x):
        xi = np.clip((2 * x - xl - xr) / (xr - xl), -1.0, 1.0)
        e = problem.exact(x) - solution.element_values(j, xi)
        de = problem.exact_derivative(x) - solution.element_values(j, xi, derivative=1)
        return eps * de * de + np.abs(np.asarray(problem.d(x), dtype=float)) * e * e

    prev = _composite(integrand, xl, xr, rule, 0)
    for level in range(1, max_levels + 1):
        cur = _composite(integrand, xl, xr, rule, level)
        if abs(cur - prev) <= rtol * abs(cur) or cur == prev:
            for extra in range(1, extra_levels + 1):
                cur = _composite(integrand, xl, xr, rule, level + extra)
            return cur, True
        prev = cur
    return cur, False


def energy_norm_error(solution, problem, extra_levels=0):
    """Elementwise eps||e'||^2 + || sqrt|d| e ||^2 and the total norm.

    Each element is integrated with composite Gauss rules of p + 20 points,
    halving the subintervals until two successive levels agree.
    """
    if not problem.has_exact:
        raise MissingExactSolution(f"problem {problem.name!r} has no exact solution")
    parts = [_element_error_sq(solution, problem, j, extra_levels=extra_levels)
             for j in range(solution.mesh.n_elements)]
    per = np.array([max(v, 0.0) for v, _ in parts])
    conv = np.array([c for _, c in parts])
    return ErrorReport(math.sqrt(per.sum()), per, conv)


def efficiency_index(estimate, true_error):
    """estimate / true_error; NaN when the true error is numerically zero."""
    if not true_error > 1e-14:
        return math.nan
    return estimate / true_error


@dataclass(frozen=True)
class ExponentialFit:
    slope: float
    intercept: float
    r_squared: float
    n_points: int


def fit_exponential(iterations, values):
    """Least-squares line through (iteration, ln value)."""
    it = np.asarray(iterations, dtype=float)
    v = np.asarray(values, dtype=float)
    ok = np.isfinite(v) & (v > 0)
    it, y = it[ok], np.log(v[ok])
    if it.size < 3:
        raise InvalidInput("need at least 3 positive values for a fit")
    slope, intercept = np.polyfit(it, y, 1)
    ss_res = float(np.sum((y - (slope * it + intercept)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return ExponentialFit(float(slope), float(intercept), r2, int(it.size))


def fit_trace(trace, window, field="eta_total"):
    rows = trace.rows[-window:]
    return fit_exponential([r.iteration for r in rows], [getattr(r, field) for r in rows])


def check_trace_inequality(w, h):
    """max(|w(0)|, |w(h)|)^2 <= ||w||^2/h + 2||w|| ||w'|| on (0, h).

    ``w`` is a :class:`numpy.polynomial.Polynomial` in the variable x on
    (0, h).  Norms are computed by Gauss rules exact for the degree.
    """
    if not h > 0:
        raise InvalidInput("h must be positive")
    # Work in t = x/h on (0, 1) to keep the integrals well scaled.
    c = np.asarray(w.coef, dtype=float) * h ** np.arange(w.coef.size)
    q = np.polynomial.Polynomial(c)
    dq = q.deriv()
    rule = gauss_legendre(q.degree() + 1)
    t = 0.5 * (rule.nodes + 1.0)
    wt = 0.5 * rule.weights
    qq = float(np.dot(wt, q(t) ** 2))          # ||w||^2 / h
    dd = float(np.dot(wt, dq(t) ** 2))         # h ||w'||^2
    lhs = max(abs(q(0.0)), abs(q(1.0))) ** 2
    rhs = qq + 2.0 * math.sqrt(qq * dd)
    return lhs <= rhs + 1e-12 * rhs


def residual_dual_norm(solution, problem, splits=4, extra_degree=4):
    """Approximate sup_v a(u - u_hp, v) / |||v||| for d >= 0.

    Solves the problem on a nested enriched space (every element split into
    ``splits`` pieces with degree p + ``extra_degree``); the Riesz
    representative of the residual there is u_fine - u_hp.
    """
    from .assembly import solve
    from .mesh import HpMesh

    mesh = solution.mesh
    x, p = [mesh.breakpoints[0]], []
    for j in range(mesh.n_elements):
        xl, xr, pj = mesh.element(j)
        x.extend(np.linspace(xl, xr, splits + 1)[1:])
        p.extend([pj + extra_degree] * splits)
    fine = solve(HpMesh(x, p), problem)
    if np.any(np.asarray(problem.d(np.linspace(*mesh.domain, 1001))) < 0):
        raise InvalidInput("the dual-norm identity needs d >= 0")
    total = 0.0
    for j in range(fine.mesh.n_elements):
        xl, xr, pj = fine.mesh.element(j)
        rule = gauss_legendre(pj + 10)
        xq, wq = rule.mapped(xl, xr)
        r = fine.element_values(j, rule.nodes) - solution(xq)
        dr = fine.element_values(j, rule.nodes, derivative=1) - solution(xq, derivative=1)
        total += float(np.dot(wq, problem.epsilon * dr * dr + np.asarray(problem.d(xq)) * r * r))
    return math.sqrt(max(total, 0.0))
