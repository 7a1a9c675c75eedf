"""Doerfler marking, smoothness-based hp-decisions and the adaptive loop."""
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analysis import efficiency_index, energy_norm_error
from .assembly import solve
from .errors import InvalidInput, SolverError, check
from .estimator import estimate
from .mesh import Refinement, RefinementDecision, apply_refinements, uniform_mesh

F_MIN = math.sqrt(3.0) / (math.sqrt(6.0) + 1.0)


@dataclass(frozen=True)
class AdaptiveConfig:
    theta: float = 0.5
    tau: float = 0.6
    max_iterations: int = 80
    target_estimate: float = 1e-10
    initial_elements: int = 10
    initial_degree: int = 1
    p_max: Optional[int] = 40

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise InvalidInput(f"theta must lie in (0, 1), got {self.theta}")
        if not F_MIN < self.tau < 1.0:
            raise InvalidInput(f"tau must lie in ({F_MIN:.6f}, 1), got {self.tau}")
        if self.max_iterations < 0 or self.target_estimate < 0:
            raise InvalidInput("max_iterations and target_estimate must be non-negative")
        if self.initial_elements < 1 or self.initial_degree < 1:
            raise InvalidInput("initial mesh needs >= 1 element of degree >= 1")
        if self.p_max is not None and self.p_max < self.initial_degree:
            raise InvalidInput("p_max below the initial degree")


def dorfler_mark(eta_sq, theta):
    """Smallest set of elements carrying a theta-fraction of sum(eta_sq).

    Ties in eta_sq are broken by the smaller element index.  Returns the
    marked indices in selection order; empty if every indicator is zero.
    """
    eta_sq = np.asarray(eta_sq, dtype=float)
    if not 0.0 < theta <= 1.0:
        raise InvalidInput(f"theta must lie in (0, 1], got {theta}")
    total = float(eta_sq.sum())
    if total <= 0.0:
        return []
    order = np.lexsort((np.arange(eta_sq.size), -eta_sq))
    csum = np.cumsum(eta_sq[order])
    m = int(np.searchsorted(csum, theta * total, side="left")) + 1
    m = min(m, eta_sq.size)
    marked = [int(i) for i in order[:m]]
    check("dorfler_minimal",
          csum[m - 1] >= theta * total * (1 - 1e-14) and (m == 1 or csum[m - 2] < theta * total),
          f"marked {m} elements do not form a minimal Doerfler set")
    return marked


def smoothness_indicator(solution, j):
    """Sobolev-embedding ratio of the (p_j - 1)-st derivative on element j.

    The derivative is linear, g = c0 + c1 * xi in the reference variable.
    The ratio is invariant under scaling of g and under the affine map to
    the element, so the closed form (|c0| + |c1|) /
    (sqrt(c0^2 + c1^2/3) + sqrt(2) |c1|) is exact.
    """
    p = int(solution.mesh.degrees[j])
    c = solution.element_coeffs[j]
    from .polybasis import legendre_differentiate

    for _ in range(p - 1):
        c = legendre_differentiate(c)
    c0 = float(c[0])
    c1 = float(c[1]) if c.size > 1 else 0.0
    scale = max(abs(c0), abs(c1))
    if scale == 0.0 or scale <= 1e-300:
        F = 1.0
    else:
        c0, c1 = c0 / scale, c1 / scale
        F = (abs(c0) + abs(c1)) / (math.sqrt(c0 * c0 + c1 * c1 / 3.0) + math.sqrt(2.0) * abs(c1))
    check("smoothness_range", F_MIN - 1e-12 <= F <= 1.0 + 1e-12, f"F={F} on element {j}")
    return F


def hp_decide(F, tau):
    return Refinement.RAISE_DEGREE if F >= tau else Refinement.BISECT


@dataclass
class TraceRow:
    iteration: int
    n_elements: int
    n_dofs: int
    max_degree: int
    eta_total: float
    true_error: float = math.nan
    efficiency: float = math.nan


@dataclass
class AdaptiveTrace:
    problem: str
    epsilon: float
    rows: list = field(default_factory=list)
    meshes: list = field(default_factory=list)
    solutions: list = field(default_factory=list, repr=False)
    estimates: list = field(default_factory=list, repr=False)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows])

    @property
    def final_mesh(self):
        return self.meshes[-1]


def adaptive_solve(problem, config=None, keep_solutions=True, callback=None):
    """Run the solve-estimate-mark-refine loop.

    Iteration 0 is the initial uniform mesh; ``max_iterations`` refinement
    steps follow at most.  ``callback(iteration, solution, estimate)`` is
    invoked after every solve.
    """
    config = config or AdaptiveConfig()
    a, b = problem.domain
    mesh = uniform_mesh(a, b, config.initial_elements, config.initial_degree)
    trace = AdaptiveTrace(problem.name, problem.epsilon)
    for it in range(config.max_iterations + 1):
        try:
            sol = solve(mesh, problem)
        except SolverError as exc:
            exc.iteration = it
            raise
        est = estimate(sol, problem)
        eta = est.total
        row = TraceRow(it, mesh.n_elements, mesh.n_dofs, mesh.max_degree, eta)
        if problem.has_exact:
            row.true_error = energy_norm_error(sol, problem).energy_error
            row.efficiency = efficiency_index(eta, row.true_error)
        trace.rows.append(row)
        trace.meshes.append(mesh)
        if keep_solutions:
            trace.solutions.append(sol)
            trace.estimates.append(est)
        if callback is not None:
            callback(it, sol, est)
        if eta <= config.target_estimate or it == config.max_iterations:
            break
        marked = dorfler_mark(est.eta_sq, config.theta)
        if not marked:
            break
        decisions = []
        for j in marked:
            kind = hp_decide(smoothness_indicator(sol, j), config.tau)
            if kind is Refinement.RAISE_DEGREE and config.p_max is not None and mesh.degrees[j] >= config.p_max:
                kind = Refinement.BISECT
            decisions.append(RefinementDecision(j, kind))
        check("hp_decision_exhaustive", len(decisions) == len(set(marked)),
              "every marked element needs exactly one decision")
        mesh = apply_refinements(mesh, decisions)
    return trace
