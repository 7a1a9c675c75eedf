"""hp-adaptive finite elements for -eps u'' + d u = f on an interval.

The error indicators are robust in eps and explicit in the local mesh
size and polynomial degree; refinement combines Doerfler marking with a
smoothness test that chooses between bisection and degree increase.
"""
from .adaptivity import AdaptiveConfig, AdaptiveTrace, adaptive_solve, dorfler_mark, hp_decide, smoothness_indicator
from .analysis import energy_norm_error, efficiency_index, fit_exponential, fit_trace
from .assembly import HpSolution, assemble, solve, solve_system
from .errors import DomainError, InvalidInput, InvariantViolation, MissingExactSolution, SolverError
from .estimator import efficiency_diagnostics, estimate, global_estimate
from .kernels import BACKEND
from .mesh import HpMesh, Refinement, RefinementDecision, apply_refinements, uniform_mesh
from .problem import ProblemSpec, example1, example2, get_problem, manufactured, manufactured_sin

__version__ = "0.1.0"
