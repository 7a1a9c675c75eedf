"""Two-point boundary value problems -eps u'' + d u = f, u(a) = u(b) = 0."""
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, InvalidInput

Field = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CoefficientBound:
    interval: tuple
    inv_d_sup: float


@dataclass(frozen=True)
class ProblemSpec:
    """Data of one boundary value problem.

    ``d`` and ``f`` are vectorised callables.  ``inv_d_bound(l, r)``, when
    given, returns sup |1/d| over [l, r] (``inf`` if d vanishes there);
    otherwise it is estimated by sampling, see :func:`inv_d_sup`.
    """

    name: str
    epsilon: float
    d: Field
    f: Field
    domain: tuple = (-1.0, 1.0)
    exact: Optional[Field] = None
    exact_derivative: Optional[Field] = None
    inv_d_bound: Optional[Callable[[float, float], float]] = None

    def __post_init__(self):
        if not self.epsilon > 0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon}")
        a, b = self.domain
        if not a < b:
            raise DomainError(f"empty domain {self.domain}")
        if self.exact is not None:
            ends = np.asarray(self.exact(np.array([a, b], dtype=float)))
            if np.max(np.abs(ends)) > 1e-10:
                raise InvalidInput(f"exact solution violates boundary conditions: {ends}")

    @property
    def has_exact(self):
        return self.exact is not None and self.exact_derivative is not None

    def with_scaled_data(self, lam):
        """Same operator, data and exact solution multiplied by ``lam``."""
        f, u, du = self.f, self.exact, self.exact_derivative
        return ProblemSpec(
            name=self.name, epsilon=self.epsilon, d=self.d,
            f=lambda x: lam * f(x), domain=self.domain,
            exact=None if u is None else (lambda x: lam * u(x)),
            exact_derivative=None if du is None else (lambda x: lam * du(x)),
            inv_d_bound=self.inv_d_bound,
        )


def _chebyshev_points(l, r, n):
    k = np.arange(n)
    return 0.5 * (l + r) + 0.5 * (r - l) * np.cos(np.pi * k / (n - 1))


def inv_d_sup(problem, l, r, degree=1):
    """sup |1/d| over [l, r]; ``inf`` where d (numerically) vanishes."""
    if problem.inv_d_bound is not None:
        return float(problem.inv_d_bound(l, r))
    n = max(2 * degree + 1, 33)
    dv = np.abs(np.asarray(problem.d(_chebyshev_points(l, r, n)), dtype=float))
    if np.any(dv < 1e-12):
        return math.inf
    return float(np.max(1.0 / dv))


def _const(c):
    return lambda x: np.full(np.shape(x), float(c))


def example1(epsilon):
    """-eps u'' + u = 1 on (-1, 1); boundary layers at both ends."""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    s = math.sqrt(epsilon)
    denom = 1.0 + math.exp(-2.0 / s)

    # cosh(x/s)/cosh(1/s) rewritten with non-positive exponents only.
    def u(x):
        x = np.asarray(x, dtype=float)
        return 1.0 - (np.exp((x - 1.0) / s) + np.exp(-(x + 1.0) / s)) / denom

    def du(x):
        x = np.asarray(x, dtype=float)
        return -(np.exp((x - 1.0) / s) - np.exp(-(x + 1.0) / s)) / (s * denom)

    return ProblemSpec("example1", epsilon, _const(1.0), _const(1.0), (-1.0, 1.0),
                       exact=u, exact_derivative=du, inv_d_bound=lambda l, r: 1.0)


def _airy_inv_d(l, r):
    if l > 0:
        return 1.0 / l
    if r < 0:
        return 1.0 / -r
    return math.inf


def example2(epsilon):
    """Airy-type problem -eps u'' + x u = 1 on (-1, 1); no closed form."""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    return ProblemSpec("example2", epsilon, lambda x: np.asarray(x, dtype=float),
                       _const(1.0), (-1.0, 1.0), inv_d_bound=_airy_inv_d)


def manufactured(epsilon, u, du, ddu, d, domain=(0.0, 1.0), name="manufactured", inv_d_bound=None):
    """Problem whose exact solution is ``u``: f := -eps u'' + d u.

    ``du`` and ``ddu`` are the first and second derivatives of ``u``.
    """
    def f(x):
        x = np.asarray(x, dtype=float)
        return -epsilon * np.asarray(ddu(x)) + np.asarray(d(x)) * np.asarray(u(x))

    return ProblemSpec(name, epsilon, d, f, tuple(domain), exact=u,
                       exact_derivative=du, inv_d_bound=inv_d_bound)


def manufactured_sin(epsilon=1.0):
    """u = sin(pi x) on (0, 1) with d = 1."""
    pi = math.pi
    return manufactured(
        epsilon,
        lambda x: np.sin(pi * np.asarray(x, dtype=float)),
        lambda x: pi * np.cos(pi * np.asarray(x, dtype=float)),
        lambda x: -pi * pi * np.sin(pi * np.asarray(x, dtype=float)),
        _const(1.0), (0.0, 1.0), name="manufactured-sin",
        inv_d_bound=lambda l, r: 1.0,
    )


PROBLEMS = {
    "example1": example1,
    "example2": example2,
    "manufactured-sin": manufactured_sin,
}


def get_problem(name, epsilon):
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise InvalidInput(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
    return factory(epsilon)
