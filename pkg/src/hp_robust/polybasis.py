"""Legendre polynomials, hierarchical shape functions and Gauss-Legendre rules.

Everything here lives on the reference interval [-1, 1].  Local solutions are
stored as Legendre coefficient vectors, and the hierarchical basis

    N_0 = (1 - x)/2,  N_1 = (1 + x)/2,  N_k = int_{-1}^{x} P_{k-1},  k >= 2

is mapped to Legendre coefficients with :func:`shape_to_legendre`.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import DomainError, InvalidInput

NEWTON_TOL = 1e-15
NEWTON_MAXIT = 100


def quad_points(p):
    """Default quadrature size for a degree-``p`` element."""
    return p + 10


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return self.nodes.size

    def mapped(self, a, b):
        """Nodes and weights transported to the interval (a, b)."""
        half = 0.5 * (b - a)
        return a + half * (self.nodes + 1.0), half * self.weights


def legendre_eval(p, x):
    """Return [P_0(x), ..., P_p(x)] for a scalar ``x`` in [-1, 1]."""
    if p < 0:
        raise InvalidInput(f"degree must be non-negative, got {p}")
    if abs(x) > 1.0 + 1e-12:
        raise DomainError(f"x={x} outside [-1, 1]")
    return kernels.legendre_table(int(p), np.array([float(x)]))[:, 0]


def legendre_table(p, x):
    """Values of P_0..P_p at the points ``x``; shape (p+1, len(x))."""
    return kernels.legendre_table(int(p), np.ascontiguousarray(x, dtype=np.float64))


def legendre_differentiate(coeffs):
    """Legendre coefficients of the derivative of a Legendre series.

    >>> legendre_differentiate([0.0, 0.0, 1.0])
    array([0., 3.])
    """
    return kernels.legendre_der(np.ascontiguousarray(coeffs, dtype=np.float64))


def legendre_series(coeffs, x):
    """Evaluate sum_k coeffs[k] P_k(x) at the points ``x``."""
    return kernels.legendre_series(
        np.ascontiguousarray(coeffs, dtype=np.float64),
        np.ascontiguousarray(np.atleast_1d(x), dtype=np.float64),
    )


@lru_cache(maxsize=256)
def _gauss_legendre(n):
    if n == 1:
        return np.array([0.0]), np.array([2.0])
    m = (n + 1) // 2
    k = np.arange(1, m + 1)
    # Chebyshev-type initial guesses for the m largest roots.
    x = np.cos(np.pi * (k - 0.25) / (n + 0.5))
    for _ in range(NEWTON_MAXIT):
        P = kernels.legendre_table(n, x)
        pn, pn1 = P[n], P[n - 1]
        dp = n * (x * pn - pn1) / (x * x - 1.0)
        dx = pn / dp
        x = x - dx
        if np.max(np.abs(dx)) < NEWTON_TOL:
            break
    P = kernels.legendre_table(n, x)
    dp = n * (x * P[n] - P[n - 1]) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    # Mirror the positive half; the middle root of odd n is exactly zero.
    if n % 2:
        x[-1] = 0.0
        nodes = np.concatenate([-x, x[-2::-1]])
        weights = np.concatenate([w, w[-2::-1]])
    else:
        nodes = np.concatenate([-x, x[::-1]])
        weights = np.concatenate([w, w[::-1]])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre(n):
    """n-point Gauss-Legendre rule on [-1, 1], exact up to degree 2n - 1."""
    if n < 1:
        raise InvalidInput(f"need at least one quadrature point, got {n}")
    nodes, weights = _gauss_legendre(int(n))
    return QuadratureRule(nodes, weights)


def shape_functions(p, x):
    """Hierarchical shape functions of degree ``p`` and their derivatives.

    Args:
        p: local degree, at least 1.
        x: scalar or array of reference points.

    Returns:
        (values, derivatives), each of shape (p+1, len(x)).  Row 0 is the
        left hat, row 1 the right hat, rows 2..p the integrated-Legendre
        bubbles, which vanish at both endpoints.
    """
    if p < 1:
        raise InvalidInput(f"shape functions need p >= 1, got {p}")
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    P = legendre_table(p, x)
    N = np.empty((p + 1, x.size))
    dN = np.empty((p + 1, x.size))
    N[0] = 0.5 * (1.0 - x)
    N[1] = 0.5 * (1.0 + x)
    dN[0] = -0.5
    dN[1] = 0.5
    for k in range(2, p + 1):
        N[k] = (P[k] - P[k - 2]) / (2 * k - 1)
        dN[k] = P[k - 1]
    return N, dN


@lru_cache(maxsize=256)
def shape_to_legendre(p):
    """Matrix T with T[:, i] = Legendre coefficients of shape function i."""
    T = np.zeros((p + 1, p + 1))
    T[0, 0], T[1, 0] = 0.5, -0.5
    T[0, 1], T[1, 1] = 0.5, 0.5
    for k in range(2, p + 1):
        T[k, k] = 1.0 / (2 * k - 1)
        T[k - 2, k] = -1.0 / (2 * k - 1)
    T.setflags(write=False)
    return T


@lru_cache(maxsize=256)
def element_tables(p, nq):
    """Cached (rule, N, dN) for degree ``p`` with ``nq`` quadrature points."""
    rule = gauss_legendre(nq)
    N, dN = shape_functions(p, rule.nodes)
    N = np.ascontiguousarray(N)
    dN = np.ascontiguousarray(dN)
    N.setflags(write=False)
    dN.setflags(write=False)
    return rule, N, dN
