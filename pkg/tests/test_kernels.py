import numpy as np
import pytest
from numpy.polynomial import legendre as npleg

from hp_robust import kernels
from hp_robust.polybasis import element_tables


def test_backend_name():
    assert kernels.BACKEND in ("compiled", "python")


@pytest.mark.parametrize("p", [0, 1, 2, 7, 25])
def test_legendre_table(backend, p):
    x = np.linspace(-1, 1, 37)
    P = backend.legendre_table(p, x)
    for k in range(p + 1):
        np.testing.assert_allclose(P[k], npleg.legval(x, np.eye(p + 1)[k]), atol=1e-13)


@pytest.mark.parametrize("m", [0, 1, 2, 5, 30])
def test_legendre_series(backend, m):
    rng = np.random.default_rng(m)
    c = rng.standard_normal(m)
    x = rng.uniform(-1, 1, 20)
    expected = npleg.legval(x, c) if m else np.zeros_like(x)
    np.testing.assert_allclose(backend.legendre_series(c, x), expected, atol=1e-12)


@pytest.mark.parametrize("m", [1, 2, 3, 8, 31])
def test_legendre_der(backend, m):
    c = np.random.default_rng(m).standard_normal(m)
    expected = npleg.legder(c) if m > 1 else np.zeros(1)
    np.testing.assert_allclose(backend.legendre_der(c), expected, atol=1e-10)


def test_element_matrix(backend):
    rule, N, dN = element_tables(6, 16)
    d = np.cos(rule.nodes)
    A = backend.element_matrix(N, dN, rule.weights, d, 0.3, 0.7)
    ref = 0.3 * (2 / 0.7) * np.einsum("iq,kq,q->ik", dN, dN, rule.weights) \
        + 0.35 * np.einsum("iq,kq,q->ik", N, N, rule.weights * d)
    np.testing.assert_allclose(A, ref, rtol=1e-13, atol=1e-15)


def test_backends_agree():
    pytest.importorskip("hp_robust._kernels")
    from hp_robust import _kernels, _pykernels

    x = np.linspace(-1, 1, 11)
    c = np.arange(1.0, 9.0)
    np.testing.assert_allclose(_kernels.legendre_series(c, x), _pykernels.legendre_series(c, x), rtol=1e-14)
    np.testing.assert_allclose(_kernels.legendre_der(c), _pykernels.legendre_der(c), rtol=1e-14)
