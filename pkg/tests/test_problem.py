import math

import numpy as np
import pytest
import sympy as sp

from hp_robust.errors import DomainError, InvalidInput
from hp_robust.problem import example1, example2, get_problem, inv_d_sup, manufactured, manufactured_sin

X = sp.Symbol("x")


def _strong_residual(pr, x, h=1e-4):
    # d2u from the exact derivative by central differences of u'
    upp = (pr.exact_derivative(x + h) - pr.exact_derivative(x - h)) / (2 * h)
    return -pr.epsilon * upp + pr.d(x) * pr.exact(x) - pr.f(x)


def test_example1_boundary_and_value():
    pr = example1(1.0)
    np.testing.assert_allclose(pr.exact(np.array([-1.0, 1.0])), 0.0, atol=1e-15)
    expected = 1 - 1 / math.cosh(1.0)  # 0.351945683...
    assert pr.exact(np.array([0.0]))[0] == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("eps", [1.0, 1e-2, 1e-4])
def test_example1_strong_form(eps):
    s = math.sqrt(eps)
    c = sp.Symbol("c", positive=True)
    u = 1 - sp.cosh(X / c) / sp.cosh(1 / c)
    resid = sp.simplify(-c ** 2 * sp.diff(u, X, 2) + u - 1)
    assert resid == 0
    pr = example1(eps)
    x = np.random.default_rng(0).uniform(-1, 1, 100)
    du_sym = sp.lambdify(X, sp.diff(u, X).subs(c, s), "numpy")
    np.testing.assert_allclose(pr.exact_derivative(x), du_sym(x), rtol=1e-9, atol=1e-12)
    upp = sp.lambdify(X, sp.diff(u, X, 2).subs(c, s), "numpy")(x)
    np.testing.assert_allclose(-eps * upp + pr.exact(x), 1.0, atol=1e-9)


def test_example1_stable_form():
    x = np.linspace(-1, 1, 101)
    for eps in [1.0, 1e-1, 1e-2]:
        naive = 1 - np.cosh(x / math.sqrt(eps)) / math.cosh(1 / math.sqrt(eps))
        np.testing.assert_allclose(example1(eps).exact(x), naive, atol=1e-12)
    with np.errstate(over="raise"):
        for eps in [1e-8, 1e-12, 1e-16]:
            pr = example1(eps)
            assert np.all(np.isfinite(pr.exact(x))) and np.all(np.isfinite(pr.exact_derivative(x)))


def test_example2():
    pr = example2(1e-4)
    np.testing.assert_array_equal(pr.d(np.array([-1.0, 1.0])), [-1.0, 1.0])
    assert pr.exact is None
    assert inv_d_sup(pr, 0.5, 1.0) == 2.0
    assert inv_d_sup(pr, -1.0, -0.25) == 4.0
    assert inv_d_sup(pr, -0.1, 0.2) == math.inf


def test_sampled_inv_d_bound():
    pr = manufactured(1.0, lambda x: np.zeros_like(x), lambda x: np.zeros_like(x),
                      lambda x: np.zeros_like(x), lambda x: 2.0 + np.asarray(x))
    assert inv_d_sup(pr, 0.0, 1.0) == pytest.approx(0.5)
    vanishing = manufactured(1.0, lambda x: np.zeros_like(x), lambda x: np.zeros_like(x),
                             lambda x: np.zeros_like(x), lambda x: np.asarray(x) - 0.5)
    assert inv_d_sup(vanishing, 0.0, 1.0) == math.inf


def test_invalid_epsilon():
    for factory in (example1, example2, manufactured_sin):
        with pytest.raises(DomainError):
            factory(0.0)
        with pytest.raises(DomainError):
            factory(-1.0)


def test_manufactured_examples():
    pr = manufactured_sin(1.0)
    x = np.linspace(0, 1, 17)
    np.testing.assert_allclose(pr.f(x), (math.pi ** 2 + 1) * np.sin(math.pi * x), atol=1e-12)
    zero = manufactured(1.0, lambda x: 0 * x, lambda x: 0 * x, lambda x: 0 * x, lambda x: 1 + 0 * x)
    np.testing.assert_array_equal(zero.f(x), 0.0)
    u = X * (1 - X)
    assert sp.diff(u, X, 2) == -2
    quad = manufactured(1.0, sp.lambdify(X, u), sp.lambdify(X, sp.diff(u, X)),
                        lambda x: -2.0 + 0 * x, lambda x: 0 * x)
    np.testing.assert_allclose(quad.f(x), 2.0)


def test_manufactured_boundary_check():
    with pytest.raises(InvalidInput):
        manufactured(1.0, lambda x: 1 + 0 * x, lambda x: 0 * x, lambda x: 0 * x, lambda x: 1 + 0 * x)


@pytest.mark.parametrize("pr", [example1(1.0), example1(1e-3), manufactured_sin(1.0), manufactured_sin(0.1)],
                         ids=["ex1", "ex1-small", "sin", "sin-eps"])
def test_strong_form_residual(pr):
    a, b = pr.domain
    x = np.random.default_rng(5).uniform(a + 0.01, b - 0.01, 100)
    res = _strong_residual(pr, x, h=1e-5 * math.sqrt(pr.epsilon))
    assert np.max(np.abs(res) / np.maximum(np.abs(pr.f(x)), 1.0)) < 1e-5


def test_get_problem():
    assert get_problem("example2", 1e-3).name == "example2"
    with pytest.raises(InvalidInput):
        get_problem("nope", 1.0)
