import math

import numpy as np
import pytest
from scipy.integrate import quad
from hypothesis import given, settings, strategies as st

from hp_robust.adaptivity import AdaptiveConfig, adaptive_solve
from hp_robust.assembly import HpSolution, solve
from hp_robust.errors import InvalidInput, MissingExactSolution
from hp_robust.estimator import (
    ElementIndicator, compute_alpha, compute_beta, compute_gamma, efficiency_diagnostics, estimate, flux_jump,
    global_estimate, l2_project, oscillation_R, scaled_distance,
)
from hp_robust.mesh import HpMesh, uniform_mesh
from hp_robust.polybasis import gauss_legendre, legendre_series
from hp_robust.problem import ProblemSpec, example1, example2, manufactured


def _const(c):
    return lambda x: np.full(np.shape(x), float(c))


def _poisson():
    """-u'' = 1 on (-1, 1), d = 0, exact u = (1 - x^2)/2."""
    return ProblemSpec("poisson", 1.0, _const(0.0), _const(1.0), (-1.0, 1.0),
                       exact=lambda x: 0.5 * (1 - x ** 2), exact_derivative=lambda x: -x)


def _ind(eta_sq):
    return ElementIndicator(eta_sq, 0, 0, 0, 0, 0, 0, 0, 0)


def test_alpha_examples():
    m = uniform_mesh(-1, 1, 10, 1)
    assert compute_alpha(m, example1(1.0), 4) == pytest.approx(0.04, rel=1e-14)
    assert compute_alpha(m, example1(1e-8), 4) == 1.0
    eps = 1e-3
    j = 5  # patch (-0.2, 0.4) contains 0
    assert compute_alpha(m, example2(eps), j) == pytest.approx(0.2 ** 2 / eps, rel=1e-12)
    # away from zero the bound 1/|x| over the patch is finite
    assert compute_alpha(m, example2(1e-8), 9) == pytest.approx(1 / 0.6, rel=1e-12)


def test_beta_examples():
    assert compute_beta(0.04, 0.2, 1.0) == pytest.approx(0.6, rel=1e-14)
    eps, h, p = 1e-2, 0.3, 4
    a = h ** 2 / (eps * p ** 2)
    assert compute_beta(a, h, eps) == pytest.approx(h / (eps * p ** 2) + 2 * h / (eps * p), rel=1e-13)


def test_gamma_examples():
    np.testing.assert_allclose(compute_gamma([2.0, 2.0]), [0, 1.0, 0])
    np.testing.assert_allclose(compute_gamma([1.0, 3.0]), [0, 0.75, 0])
    g = compute_gamma([5.0, 1.0, 7.0, 0.1])
    assert g[0] == 0 and g[-1] == 0
    assert compute_gamma([0.0, 0.0])[1] == 0.0
    assert compute_gamma([4.0]).tolist() == [0.0, 0.0]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(1e-8, 1e8), min_size=2, max_size=12))
def test_gamma_window(betas):
    g = compute_gamma(betas)
    for j in range(1, len(betas)):
        lo = min(betas[j - 1], betas[j])
        assert 0.5 * lo * (1 - 1e-14) <= g[j] <= lo * (1 + 1e-14)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, 10), st.integers(1, 30), st.floats(1e-10, 1.0), st.floats(0.01, 100))
def test_beta_window_and_weight_bounds(h, p, eps, bound):
    alpha = min(h * h / (eps * p * p), bound)
    beta = compute_beta(alpha, h, eps)
    root = math.sqrt(alpha / eps)
    assert 2 * root <= beta * (1 + 1e-14) and beta <= 3 * root * (1 + 1e-14)
    if bound <= 1.0:  # d = 1 style bound
        assert alpha <= 1.0
        gamma = beta  # upper bound of gamma_j
        assert eps ** 2 * alpha * gamma <= 3 * math.sqrt(alpha ** 3 * eps) * (1 + 1e-12)
        assert 3 * math.sqrt(alpha ** 3 * eps) <= 3.0


def test_l2_project():
    rng = np.random.default_rng(2)
    c = rng.standard_normal(4)
    poly = lambda x: legendre_series(c, (2 * np.asarray(x) - 0.3 - 1.1) / 0.8)
    np.testing.assert_allclose(l2_project(poly, 0.3, 1.1, 3), c, atol=1e-11)
    np.testing.assert_allclose(l2_project(poly, 0.3, 1.1, 5), np.r_[c, 0, 0], atol=1e-11)
    # x^2 on [-1, 1] projected onto P_1: moments 2/3 and 0 -> (1/3, 0)
    np.testing.assert_allclose(l2_project(lambda x: x ** 2, -1.0, 1.0, 1), [1 / 3, 0.0], atol=1e-15)
    np.testing.assert_array_equal(l2_project(_const(0.0), 0, 1, 3), 0.0)


def test_flux_jump_examples():
    # u = x on (0,1), 2 - x on (1,2): Legendre coefficients in reference variables
    m = HpMesh([0, 1, 2], [1, 1])
    sol = HpSolution(m, [np.array([0.5, 0.5]), np.array([0.5, -0.5])])
    assert flux_jump(sol, 1) == pytest.approx(-2.0, abs=1e-15)
    sol = HpSolution(m, [np.array([0.5, -0.5]), np.array([0.5, 0.5])])
    assert flux_jump(sol, 1) == pytest.approx(2.0, abs=1e-15)
    # x^2 on (0, 2) split at 1: x^2 = (1+t)^2/4 on (0,1), (3+t)^2/4 on (1,2)
    sol = HpSolution(m, [np.array([1 / 3, 0.5, 1 / 6]), np.array([7 / 3, 1.5, 1 / 6])])
    sol.mesh = HpMesh([0, 1, 2], [2, 2])
    assert abs(flux_jump(sol, 1)) < 1e-12
    with pytest.raises(IndexError):
        flux_jump(sol, 0)
    with pytest.raises(IndexError):
        flux_jump(sol, 2)


def test_two_element_hand_computed():
    pr = _poisson()
    sol = solve(uniform_mesh(-1, 1, 2, 1), pr)
    est = estimate(sol, pr)
    np.testing.assert_allclose(est.alpha, [1.0, 1.0], rtol=1e-12)
    np.testing.assert_allclose(est.beta, [3.0, 3.0], rtol=1e-12)
    np.testing.assert_allclose(est.gamma, [0.0, 1.5, 0.0], rtol=1e-12)
    np.testing.assert_allclose(est.jumps, [0.0, -1.0, 0.0], atol=1e-12)
    for j, ind in enumerate(est.indicators):
        assert ind.residual_part == pytest.approx(1.0, abs=1e-10)  # alpha * h
        assert ind.oscillation_part == pytest.approx(0.0, abs=1e-10)
        half = ind.jump_right if j == 0 else ind.jump_left
        assert half == pytest.approx(1.5, abs=1e-10)
        assert ind.eta_sq == pytest.approx(1.75, abs=1e-10)
    assert est.total == pytest.approx(math.sqrt(3.5), abs=1e-10)


def test_indicator_vanishes_for_exact_discrete_solution():
    u = lambda x: x * (1 - x) * (2 + x)
    du = lambda x: 2 - 2 * x - 3 * x ** 2
    pr = manufactured(0.5, u, du, lambda x: -2 - 6 * x, _const(3.0))
    sol = solve(HpMesh([0, 0.25, 0.7, 1], [3, 3, 4]), pr)
    est = estimate(sol, pr)
    assert est.total < 1e-10


def test_indicator_bookkeeping():
    pr = example2(1e-3)
    sol = solve(HpMesh([-1, -0.6, 0.05, 0.5, 1], [3, 2, 4, 1]), pr)
    est = estimate(sol, pr)
    for ind in est.indicators:
        parts = ind.residual_part + ind.oscillation_part + 0.5 * (ind.jump_left + ind.jump_right)
        assert ind.eta_sq == pytest.approx(parts, rel=1e-15)
        assert ind.eta_sq >= 0
    assert est.indicators[0].gamma_left == 0 and est.indicators[-1].gamma_right == 0
    assert global_estimate(est.indicators) == pytest.approx(math.sqrt(np.sum(est.eta_sq)), rel=1e-12)


def test_global_estimate_examples():
    assert global_estimate([_ind(4.0)]) == 2.0
    assert global_estimate([_ind(0.0), _ind(0.0)]) == 0.0
    assert global_estimate([_ind(9.0), _ind(16.0)]) == 5.0


@pytest.mark.parametrize("pr", [example1(1e-4), example2(1e-4)], ids=["ex1", "ex2"])
def test_quadrature_refinement_stability(pr):
    sol = solve(HpMesh([-1, -0.9, -0.2, 0.3, 0.95, 1], [4, 2, 6, 3, 5]), pr)
    base = estimate(sol, pr).total
    doubled = estimate(sol, pr, nq_extra=20).total
    assert abs(doubled - base) <= 1e-8 * base


def test_scaled_distance():
    x = np.array([0.2, 0.45, 0.7])
    np.testing.assert_allclose(scaled_distance(x, 0.2, 0.7), [0.0, 0.5, 0.0], atol=1e-15)


def test_oscillation_resolved_data_is_zero():
    pr = manufactured(1.0, lambda x: x * (1 - x), lambda x: 1 - 2 * x, lambda x: -2 + 0 * x,
                      lambda x: 1 + np.asarray(x))
    sol = solve(HpMesh([0, 0.5, 1], [2, 2]), pr)
    for i in range(2):
        assert oscillation_R(sol, pr, i, osc_degree="2p") < 1e-12


def test_oscillation_against_adaptive_quadrature():
    p = 2
    f = lambda x: np.asarray(x) ** (p + 1)
    pr = ProblemSpec("osc", 1.0, _const(0.0), f, (-1.0, 1.0))
    sol = solve(uniform_mesh(-1, 1, 1, p), pr)
    # independent oracle: projection by normal equations, weighted norm by adaptive quadrature
    r = gauss_legendre(40)
    V = np.vander(r.nodes, p + 1, increasing=True)
    coef = np.linalg.solve(V.T @ (r.weights[:, None] * V), V.T @ (r.weights * f(r.nodes)))
    osc = lambda x: f(x) - np.polyval(coef[::-1], x)
    plain = math.sqrt(quad(lambda x: osc(x) ** 2, -1, 1, epsabs=1e-15)[0])
    for beta in (0.75, 1.0):
        phi = lambda x: (min(abs(x + 1), abs(x - 1)) / 2) ** beta
        wsq = quad(lambda x: phi(x) * osc(x) ** 2, -1, 1, points=[0.0], epsabs=1e-15, limit=200)[0]
        expect = p ** beta * math.sqrt(wsq) + plain
        assert oscillation_R(sol, pr, 0, beta) == pytest.approx(expect, rel=1e-10)


def test_oscillation_quadrature_exact_for_polynomials():
    pr = ProblemSpec("osc", 1.0, _const(0.0), lambda x: np.sin(4 * np.asarray(x)), (0.0, 1.0))
    sol = solve(uniform_mesh(0, 1, 2, 3), pr)
    for beta in (0.6, 0.9, 1.0):
        a = oscillation_R(sol, pr, 1, beta, nq=30)
        b = oscillation_R(sol, pr, 1, beta, nq=60)
        assert a == pytest.approx(b, rel=1e-12)


def test_oscillation_beta_range():
    pr = example1(1.0)
    sol = solve(uniform_mesh(-1, 1, 2, 2), pr)
    for bad in (0.5, 0.2, 1.01):
        with pytest.raises(InvalidInput):
            oscillation_R(sol, pr, 0, bad)
    with pytest.raises(InvalidInput):
        oscillation_R(sol, pr, 0, 1.0, osc_degree="3p")


def test_diagnostics_need_exact():
    pr = example2(1e-2)
    sol = solve(uniform_mesh(-1, 1, 3, 2), pr)
    with pytest.raises(MissingExactSolution):
        efficiency_diagnostics(sol, pr)


def test_diagnostics_zero_for_exact_solution():
    u = lambda x: x * (1 - x)
    pr = manufactured(1.0, u, lambda x: 1 - 2 * x, lambda x: -2 + 0 * x, _const(1.0))
    sol = solve(HpMesh([0, 0.5, 1], [2, 3]), pr)
    dg = efficiency_diagnostics(sol, pr)
    for v in np.concatenate([dg.rho_vol, dg.rho_jump]):
        assert np.isnan(v) or v < 1e-10


def test_diagnostics_scale_invariant():
    pr = example1(1e-2)
    trace = adaptive_solve(pr, AdaptiveConfig(max_iterations=5))
    mesh = trace.final_mesh
    lam = 7.5
    dg1 = efficiency_diagnostics(solve(mesh, pr), pr)
    scaled = pr.with_scaled_data(lam)
    dg2 = efficiency_diagnostics(solve(mesh, scaled), scaled)
    np.testing.assert_allclose(dg2.rho_vol, dg1.rho_vol, rtol=1e-10)
    np.testing.assert_allclose(dg2.rho_jump, dg1.rho_jump, rtol=1e-10)
    assert np.isfinite(dg1.max_finite())
