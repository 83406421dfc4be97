import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sp_integrate

from relchannel.quadrature import (
    QuadratureBudgetError,
    QuadratureResult,
    integrate_1d,
    integrate_nd,
    monte_carlo,
)


def test_constant():
    r = integrate_1d(lambda t: np.ones_like(t), 0.0, 1.0)
    assert abs(r.value - 1.0) <= 1e-12
    assert r.evaluations >= 1


def test_odd_integrand_vanishes():
    r = integrate_1d(lambda u: u, -1.0, 1.0)
    assert abs(r.value) <= 1e-15


def test_polynomial_exactness():
    assert integrate_1d(lambda u: u * u, 0.0, 1.0).value == pytest.approx(1 / 3, abs=1e-15)
    # 21-point Kronrod rule integrates degree 31 exactly on one panel
    r = integrate_1d(lambda u: u ** 31, 0.0, 1.0, rel_tol=1e-14)
    assert r.value == pytest.approx(1 / 32, rel=1e-14)


@pytest.mark.parametrize("f, a, b, exact", [
    (np.sin, 0.0, math.pi, 2.0),
    (np.sqrt, 0.0, 1.0, 2.0 / 3.0),
    (lambda x: 1.0 / (1.0 + x * x), -50.0, 50.0, 2.0 * math.atan(50.0)),
    (lambda x: np.log(x), 1e-300, 1.0, -1.0),
    (lambda x: np.exp(-x * x), -10.0, 10.0, math.sqrt(math.pi) * math.erf(10.0)),
    (lambda x: np.cos(40.0 * x), 0.0, 3.0, math.sin(120.0) / 40.0),
])
def test_true_error_within_ten_times_estimate(f, a, b, exact):
    r = integrate_1d(f, a, b, rel_tol=1e-10, abs_tol=1e-14)
    assert abs(r.value - exact) <= max(10 * r.error_estimate, 1e-15)
    assert abs(r.value - exact) <= 1e-9 * max(1.0, abs(exact))


def test_matches_scipy_on_kinked_integrand():
    f = lambda x: np.abs(np.sin(3 * x)) * np.exp(-x)
    ref, _ = sp_integrate.quad(lambda x: abs(math.sin(3 * x)) * math.exp(-x), 0, 4,
                               points=[math.pi / 3, 2 * math.pi / 3, math.pi], limit=200)
    r = integrate_1d(f, 0.0, 4.0, rel_tol=1e-10)
    assert r.value == pytest.approx(ref, rel=1e-9)


def test_breakpoints_are_respected():
    r = integrate_1d(lambda x: np.where(x < 0.3, 0.0, 1.0), 0.0, 1.0, breakpoints=[0.3])
    assert r.value == pytest.approx(0.7, abs=1e-14)


def test_rejects_bad_bounds_and_tolerances():
    with pytest.raises(ValueError):
        integrate_1d(np.sin, 1.0, 0.0)
    with pytest.raises(ValueError):
        integrate_1d(np.sin, 0.0, 1.0, rel_tol=0.0)
    with pytest.raises(ValueError):
        integrate_1d(np.sin, 0.0, 1.0, abs_tol=-1.0)


def test_non_finite_integrand_rejected():
    with pytest.raises(ValueError):
        integrate_1d(lambda x: 1.0 / (x - 0.5) ** 0 * np.nan, 0.0, 1.0)


def test_budget_error_carries_partial_result():
    wild = lambda x: np.sin(1.0 / (x + 1e-3))
    with pytest.raises(QuadratureBudgetError) as info:
        integrate_1d(wild, 0.0, 1.0, rel_tol=1e-14, abs_tol=1e-16, max_evaluations=500)
    partial = info.value.result
    assert isinstance(partial, QuadratureResult)
    assert partial.evaluations <= 500
    assert partial.error_estimate > 0


def test_result_invariants():
    with pytest.raises(ValueError):
        QuadratureResult(1.0, -1.0, 1)
    with pytest.raises(ValueError):
        QuadratureResult(1.0, 0.0, 0)


def test_complex_integrand():
    r = integrate_1d(lambda x: np.exp(1j * x), 0.0, math.pi)
    assert r.value == pytest.approx(2j, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(alpha=st.floats(-5, 5), beta=st.floats(-5, 5), w=st.floats(0.1, 20))
def test_linearity(alpha, beta, w):
    f = lambda x: np.cos(w * x)
    g = lambda x: np.exp(-x) * x ** 2
    h = integrate_1d(lambda x: alpha * f(x) + beta * g(x), 0.0, 2.0)
    rf, rg = integrate_1d(f, 0.0, 2.0), integrate_1d(g, 0.0, 2.0)
    slack = h.error_estimate + abs(alpha) * rf.error_estimate + abs(beta) * rg.error_estimate
    assert abs(h.value - (alpha * rf.value + beta * rg.value)) <= slack + 1e-13


def test_nd_unit_box():
    r = integrate_nd(lambda p: np.ones(len(p)), [(0, 1)] * 3)
    assert r.value == pytest.approx(1.0, abs=1e-12)


def test_nd_separable_gaussian_is_product_of_1d():
    widths = (0.7, 1.3, 0.4)
    box = [(-6 * s, 6 * s) for s in widths]
    nd = integrate_nd(lambda p: np.exp(-0.5 * ((p / widths) ** 2).sum(axis=1)), box, rel_tol=1e-9)
    prod = 1.0
    for s, (a, b) in zip(widths, box):
        prod *= integrate_1d(lambda x: np.exp(-0.5 * (x / s) ** 2), a, b, rel_tol=1e-11).value
    assert nd.value == pytest.approx(prod, rel=1e-8)


def test_nd_odd_integrand_vanishes():
    r = integrate_nd(lambda p: p[:, 0] * np.cos(p[:, 1]), [(-1, 1), (-2, 2)], abs_tol=1e-10)
    assert abs(r.value) <= 1e-10


def test_nd_four_dimensions_polynomial():
    r = integrate_nd(lambda p: p.prod(axis=1), [(0, 1)] * 4)
    assert r.value == pytest.approx(1 / 16, rel=1e-12)


def test_nd_rejects_bad_dimension():
    with pytest.raises(ValueError):
        integrate_nd(lambda p: p[:, 0], [(0, 1)] * 8)
    with pytest.raises(ValueError):
        integrate_nd(lambda p: p[:, 0], [])


def test_monte_carlo_constant_has_zero_variance():
    r = monte_carlo(lambda p: np.full(len(p), 2.5), [(0, 2), (-1, 1)], samples=5000, seed=3)
    assert r.value == 2.5 * 4
    assert r.error_estimate == 0.0


def test_monte_carlo_is_deterministic():
    f = lambda p: np.exp(-(p ** 2).sum(axis=1))
    box = [(-3, 3)] * 3
    assert monte_carlo(f, box, samples=20_000, seed=11) == monte_carlo(f, box, samples=20_000, seed=11)


def test_monte_carlo_agrees_with_nd_quadrature():
    f = lambda p: np.exp(-0.5 * (p ** 2).sum(axis=1))
    box = [(-5, 5)] * 3
    mc = monte_carlo(f, box, samples=400_000, seed=1)
    nd = integrate_nd(f, box)
    assert abs(mc.value - nd.value) <= 3 * mc.error_estimate


def test_monte_carlo_needs_enough_samples():
    with pytest.raises(ValueError):
        monte_carlo(lambda p: p[:, 0], [(0, 1)], samples=10)
