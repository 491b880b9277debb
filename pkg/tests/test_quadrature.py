"""Checks of the quadrature engines against closed forms and scipy."""

import math

import numpy as np
import pytest

from oracles import faddeeva_moments
from penningcool.quadrature import (
    QuadratureError,
    QuadratureSpec,
    _integrate_family,
    gauss_hermite,
    gauss_lorentz_moments,
    integrate_1d,
    integrate_disk_xy,
)


def test_gauss_hermite_matches_numpy():
    rule = gauss_hermite(40)
    nodes, weights = np.polynomial.hermite.hermgauss(40)
    assert rule.order == 40
    np.testing.assert_array_equal(rule.nodes, nodes)
    np.testing.assert_array_equal(rule.weights, weights)


@pytest.mark.parametrize("order", [0, -3, 201])
def test_gauss_hermite_rejects_bad_order(order):
    with pytest.raises(ValueError):
        gauss_hermite(order)


@pytest.mark.parametrize("power, exact", [
    (0, math.sqrt(math.pi)),
    (2, math.sqrt(math.pi) / 2),
    (4, 3 * math.sqrt(math.pi) / 4),
    (10, 945 * math.sqrt(math.pi) / 32),
])
def test_gauss_hermite_moment_exactness(power, exact):
    """An order-n rule integrates exp(-v^2) v^k exactly for k <= 2n-1."""
    rule = gauss_hermite(6)
    value = float((rule.weights * rule.nodes**power).sum())
    np.testing.assert_allclose(value, exact, rtol=1e-14)


@pytest.mark.parametrize("kwargs", [
    {"rel_tol": 0.0},
    {"rel_tol": -1e-8},
    {"abs_tol": -1.0},
    {"max_subdivisions": 0},
])
def test_quadrature_spec_validation(kwargs):
    with pytest.raises(ValueError):
        QuadratureSpec(**kwargs)


@pytest.mark.parametrize("f, a, b, exact", [
    (np.sin, 0.0, math.pi, 2.0),
    (lambda x: x * x, 0.0, 1.0, 1.0 / 3.0),
    (lambda x: 1.0 / (1.0 + 25.0 * x * x), -1.0, 1.0,
     2.0 / 5.0 * math.atan(5.0)),
    (np.exp, 0.0, 1.0, math.e - 1.0),
])
def test_integrate_1d_known_integrals(f, a, b, exact):
    value, err = integrate_1d(f, a, b, QuadratureSpec(rel_tol=1e-12))
    np.testing.assert_allclose(value, exact, rtol=1e-11)
    assert err <= 1e-10 * abs(exact)


def test_integrate_1d_breakpoint_makes_discontinuity_exact():
    """A jump located on a panel edge costs nothing to integrate."""
    f = lambda x: np.where(x < 0.3, 1.0, 0.0)
    value, _ = integrate_1d(f, 0.0, 1.0, QuadratureSpec(rel_tol=1e-12),
                            breakpoints=[0.3])
    np.testing.assert_allclose(value, 0.3, rtol=1e-13)


def test_integrate_1d_breakpoints_outside_range_ignored():
    value, _ = integrate_1d(np.sin, 0.0, math.pi,
                            breakpoints=[-5.0, 0.0, math.pi, 17.0])
    np.testing.assert_allclose(value, 2.0, rtol=1e-9)


def test_integrate_1d_empty_interval():
    assert integrate_1d(np.sin, 1.0, 1.0) == (0.0, 0.0)
    assert integrate_1d(np.sin, 2.0, -1.0) == (0.0, 0.0)


def test_integrate_1d_nonfinite_integrand_raises():
    with np.errstate(divide="ignore"):
        with pytest.raises(QuadratureError, match="non-finite"):
            integrate_1d(lambda x: 1.0 / x, -1.0, 1.0)


def test_integrate_1d_nonfinite_limits_raise():
    with pytest.raises(ValueError, match="finite"):
        integrate_1d(np.sin, 0.0, np.inf)


def test_integrate_1d_subdivision_budget():
    """Exhausting the panel budget raises, carrying the best estimate."""
    spec = QuadratureSpec(rel_tol=1e-12, max_subdivisions=3)
    with pytest.raises(QuadratureError) as info:
        integrate_1d(lambda x: np.sin(500.0 * x * x), 0.0, 10.0, spec)
    assert info.value.estimate is not None
    assert info.value.error is not None


def test_integrate_family_shared_mesh():
    """One mesh serves several integrands, each meeting its own tolerance."""

    def f(x):
        return np.column_stack([np.sin(x), np.cos(x), x * x])

    vals, errs = _integrate_family(f, 0.0, math.pi / 2, rel_tol=1e-10,
                                   abs_tol=np.zeros(3), max_subdivisions=200)
    exact = [1.0, 1.0, (math.pi / 2) ** 3 / 3.0]
    np.testing.assert_allclose(vals, exact, rtol=1e-9)
    assert vals.shape == (3,) and errs.shape == (3,)


def test_integrate_disk_area():
    value, _ = integrate_disk_xy(lambda x, y: np.ones_like(y), 2.0)
    np.testing.assert_allclose(value, math.pi * 4.0, rtol=1e-8)


def test_integrate_disk_gaussian():
    """integral of exp(-r^2) over a disk of radius R is pi (1 - exp(-R^2))."""
    value, _ = integrate_disk_xy(lambda x, y: np.exp(-(x * x + y * y)), 2.0)
    np.testing.assert_allclose(value, math.pi * (1 - math.exp(-4.0)),
                               rtol=1e-8)


def test_integrate_disk_rejects_bad_radius():
    with pytest.raises(ValueError):
        integrate_disk_xy(lambda x, y: y, 0.0)


_CENTERS = np.array([-3.0, -1.0, 0.0, 0.7, 2.5, 6.0])


@pytest.mark.parametrize("width", [1.4, 2.0, 5.0, 20.0])
def test_lorentz_moments_hermite_vs_closed_form(width):
    i0_ref, i1_ref = faddeeva_moments(_CENTERS, np.full(_CENTERS.shape, width))
    i0, i1 = gauss_lorentz_moments(_CENTERS, np.full(_CENTERS.shape, width))
    np.testing.assert_allclose(i0, i0_ref, rtol=1e-8)
    scale = float(np.max(i0_ref * (np.abs(_CENTERS) + 1.0)))
    np.testing.assert_allclose(i1, i1_ref, rtol=1e-8, atol=1e-8 * scale)


@pytest.mark.parametrize("width", [0.01, 0.1, 0.3, 0.6])
def test_lorentz_moments_adaptive_vs_closed_form(width):
    """Below the Hermite rule's resolution the graded panels take over."""
    i0_ref, i1_ref = faddeeva_moments(_CENTERS, np.full(_CENTERS.shape, width))
    i0, i1 = gauss_lorentz_moments(_CENTERS, np.full(_CENTERS.shape, width),
                                   method="adaptive")
    np.testing.assert_allclose(i0, i0_ref, rtol=1e-7)
    scale = float(np.max(i0_ref * (np.abs(_CENTERS) + 1.0)))
    np.testing.assert_allclose(i1, i1_ref, rtol=1e-7, atol=1e-7 * scale)


def test_lorentz_moments_methods_agree_at_handoff():
    """Hermite and adaptive answers must agree where the code switches."""
    width = np.full(_CENTERS.shape, 1.0)
    i0_h, i1_h = gauss_lorentz_moments(_CENTERS, width)
    i0_a, i1_a = gauss_lorentz_moments(_CENTERS, width, method="adaptive")
    np.testing.assert_allclose(i0_h, i0_a, rtol=1e-6)
    scale = float(np.max(i0_a * (np.abs(_CENTERS) + 1.0)))
    np.testing.assert_allclose(i1_h, i1_a, rtol=1e-6, atol=1e-6 * scale)


@pytest.mark.parametrize("width", [1.0, 1.4, 3.0])
def test_lorentz_moments_order_doubling(width):
    """Doubling the Hermite order must not move the moments by > 1e-6."""
    w = np.full(_CENTERS.shape, width)
    i0_40, i1_40 = gauss_lorentz_moments(_CENTERS, w, rule=gauss_hermite(40))
    i0_80, i1_80 = gauss_lorentz_moments(_CENTERS, w, rule=gauss_hermite(80))
    np.testing.assert_allclose(i0_40, i0_80, rtol=1e-6)
    scale = float(np.max(i0_80 * (np.abs(_CENTERS) + 1.0)))
    np.testing.assert_allclose(i1_40, i1_80, rtol=1e-6, atol=1e-6 * scale)


def test_lorentz_moments_broadcast():
    center = np.array([[-1.0, 0.0, 2.0], [1.0, 3.0, -2.0]])
    width = np.array([[1.5], [2.5]])
    i0, i1 = gauss_lorentz_moments(center, width)
    assert i0.shape == (2, 3) and i1.shape == (2, 3)
    i0_ref, _ = faddeeva_moments(center, np.broadcast_to(width, (2, 3)))
    np.testing.assert_allclose(i0, i0_ref, rtol=1e-8)


def test_lorentz_moments_validation():
    with pytest.raises(ValueError):
        gauss_lorentz_moments(0.0, 0.0)
    with pytest.raises(ValueError):
        gauss_lorentz_moments(0.0, -1.0)
    with pytest.raises(ValueError):
        gauss_lorentz_moments(0.0, 1.0, method="simpson")
