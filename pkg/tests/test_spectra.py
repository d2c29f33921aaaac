import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from disclab.bodies import Ball, Ellipsoid, PerturbedBall
from disclab.errors import DomainError
from disclab.fitting import envelope_slope
from disclab.lattice import volume
from disclab.spectra import (
    asymptotic_coefficients,
    curvature_at_normal,
    ft_asymptotic,
    ft_exact,
    hankel_coefficient,
)

ELLIPSE = Ellipsoid(np.diag([2.0, 1.0]))
PERTURBED = PerturbedBall(1.0, [((3,), 0.05)])


def polar_ft(radial, xi):
    """Direct 2-D quadrature of ``int exp(-2 pi i xi . x) dx`` over a star body."""
    def part(f):
        return integrate.dblquad(
            lambda rho, th: f(-2 * np.pi * rho * (xi[0] * np.cos(th) + xi[1] * np.sin(th))) * rho,
            0, 2 * np.pi, 0, radial, epsabs=1e-12, epsrel=1e-12)[0]
    return complex(part(np.cos), part(np.sin))


def test_zero_frequency_is_volume():
    for body in (Ball(1.0), ELLIPSE, PERTURBED, Ball(1.0, 3)):
        assert ft_exact(body, np.zeros(body.dim)).real == pytest.approx(volume(body), rel=1e-10)


def test_ball_unit_frequency():
    val = ft_exact(Ball(1.0), np.array([1.0, 0.0]))
    assert val.real == pytest.approx(float(mpmath.besselj(1, 2 * mpmath.pi)), abs=1e-14)
    assert val == pytest.approx(polar_ft(lambda th: 1.0, (1.0, 0.0)), abs=1e-10)


def test_ellipse_affine_rule():
    val = ft_exact(ELLIPSE, np.array([0.3, 0.7]))
    assert val == pytest.approx(2 * ft_exact(Ball(1.0), np.array([0.6, 0.7])), abs=1e-14)
    oracle = integrate.dblquad(
        lambda y, x: math.cos(2 * math.pi * (0.3 * x + 0.7 * y)),
        -2, 2, lambda x: -math.sqrt(max(0.0, 1 - x * x / 4)),
        lambda x: math.sqrt(max(0.0, 1 - x * x / 4)), epsabs=1e-12)[0]
    assert val.real == pytest.approx(oracle, abs=1e-9)


@pytest.mark.parametrize("xi", [(0.7, 1.3), (2.0, -0.5), (0.0, 3.1)])
def test_perturbed_ft_against_polar_quadrature(xi):
    radial = lambda th: float(PERTURBED.radial(np.array([math.cos(th), math.sin(th)])))
    assert ft_exact(PERTURBED, np.array(xi)) == pytest.approx(polar_ft(radial, xi), abs=1e-8)


def test_ball_3d_closed_form():
    # chi_hat = (sin t - t cos t) * 4 pi / t^3 with t = 2 pi |xi|
    t = 2 * math.pi * 0.9
    assert ft_exact(Ball(1.0, 3), np.array([0.9, 0, 0])).real == pytest.approx(
        4 * math.pi * (math.sin(t) - t * math.cos(t)) / t**3, abs=1e-13)


def test_hermitian_symmetry():
    rng = np.random.default_rng(0)
    xi = rng.uniform(-20, 20, (100, 2))
    for body in (Ball(1.0), ELLIPSE):
        assert np.max(np.abs(ft_exact(body, -xi) - np.conj(ft_exact(body, xi)))) <= 1e-12
    xs = xi[:10] / 4
    assert np.max(np.abs(ft_exact(PERTURBED, -xs) - np.conj(ft_exact(PERTURBED, xs)))) <= 1e-7


def test_scaling_law():
    rng = np.random.default_rng(1)
    for _ in range(100):
        R = rng.uniform(0.2, 5)
        xi = rng.uniform(-10, 10, 2)
        lhs = ft_exact(Ball(R), xi)
        rhs = R**2 * ft_exact(Ball(1.0), R * xi)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


def test_decay_envelope_ellipse():
    rng = np.random.default_rng(2)
    rho = rng.uniform(10, 1000, 1000)
    th = rng.uniform(0, 2 * np.pi, 1000)
    u = np.stack([np.cos(th), np.sin(th)], axis=-1)
    env = np.max(rho**1.5 * np.abs(ft_exact(ELLIPSE, rho[:, None] * u)))
    t = np.linspace(0, 2 * np.pi, 4000)
    v = np.stack([np.cos(t), np.sin(t)], axis=-1)
    ref = np.max((ELLIPSE.curvature(v) ** -0.5 + ELLIPSE.curvature(-v) ** -0.5) / (2 * np.pi))
    assert env == pytest.approx(ref, rel=0.10)


def test_leading_coefficient_modulus():
    a, b = asymptotic_coefficients(Ball(1.0), np.array([[1.0, 0.0], [0.6, 0.8]]), 0)
    np.testing.assert_allclose(np.abs(a[0]), 1 / (2 * np.pi), rtol=1e-14)
    np.testing.assert_allclose(np.abs(b[0]), 1 / (2 * np.pi), rtol=1e-14)
    # the perturbed route agrees with the closed form for a ball
    p = PerturbedBall(1.0, [((3,), 0.0)])
    ap, _ = asymptotic_coefficients(p, np.array([[0.6, 0.8]]), 0)
    assert ap[0, 0] == pytest.approx(a[0, 1], abs=1e-9)


def test_hankel_coefficients():
    # J_1 expansion: a_1 = (4 - 1) / 8, a_2 = (4 - 1)(4 - 9) / 128
    assert hankel_coefficient(1, 1) == pytest.approx(3 / 8)
    assert hankel_coefficient(1, 2) == pytest.approx(-15 / 128)


def _sweep_error(h):
    rng = np.random.default_rng(3)
    rho = np.geomspace(5, 200, 2000)
    th = rng.uniform(0, 2 * np.pi, rho.size)
    xi = rho[:, None] * np.stack([np.cos(th), np.sin(th)], axis=-1)
    err = np.abs(ft_exact(Ball(1.0), xi) - ft_asymptotic(Ball(1.0), xi, h))
    return rho, err


@pytest.mark.parametrize("h,limit", [(0, -2.4), (1, -3.4)])
def test_asymptotic_error_slope(h, limit):
    rho, err = _sweep_error(h)
    # the error oscillates through zeros; the upper envelope carries the order
    assert envelope_slope(rho, err, blocks=10).slope <= limit


def test_asymptotic_matches_exact_for_perturbed_at_moderate_frequency():
    xi = np.array([30.0, 40.0])
    err = abs(ft_exact(PERTURBED, xi) - ft_asymptotic(PERTURBED, xi, 0))
    assert err <= 0.2 * 50**-1.5


def test_asymptotic_rejects_low_frequency():
    with pytest.raises(DomainError):
        ft_asymptotic(Ball(1.0), np.array([0.5, 0.0]))
    with pytest.raises(DomainError):
        asymptotic_coefficients(PERTURBED, np.array([[1.0, 0.0]]), 1)


def test_curvature_examples():
    assert curvature_at_normal(Ball(2.0), np.array([1.0, 0.0])) == pytest.approx(0.5)
    assert curvature_at_normal(ELLIPSE, np.array([1.0, 0.0])) == pytest.approx(2.0)
    assert curvature_at_normal(ELLIPSE, np.array([0.0, 1.0])) == pytest.approx(0.25)
    with pytest.raises(DomainError):
        curvature_at_normal(Ball(1.0), np.array([1.0, 1.0]))


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 2 * math.pi))
def test_ellipse_curvature_formula(t):
    # curvature radius g + g'' = (ab)^2 / g^3 for the support g(u) = |M u|
    u = np.array([math.cos(t), math.sin(t)])
    K = curvature_at_normal(ELLIPSE, u)
    assert K == pytest.approx(np.linalg.norm(np.diag([2.0, 1.0]) @ u) ** 3 / 4.0, rel=1e-10)
