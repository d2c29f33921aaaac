import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gamma

from disclab.bodies import Ball, Ellipsoid
from disclab.errors import DomainError, PreconditionError
from disclab.lemmas import (
    ExponentPack,
    eta,
    extent_growth,
    n2_rhs,
    pair_mass,
    pair_quadratic,
    sigma,
    tau,
    varsigma,
    verify_crucial,
    verify_ellipse_integral,
    verify_integral_lemma,
    verify_mu_lemma,
    verify_n2_reduction,
    zeta,
)
from disclab.lemmas.verify import crucial_integral, mu_integral, pair_integral
from disclab.measures import Dirac, SmoothBump, Uniform

ELLIPSE = Ellipsoid(np.diag([2.0, 1.0]))


def mp_quad(f, pts):
    """mpmath quadrature on decade panels; the slow power tails need them."""
    with mpmath.workdps(30):
        return float(mpmath.quad(f, pts))


def decades(lo, hi, extra=()):
    pts = {mpmath.mpf(10) ** k for k in range(lo, hi + 1)} | {mpmath.mpf(e) for e in extra}
    return [0] + sorted(p for p in pts if p > 0)


def riesz_constant(a, b):
    """``int_{R^2} |x|^{-a} |e - x|^{-b} dx`` for a unit vector ``e``."""
    return (math.pi * gamma(1 - a / 2) * gamma(1 - b / 2) * gamma((a + b) / 2 - 1)
            / (gamma(a / 2) * gamma(b / 2) * gamma(2 - (a + b) / 2)))


# ---- exponents ------------------------------------------------------------------


def test_exponent_examples():
    assert tau(0.7, 2.0) == 0.7
    assert tau(2.0, 3.0) == 1.0
    assert sigma(1.0, 1.5) == 1 and sigma(0.6, 0.6) == 1 and sigma(0.6, 0.7) == 0
    assert varsigma(2, 0.5, 1.0) == 1 and varsigma(2, 0.8, 1.0) == 0
    assert zeta(2, 1.6, 0.7) == pytest.approx(0.4)
    assert zeta(3, 1.0, 2.0) == 1.0
    pack = ExponentPack(2, 1.6, 0.4, 1.0)
    assert pack.as_dict()["eta"] == pack.eta == eta(2, 1.6, 0.4)


def test_eta_junction_values():
    # the log appears on the line alpha = d - beta
    assert eta(2, 1.6, 0.4) == 1
    assert eta(2, 1.3, 0.2) == 0


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 6), st.floats(0.5, 6), st.floats(0, 3), st.floats(0.01, 3))
def test_exponents_ranges(d, alpha, beta, gamma_):
    assert 0 <= tau(beta, gamma_) <= 1
    assert sigma(beta, gamma_) in (0, 1)
    assert varsigma(d, beta, gamma_) in (0, 1)
    assert zeta(d, alpha, beta) <= 1
    assert eta(d, alpha, beta) in (0, 1, 2)


# ---- crucial one-dimensional integrals ---------------------------------------------


def test_crucial_case2_closed_form():
    v, err = crucial_integral(2, 1.5, 0.0, 0.0)
    assert v == pytest.approx(4.0, abs=1e-10)
    for a in (0.5, 1.2, 1.9):
        assert crucial_integral(2, a, 0.0, 0.0)[0] == pytest.approx(1 / (2 - a) ** 2, rel=1e-10)


def test_crucial_case2_with_cutoff():
    v = crucial_integral(2, 1.5, 0.7, 0.0)[0]
    ref = mp_quad(lambda t: t**-0.5 * -mpmath.log(t) * (1 + t) ** -0.7, decades(-20, 0))
    assert v == pytest.approx(ref, rel=1e-10)
    rep = verify_crucial(2, 1.5, 0.7, X_max=100, n_X=8)
    assert math.isfinite(rep.sup_ratio) and rep.resolved


@pytest.mark.parametrize("X", [-30.0, 0.5, 7.0, 400.0])
def test_crucial_case1_against_mpmath(X):
    a, b = 1.6, 0.7
    f = lambda t: (1 + abs(X - t)) ** -b * t ** (1 - a)
    pts = decades(0, 30, [X] if X > 0 else []) + [mpmath.inf]
    assert crucial_integral(1, a, b, X)[0] == pytest.approx(mp_quad(f, pts), rel=1e-9)


def test_crucial_case1_negative_X_bound():
    rep = verify_crucial(1, 1.6, 0.7, X_max=1000, n_X=12)
    neg = [crucial_integral(1, 1.6, 0.7, -X)[0] / (1 + X) ** (2 - 1.6 - 0.7)
           for X in np.geomspace(1, 1000, 12)]
    assert max(neg) <= rep.sup_ratio * (1 + 1e-12)


def test_crucial_case3_junction_stable():
    small = verify_crucial(3, 1.5, 0.5, n_X=8, T_max=1e3, n_T=6)
    large = verify_crucial(3, 1.5, 0.5, n_X=8, T_max=1e4, n_T=7)
    assert extent_growth(small, large) < 0.05
    assert large.resolved


def test_crucial_preconditions():
    with pytest.raises(PreconditionError):
        verify_crucial(1, 1.2, 0.5)
    with pytest.raises(PreconditionError):
        verify_crucial(4, 0.9, 0.5)
    with pytest.raises(DomainError):
        verify_crucial(7, 1.5, 0.5)


# ---- spherical integral ----------------------------------------------------------------


@pytest.mark.parametrize("Y", [3.0, 50.0, 800.0])
def test_mu_integral_without_cutoff(Y):
    v, _ = mu_integral(np.array([3.0, 1.0]), Y, 1.0, 0.0, 0.5)
    assert v == pytest.approx(2 * math.pi * 0.5 * Y, rel=1e-12)


def test_mu_lemma_beta0_ratio_constant():
    rep = verify_mu_lemma(1.0, 0.0, k_values=(1.0, 10.0), Y_max=1000, n_Y=6)
    # bound Y^{1 - 0}: the ratio is 2 pi at every grid point
    assert rep.sup_ratio == pytest.approx(2 * math.pi, rel=1e-10)


def test_mu_lemma_ball_stable():
    small = verify_mu_lemma(1.0, 1.0, body=Ball(1.0), directions=(0.0,), Y_max=500, n_Y=5)
    large = verify_mu_lemma(1.0, 1.0, body=Ball(1.0), directions=(0.0,), Y_max=1000, n_Y=6)
    assert extent_growth(small, large) < 0.05
    assert large.resolved


# ---- pair integrals ---------------------------------------------------------------------


@pytest.mark.parametrize("alpha", [1.2, 1.4, 1.7])
def test_pair_integral_riesz_composition(alpha):
    v, _ = pair_integral(np.array([1.0, 0.0]), 0.0, alpha, 0.0)
    assert v == pytest.approx(riesz_constant(alpha, alpha), rel=1e-9)


def test_integral_lemma_beta0_homogeneous():
    alpha = 1.4
    ratios = [pair_integral(kn * np.array([0.6, 0.8]), 0.0, alpha, 0.0)[0] * kn ** (2 * alpha - 2)
              for kn in np.geomspace(2, 100, 6)]
    assert max(ratios) / min(ratios) - 1 <= 0.02


def test_integral_lemma_junction_stable():
    small = verify_integral_lemma(1.6, 0.4, k_max=100, n_k=4, n_Y=4, directions=(0.0,))
    large = verify_integral_lemma(1.6, 0.4, k_max=200, n_k=4, n_Y=4, directions=(0.0,))
    assert extent_growth(small, large) < 0.05
    assert large.resolved


def test_integral_lemma_preconditions():
    with pytest.raises(PreconditionError):
        verify_integral_lemma(0.9, 0.5)
    with pytest.raises(PreconditionError):
        verify_integral_lemma(1.5, 0.5, d=3)


# ---- ellipse reduction --------------------------------------------------------------------


@pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0])
def test_case5_at_zero_frequency(alpha):
    # |x| > 1 only: 2 pi int_1^inf rho^{1 - 2 alpha} d rho = pi / (alpha - 1)
    v, _ = pair_integral(np.zeros(2), 0.0, alpha, 0.0, inner=1.0)
    assert v == pytest.approx(math.pi / (alpha - 1), rel=1e-10)


def test_case5_stated_bound():
    rep = verify_ellipse_integral(5, 2.0, k_max=200, n_k=4)
    assert rep.extra["bound"] == 0.5
    assert rep.sup_integral <= 0.5 + 1e-6


def test_case3_stable_over_k():
    small = verify_ellipse_integral(3, 1.5, 0.5, k_max=100, n_k=5, n_Y=4)
    large = verify_ellipse_integral(3, 1.5, 0.5, k_max=200, n_k=6, n_Y=4)
    assert extent_growth(small, large) < 0.05


def test_case1_ratio_finite_with_aligned_cutoff():
    rep = verify_ellipse_integral(1, 1.9, 0.5, k_max=50, n_k=3, n_Y=3)
    assert math.isfinite(rep.sup_ratio) and rep.resolved


def test_ellipse_preconditions():
    with pytest.raises(PreconditionError):
        verify_ellipse_integral(3, 1.6, 0.5)
    with pytest.raises(PreconditionError):
        verify_ellipse_integral(5, 0.9)
    with pytest.raises(PreconditionError):
        verify_ellipse_integral(4, 0.8, 0.1)


# ---- fourth-moment reduction ------------------------------------------------------------


@pytest.mark.parametrize("k", [(0.0, 0.0), (0.5, 0.0), (3.0, 1.0)])
def test_pair_mass_matches_pair_integral(k):
    k = np.array(k)
    ref, _ = pair_integral(k, 0.0, 1.7, 0.0, inner=1.0)
    assert pair_mass(k, 1.7, 0.1, lam=0) == pytest.approx(ref, rel=0.005)


def test_pair_quadratic_beta0_factorizes():
    k = np.array([2.0, 1.0])
    m = pair_mass(k, 1.5, 0.3)
    assert pair_quadratic(k, 1.5, 0.0, 0.3) == pytest.approx(m * m, rel=1e-14)
    q = pair_quadratic(k, 1.5, 0.5, 0.3)
    assert 0 < q <= m * m


@pytest.fixture(scope="module")
def n2_reports():
    return {z: verify_n2_reduction(ELLIPSE, z, 0.5, 0.3, Uniform(), 20.0) for z in (1.5, 2.0)}


def test_n2_rhs_nonincreasing_in_z(n2_reports):
    assert n2_reports[2.0].rhs <= n2_reports[1.5].rhs


def test_n2_both_sides_finite(n2_reports):
    for rep in n2_reports.values():
        assert not rep.inconclusive
        assert 0 < rep.lhs < math.inf and 0 < rep.rhs < math.inf
        assert rep.to_dict()["ratio"] == pytest.approx(rep.lhs / rep.rhs)


def test_n2_preconditions():
    with pytest.raises(PreconditionError):
        verify_n2_reduction(Ball(1.0, 3), 1.5, 0.5, 0.3, Uniform(), 20.0)
    with pytest.raises(PreconditionError):
        verify_n2_reduction(ELLIPSE, 1.5, None, 0.3, SmoothBump(), 20.0)
    with pytest.raises(PreconditionError):
        n2_rhs(ELLIPSE, 1.5, -1.0, 0.3)
    with pytest.raises(DomainError):
        verify_n2_reduction(ELLIPSE, 1.5, 0.0, 2.0, Dirac(), 20.0)
