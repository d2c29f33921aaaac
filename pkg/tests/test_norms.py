import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from disclab import spectra
from disclab.bodies import Ball, Ellipsoid, PerturbedBall
from disclab.errors import DomainError
from disclab.measures import Dirac, Power, Uniform
from disclab.norms import (
    Resolution,
    _exact_field,
    critical_exponent,
    critical_lines,
    estimate_norm,
    estimate_norms,
    geometric_ladder,
    grid_pmean,
    interpolated_exponent,
    scan_growth,
    scan_norms,
)

ELLIPSE = Ellipsoid(np.diag([2.0, 1.0]))


# ---- exponent tables ----------------------------------------------------------


def test_critical_examples():
    c = critical_exponent(2, 0.0)
    assert (c.p_critical, c.log_power_at_critical) == (4.0, 0.25)
    c = critical_exponent(3, 1.5)
    assert (c.p_critical, c.log_power_at_critical) == (4.0, 0.5)
    c = critical_exponent(2, 1.5, "ellipse")
    assert c.p_critical == 6.0
    assert c.log_power_at_critical == pytest.approx(2 / 3)


def test_critical_corollary_dirac():
    # beta = 0 gives p = 2d / (d - 1) in every dimension
    for d in range(2, 7):
        assert critical_exponent(d, 0.0).p_critical == pytest.approx(2 * d / (d - 1))


def test_critical_junction_log_powers():
    assert critical_exponent(2, 0.4).log_power_at_critical == pytest.approx(1 / 4.8 + 1 / 12)
    assert critical_exponent(2, 0.5).log_power_at_critical == pytest.approx(11 / 54 + 1 / 9)
    assert critical_exponent(3, 1.0).log_power_at_critical == pytest.approx(0.75)
    assert critical_exponent(2, 1.0, "ellipse").log_power_at_critical == pytest.approx(5 / 6)


def test_critical_lines_examples():
    z2, z4, z6 = critical_lines(3, 0.0)
    assert (z2, z4, z6) == (1.5, 9 / 4, None)
    assert critical_lines(2, 2.0, "ellipse")[2] == pytest.approx(1.5)
    # generic plane: max{(6 - b)/4, (6 - 1/2)/4}; 11/8 is the floor reached for b >= 1/2
    assert critical_lines(2, 0.0)[1] == pytest.approx(1.5)
    assert critical_lines(2, 0.5)[1] == pytest.approx(11 / 8)
    assert critical_lines(2, 1.0)[1] == pytest.approx(11 / 8)
    assert critical_lines(2, 0.0)[2] == pytest.approx(5 / 3)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.floats(0, 2.5))
def test_interpolation_reproduces_table(d, beta):
    a = critical_exponent(d, beta)
    b = interpolated_exponent(d, beta)
    assert a.p_critical == pytest.approx(b.p_critical, abs=1e-12)
    assert a.log_power_at_critical == pytest.approx(b.log_power_at_critical, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.floats(0, 2.4), st.floats(0, 0.1))
def test_critical_p_nondecreasing_in_beta(d, beta, step):
    assert critical_exponent(d, beta + step).p_critical >= critical_exponent(d, beta).p_critical - 1e-12


@pytest.mark.parametrize("d,b", [(2, 0.4), (2, 0.5), (3, 1.0), (4, 1.0)])
def test_table_continuous_at_junctions(d, b):
    lo = critical_exponent(d, b - 1e-9).p_critical
    hi = critical_exponent(d, b + 1e-9).p_critical
    assert abs(lo - hi) <= 1e-7
    assert critical_exponent(d, b).p_critical == pytest.approx(lo, abs=1e-7)


def test_table_domain_errors():
    with pytest.raises(DomainError):
        critical_exponent(3, 0.3, "ellipse")
    with pytest.raises(DomainError):
        critical_exponent(1, 0.3)
    with pytest.raises(DomainError):
        critical_lines(2, -0.1)


# ---- norm estimates ------------------------------------------------------------


def test_parseval_oracle_p2():
    r = 20.0
    N = 1500
    n = np.arange(-N, N + 1, dtype=float)
    n1, n2 = np.meshgrid(n, n, indexing="ij")
    keep = (n1**2 + n2**2 > 0) & (n1**2 + n2**2 <= N * N)
    xi = r * np.stack([n1[keep], n2[keep]], axis=-1)
    series = float(np.sum(r**4 * np.abs(spectra.ft_exact(Ball(1.0), xi)) ** 2)) / r
    I = estimate_norm(Ball(1.0), Dirac(), 2, r, Resolution(grid=512))
    assert I**2 == pytest.approx(series, rel=0.02)


def test_dirac_collapse_bit_identical():
    for p in (2.0, 3.0, 4.0):
        I = estimate_norm(ELLIPSE, Dirac(), p, 37.5)
        assert I == grid_pmean(_exact_field(ELLIPSE, 37.5, 256), p) ** (1 / p)


def test_norm_monotone_in_p():
    for mu in (Dirac(), Uniform(), Power(0.4)):
        vals = estimate_norms(ELLIPSE, mu, [2, 3, 4, 6], 30.0, Resolution(r_budget=8))
        assert np.all(np.diff(vals) >= -1e-12)


@pytest.mark.parametrize("R", [20.0, 50.0, 100.0])
@pytest.mark.parametrize("body", [Ball(1.0), ELLIPSE], ids=["ball", "ellipse"])
def test_spectral_agrees_with_exact(body, R):
    ex = estimate_norms(body, Dirac(), [2, 4], R, Resolution(method="exact"))
    sp = estimate_norms(body, Dirac(), [2, 4], R, Resolution(method="spectral"))
    np.testing.assert_allclose(sp, ex, rtol=0.05)


def test_spectral_gap_shrinks_with_delta():
    ex = estimate_norm(Ball(1.0), Dirac(), 2, 20.0, Resolution(grid=512))
    gaps = [abs(estimate_norm(Ball(1.0), Dirac(), 2, 20.0,
                              Resolution(method="spectral", delta=d)) / ex - 1)
            for d in (0.1, 0.05, 0.02)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] <= 0.01


def test_spectral_for_perturbed_body_runs():
    body = PerturbedBall(1.0, [((3,), 0.05)])
    I = estimate_norm(body, Dirac(), 2, 30.0, Resolution(method="spectral"))
    assert 0.3 < I < 2.0


def test_norm_domain_errors():
    with pytest.raises(DomainError):
        estimate_norm(Ball(1.0), Dirac(), 0.5, 20.0)
    with pytest.raises(DomainError):
        estimate_norm(Ball(1.0), Dirac(), 2, 1.0)
    with pytest.raises(DomainError):
        Resolution(method="mc")
    with pytest.raises(DomainError):
        scan_norms(Ball(1.0), Dirac(), [2], [10, 20, 30])


# ---- growth scans ------------------------------------------------------------------


def test_growth_p3_dirac_bounded():
    rep = scan_growth(Ball(1.0), Dirac(), 3, geometric_ladder(10, 2000, 24))
    assert rep.fit.model == "bounded"
    assert rep.fit.spread <= 1.5


def test_growth_ellipse_uniform_p5_bounded():
    rep = scan_growth(ELLIPSE, Uniform(), 5, geometric_ladder(10, 1000, 12), Resolution(r_budget=16))
    assert rep.fit.model == "bounded"


def test_scan_norms_shape_and_consistency():
    ladder = geometric_ladder(10, 100, 8)
    I = scan_norms(ELLIPSE, Dirac(), [2, 4], ladder)
    assert I.shape == (2, 8)
    assert I[0, 3] == estimate_norm(ELLIPSE, Dirac(), 2, ladder[3])
    assert math.isfinite(I.sum())
