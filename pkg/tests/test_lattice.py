import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from disclab.bodies import Ball, Ellipsoid, PerturbedBall
from disclab.errors import DomainError
from disclab.lattice import brute_force_count, count_grid, count_lattice, discrepancy, volume

ELLIPSE = Ellipsoid(np.diag([2.0, 1.0]))
TILTED = Ellipsoid([[1.5, 0.4], [-0.2, 0.8]])
PERTURBED = PerturbedBall(1.0, [((3,), 0.05)])


def loop_count(radius, r, x):
    """Plain double loop over the bounding square: points with |k + x| <= r * radius."""
    n = 0
    R = int(math.ceil(r * radius)) + 2
    for i in range(-R, R + 1):
        for j in range(-R, R + 1):
            if (i + x[0]) ** 2 + (j + x[1]) ** 2 <= (r * radius) ** 2:
                n += 1
    return n


def test_count_examples():
    assert count_lattice(Ball(1.0), 2.0, [0, 0]) == 13 == loop_count(1.0, 2.0, (0, 0))
    assert count_lattice(Ball(1.0), 0.5, [0, 0]) == 1


def test_count_r100_against_loop():
    c = count_lattice(Ball(1.0), 100.0, [0, 0])
    assert c == brute_force_count(Ball(1.0), 100.0, [0, 0]) == loop_count(1.0, 100.0, (0, 0))


def test_discrepancy_examples():
    s = discrepancy(Ball(1.0), 2.0, [0, 0])
    assert s.D == pytest.approx(13 - 4 * math.pi, abs=1e-12)
    e = discrepancy(ELLIPSE, 1.0, [0.5, 0.5])
    assert e.count == brute_force_count(ELLIPSE, 1.0, [0.5, 0.5])
    assert e.D == pytest.approx(e.count - 2 * math.pi, abs=1e-12)


def test_nonpositive_radius_rejected():
    for r in (0.0, -1.0, math.inf):
        with pytest.raises(DomainError):
            count_lattice(Ball(1.0), r, [0, 0])


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([Ball(1.0), TILTED, PERTURBED, Ball(1.0, 3)]),
       st.floats(0.1, 15), st.data())
def test_slab_equals_brute_force(body, r, data):
    x = np.array(data.draw(st.lists(st.floats(-1, 1), min_size=body.dim, max_size=body.dim)))
    if body.dim == 3:
        r = min(r, 6.0)
    assert count_lattice(body, r, x) == brute_force_count(body, r, x)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.5, 20), st.integers(-3, 3), st.integers(-3, 3), st.floats(0, 1), st.floats(0, 1))
def test_discrepancy_periodic(r, k1, k2, x1, x2):
    a = discrepancy(TILTED, r, [x1, x2])
    b = discrepancy(TILTED, r, [x1 + k1, x2 + k2])
    assert a.count == b.count


@settings(max_examples=25, deadline=None)
@given(st.floats(0.5, 20), st.floats(0, 2), st.floats(0, 1), st.floats(0, 1))
def test_count_monotone_in_r(r, dr, x1, x2):
    assert count_lattice(ELLIPSE, r, [x1, x2]) <= count_lattice(ELLIPSE, r + dr, [x1, x2])


def test_count_grid_matches_pointwise():
    M = 16
    grid = count_grid(TILTED, 7.3, M)
    rng = np.random.default_rng(0)
    for j in rng.integers(0, M, (20, 2)):
        assert grid[tuple(j)] == count_lattice(TILTED, 7.3, j / M)


def test_count_grid_mean_close_to_volume():
    # mean = count(rM, 0) / M^2, so the error is at most perimeter * r / M
    for body, r in ((Ball(1.0), 20.0), (ELLIPSE, 11.0)):
        M = 128
        mean = count_grid(body, r, M).mean()
        assert abs(mean - r**2 * volume(body)) <= 2 * math.pi * body.support_bounds()[1] * r / M


def test_count_grid_requires_power_of_two():
    with pytest.raises(DomainError):
        count_grid(Ball(1.0), 3.0, 12)
