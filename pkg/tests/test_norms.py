import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zonekit.norms import (LpNorm, convexity_modulus_estimate, distance, norm,
                           pairwise_distances, set_distance)

coord = st.floats(-50, 50, allow_nan=False)
vec = st.tuples(coord, coord).map(np.array)
p_value = st.one_of(st.floats(1.0, 20.0), st.just(math.inf))


def test_cube_root_of_two():
    assert norm((1, 1), LpNorm(3)) == pytest.approx(2 ** (1 / 3), abs=1e-12)


def test_l1_and_linf_examples():
    assert norm((3, -4), LpNorm(1)) == 7
    assert norm((3, -4), LpNorm(math.inf)) == 4
    assert norm((3, -4), LpNorm(2)) == pytest.approx(5)


def test_set_distance_example():
    assert set_distance((0, 0), [(3, 4), (1, 1)], LpNorm(2)) == pytest.approx(math.sqrt(2))


def test_set_distance_empty_raises():
    with pytest.raises(ValueError):
        set_distance((0, 0), np.zeros((0, 2)), LpNorm(2))


@pytest.mark.parametrize("p", [0.5, 0, -1, float("nan")])
def test_rejects_p_below_one(p):
    with pytest.raises(ValueError):
        LpNorm(p)


def test_uniform_convexity_flags():
    assert not LpNorm(1).uniformly_convex()
    assert not LpNorm(math.inf).uniformly_convex()
    assert LpNorm(1.01).uniformly_convex() and LpNorm(40).uniformly_convex()


def test_large_p_does_not_overflow():
    assert norm((1e200, 1e200), LpNorm(50)) == pytest.approx(1e200 * 2 ** (1 / 50))


def test_pairwise_matches_scalar_distance():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(7, 2)), rng.normal(size=(5, 2))
    n = LpNorm(3.5)
    D = pairwise_distances(a, b, n)
    for i in range(7):
        for j in range(5):
            assert D[i, j] == pytest.approx(distance(a[i], b[j], n))


def test_modulus_at_two_for_l2():
    # |x - y| = 2 forces y = -x, so the midpoint vanishes
    assert convexity_modulus_estimate(LpNorm(2), 2.0) == pytest.approx(1.0, abs=1e-6)


def test_modulus_closed_form_l2():
    # delta(eps) = 1 - sqrt(1 - eps^2/4) for the Euclidean norm
    for eps in (0.2, 0.5, 1.0, 1.5):
        assert convexity_modulus_estimate(LpNorm(2), eps) == pytest.approx(
            1 - math.sqrt(1 - eps ** 2 / 4), abs=1e-4)


@pytest.mark.parametrize("p", [1, math.inf])
def test_modulus_vanishes_for_flat_norms(p):
    assert convexity_modulus_estimate(LpNorm(p), 0.5) == pytest.approx(0.0, abs=1e-9)


@given(vec, st.floats(-10, 10), p_value)
def test_absolute_homogeneity(v, lam, p):
    n = LpNorm(p)
    assert n.norm(lam * v) == pytest.approx(abs(lam) * n.norm(v), rel=1e-9, abs=1e-9)


@given(vec, vec, p_value)
def test_triangle_inequality(u, v, p):
    n = LpNorm(p)
    assert n.norm(u + v) <= n.norm(u) + n.norm(v) + 1e-9 * (1 + n.norm(u) + n.norm(v))


@given(vec, st.floats(1.0, 10.0), st.floats(0.0, 10.0))
def test_monotone_decreasing_in_p(v, p, dp):
    assert LpNorm(p + dp).norm(v) <= LpNorm(p).norm(v) * (1 + 1e-12) + 1e-12


@given(vec, p_value)
def test_bounded_by_l1_and_linf(v, p):
    x = LpNorm(p).norm(v)
    assert LpNorm(math.inf).norm(v) * (1 - 1e-12) <= x <= LpNorm(1).norm(v) * (1 + 1e-12) + 1e-12


@settings(max_examples=25)
@given(st.floats(1.2, 8.0), st.floats(0.3, 1.8))
def test_modulus_positive_for_uniformly_convex(p, eps):
    assert convexity_modulus_estimate(LpNorm(p), eps, samples=120, rounds=3) > 0
