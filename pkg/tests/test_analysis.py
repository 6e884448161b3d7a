import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zonekit.analysis import (JumpReport, ProbeError, StabilityTable, decomposition_check,
                              jitter, stability_probe, stream, t_jump_scan)
from zonekit.dominance import PointSetDistance, dom_fan
from zonekit.norms import LpNorm
from zonekit.region import ConvexRegion

CROSS_P = np.array([[0.0, 0.0]])
CROSS_A = np.array([[2.0, 0.0], [-2.0, 0.0], [0.0, -2.0]])
TWO_P, TWO_A = np.array([[-1.0, 0.0]]), np.array([[1.0, 0.0]])


def square(p):
    return ConvexRegion.square(-3, 3, LpNorm(p))


def fan_for(P, A, X, M=720):
    return dom_fan(P, PointSetDistance(A, X.norm), X, M, 1e-6 * X.diameter)


def test_streams_are_reproducible_and_independent():
    a = stream(7, "stability", 0, 1).random(4)
    assert np.array_equal(a, stream(7, "stability", 0, 1).random(4))
    assert not np.array_equal(a, stream(7, "stability", 0, 2).random(4))
    assert not np.array_equal(a, stream(7, "scene").random(4))


@settings(max_examples=30)
@given(st.floats(0.01, 0.5), st.sampled_from([1.0, 2.0, 3.0, math.inf]), st.integers(0, 999))
def test_jitter_stays_in_delta_ball_and_region(delta, p, seed):
    X = square(p)
    pts = np.array([[0.0, 0.0], [3.0, 3.0], [-2.99, 1.0]])
    out = jitter(pts, delta, X, np.random.default_rng(seed))
    assert np.all(X.contains(out))
    assert np.all(X.norm.norm(out - pts) < delta)


def test_zero_delta_measures_zero():
    table = stability_probe(TWO_P, TWO_A, square(2), [0.0], trials=3, n=100)
    assert table.measured == [0.0]


def test_stability_two_singletons_l2():
    table = stability_probe(TWO_P, TWO_A, square(2), [0.1, 0.05, 0.025], trials=20, n=200)
    assert table.monotone()
    assert table.measured[-1] <= 0.1
    assert [r[0] for r in table.rows] == [0.1, 0.05, 0.025]


def test_stability_counterexample_linf_does_not_shrink():
    table = stability_probe(CROSS_P, CROSS_A, square(math.inf), [0.1, 0.05, 0.025],
                            trials=20, n=200)
    # outside uniform convexity a tiny jitter can move the region a lot
    assert table.measured[-1] > 10 * 0.025


def test_stability_is_seeded():
    a = stability_probe(TWO_P, TWO_A, square(3), [0.1], trials=4, n=80, seed=11)
    b = stability_probe(TWO_P, TWO_A, square(3), [0.1], trials=4, n=80, seed=11)
    assert a.rows == b.rows and a.seed == 11


@pytest.mark.parametrize("deltas", [[0.4], [0.1, 0.1], [0.05, 0.1], [-0.01]])
def test_stability_rejects_bad_deltas(deltas):
    # d(P, A) = 2, so deltas must lie in [0, 1/3)
    with pytest.raises(ProbeError):
        stability_probe(TWO_P, TWO_A, square(2), deltas, trials=1, n=50)


def test_stability_rejects_touching_sets():
    with pytest.raises(ProbeError):
        stability_probe(TWO_P, TWO_P, square(2), [0.01], trials=1, n=50)


def test_stability_table_monotone_rules():
    t = StabilityTable(rows=[(0.1, 0.5, 1), (0.05, 0.52, 1), (0.02, 0.3, 1)], grid_floor=0.05)
    assert t.monotone()
    t.rows.append((0.01, 0.33, 1))
    assert not t.monotone()
    assert not StabilityTable(rows=[(0.1, 0.1, 1), (0.05, 0.5, 1)], grid_floor=0.05).monotone()


def test_stability_serialization():
    t = StabilityTable(rows=[(0.1, 0.25, 20)], seed=3, grid_n=200, grid_floor=0.04)
    assert t.to_csv() == "delta,measured,trials\n0.1,0.250000,20\n"
    assert t.to_dict()["rows"] == [{"delta": 0.1, "measured": 0.25, "trials": 20}]


def test_tjump_counterexample_linf():
    rep = t_jump_scan(fan_for(CROSS_P, CROSS_A, square(math.inf)), doublings=3)
    assert rep.verdict == "jump"
    assert rep.stabilized_jump >= 0.5
    assert [m for m, _ in rep.levels] == [720, 1440, 2880, 5760]


def test_tjump_counterexample_at_p4_is_continuous():
    assert t_jump_scan(fan_for(CROSS_P, CROSS_A, square(4)), 3).verdict == "continuous"


def test_tjump_two_singletons_l2_continuous():
    assert t_jump_scan(fan_for(TWO_P, TWO_A, square(2)), 3).verdict == "continuous"


def test_tjump_needs_two_doublings_and_a_source():
    X = square(2)
    f = fan_for(TWO_P, TWO_A, X, 64)
    with pytest.raises(ValueError):
        t_jump_scan(f, 1)
    f.source = None
    with pytest.raises(ValueError):
        t_jump_scan(f, 2)


def test_jump_report_serialization():
    rep = JumpReport([(90, 1.0), (180, 0.5)], "continuous", 2.0)
    assert rep.to_csv() == "M,max_jump\n90,1.000000\n180,0.500000\n"
    assert rep.to_dict()["stabilized_jump"] == 0.5


def test_decomposition_single_part():
    X = square(2)
    assert decomposition_check([np.array([[0.0, 0.0]])], np.array([[1.0, 1.0]]), X, 50)


def test_decomposition_two_parts_l2():
    rng = np.random.default_rng(1)
    parts = [rng.uniform(-2, 2, (3, 2)), rng.uniform(-2, 2, (2, 2))]
    assert decomposition_check(parts, rng.uniform(-2, 2, (4, 2)), square(2), 200)


def test_decomposition_three_parts_linf():
    rng = np.random.default_rng(2)
    parts = [rng.uniform(-2, 2, (2, 2)) for _ in range(3)]
    assert decomposition_check(parts, rng.uniform(-2, 2, (3, 2)), square(math.inf), 200)


def test_decomposition_needs_parts():
    with pytest.raises(ValueError):
        decomposition_check([], np.zeros((1, 2)), square(2), 10)
