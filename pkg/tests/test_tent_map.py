import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tentlab.tent_map import (DomainError, IntervalSet, NotMarkovError, TentMap,
                              critical_orbit, markov_partition)

SQRT2 = math.sqrt(2.0)
slopes = st.floats(min_value=1.0 + 1e-6, max_value=2.0)
points = st.floats(min_value=-1.0, max_value=1.0)


def test_critical_point_cached():
    assert TentMap(1.6).c == pytest.approx(1 - 2 / 1.6, abs=0)


@pytest.mark.parametrize("t", [1.0, 0.5, 2.5, float("nan")])
def test_bad_slope(t):
    with pytest.raises(DomainError):
        TentMap(t)


@pytest.mark.parametrize("t,x,want", [
    (2.0, 0.0, 1.0),
    (1.5, 0.0, 0.5),
    (SQRT2, 3 - 2 * SQRT2, 3 - 2 * SQRT2),
])
def test_eval_examples(t, x, want):
    assert TentMap(t).eval(x) == pytest.approx(want, abs=1e-12)


def test_eval_domain():
    with pytest.raises(DomainError):
        TentMap(1.5).eval(1.1)
    TentMap(1.5).eval(1.0 + 5e-13)


@given(slopes)
def test_core_invariance(t):
    f = TentMap(t)
    assert f(f.c) == pytest.approx(1.0, abs=1e-12)
    assert f(1.0) == pytest.approx(-1.0, abs=1e-12)
    assert f(-1.0) == pytest.approx(3 - 2 * t, abs=1e-12)


def test_branch_decomposition_random():
    rng = np.random.default_rng(0)
    t = rng.uniform(1.0 + 1e-9, 2.0, 10_000)
    x = rng.uniform(-1.0, 1.0, 10_000)
    for ti, xi in zip(t[:2000], x[:2000]):
        f = TentMap(float(ti))
        y = f(float(xi))
        want = ti * xi + (3 - ti) if xi <= f.c else -ti * xi + (ti - 1)
        assert -1.0 <= y <= 1.0
        assert abs(y - want) <= 1e-12


@pytest.mark.parametrize("t,v,want", [
    (2.0, 1.0, (0.0,)),
    (2.0, -1.0, (-1.0, 1.0)),
    (1.5, 0.0, (-1.0, 1 / 3)),
])
def test_preimage_points_examples(t, v, want):
    got = TentMap(t).preimage_points(v)
    assert len(got) == len(want)
    assert np.allclose(got, want, atol=1e-12)


@given(slopes, points)
def test_preimage_points_property(t, v):
    f = TentMap(t)
    pts = f.preimage_points(v)
    for x in pts:
        assert abs(f(x) - v) <= 1e-12
    if v > 3 - 2 * t + 1e-12:
        assert len(pts) == 2 or abs(v - 1.0) <= 1e-12
    elif v < 3 - 2 * t - 1e-12:
        assert len(pts) == 1


def test_preimage_points_domain():
    with pytest.raises(DomainError):
        TentMap(1.5).preimage_points(1.5)


@pytest.mark.parametrize("t,ab,n,want", [
    (2.0, (-1.0, 1.0), 1, [(-1.0, 1.0)]),
    (2.0, (0.5, 1.0), 1, [(-0.25, 0.25)]),
])
def test_preimage_set_examples(t, ab, n, want):
    got = TentMap(t).preimage_set(IntervalSet.interval(*ab), n)
    assert got.allclose(IntervalSet(want))


def test_preimage_set_boundary_example():
    s = TentMap(1.9).preimage_set(IntervalSet.interval(0.0, 0.5), 10)
    assert s.boundary_count <= 2**11


@given(slopes, points, points, st.integers(0, 6))
def test_preimage_set_composition(t, a, b, n):
    a, b = min(a, b), max(a, b)
    f = TentMap(t)
    s = IntervalSet.interval(a, b)
    direct = f.preimage_set(s, n)
    step = s
    for _ in range(n):
        step = f.preimage_set(step, 1)
    assert direct.allclose(step, atol=1e-12)


@given(slopes, points, points, st.integers(1, 5), st.lists(points, min_size=1, max_size=50))
def test_preimage_set_membership(t, a, b, n, xs):
    a, b = min(a, b), max(a, b)
    f = TentMap(t)
    pre = f.preimage_set(IntervalSet.interval(a, b), n)
    for x in xs:
        y = f.iterate(x, n)
        # skip points numerically on the boundary
        if min(abs(y - a), abs(y - b)) < 1e-9 * 4**n:
            continue
        assert bool(pre.contains(x)) == (a <= y <= b)


def test_interval_set_invariants():
    s = IntervalSet.from_pieces([(0.5, 0.7), (-0.2, 0.1), (0.05, 0.3), (0.9, 0.9)])
    assert list(s) == [(-0.2, 0.3), (0.5, 0.7), (0.9, 0.9)]
    assert s.boundary_count == 5
    assert s.length == pytest.approx(0.7)
    with pytest.raises(ValueError):
        IntervalSet([(0.0, 0.5), (0.4, 0.6)])
    assert (s & IntervalSet.interval(0.0, 0.6)) == IntervalSet([(0.0, 0.3), (0.5, 0.6)])
    assert IntervalSet.empty().boundary_count == 0


def test_critical_orbit_examples():
    rep = critical_orbit(TentMap(2.0))
    assert rep.markov
    assert np.allclose(rep.points[:4], [0, 1, -1, -1])
    rep = critical_orbit(TentMap(SQRT2))
    assert rep.markov
    assert np.allclose(rep.points[:5], [1 - SQRT2, 1, -1, 3 - 2 * SQRT2, 3 - 2 * SQRT2], atol=1e-12)
    assert not critical_orbit(TentMap(1.8), depth=30, tol=1e-9).markov


def test_markov_partition():
    assert np.allclose(markov_partition(TentMap(SQRT2)), [-1, 1 - SQRT2, 3 - 2 * SQRT2, 1])
    with pytest.raises(NotMarkovError):
        markov_partition(TentMap(1.8), depth=30)
    with pytest.raises(ValueError):
        critical_orbit(TentMap(1.8), depth=0)


def test_boundary_bound_grid():
    rng = np.random.default_rng(1)
    for t in np.linspace(1.02, 2.0, 50):
        f = TentMap(float(t))
        a, b = np.sort(rng.uniform(-1, 1, 2))
        s = IntervalSet.interval(a, b)
        for n in range(13):
            assert s.boundary_count <= 2 ** (n + 1)
            s = f.preimage_set(s, 1)
