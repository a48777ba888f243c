import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tentlab.acim import (ConvergenceError, Density, birkhoff_histogram, l1_density_distance,
                          markov_exact_density, markov_piecewise_density, stationary_density,
                          ulam_density, ulam_operator, wasserstein1)
from tentlab.tent_map import IntervalSet, NotMarkovError, TentMap

SQRT2 = math.sqrt(2.0)
# hand solve of the 3-interval transfer system at t = sqrt2
RHO_LOW = (2 + SQRT2) / 8
RHO_HIGH = (1 + SQRT2) / 4


def point_mass(nbins, i):
    m = np.zeros(nbins)
    m[i] = 1.0
    return Density.from_masses(m)


@pytest.fixture(scope="module")
def ulam_sqrt2():
    return ulam_density(TentMap(SQRT2), 4096)


def test_density_validation():
    with pytest.raises(ValueError):
        Density(np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        Density(np.array([1.5, -0.5]))
    d = Density.uniform(8)
    assert d.binwidth == 0.25
    assert d.weights.sum() * d.binwidth == pytest.approx(1.0)


@pytest.mark.parametrize("t", [1.1, 1.5, SQRT2, 1.8, 2.0])
def test_ulam_rows(t):
    op = ulam_operator(TentMap(t), 512)
    assert np.allclose(np.asarray(op.matrix.sum(axis=1)).ravel(), 1.0, atol=1e-12)
    assert max(len(r) for r in op.rows) <= math.ceil(t) + 1


def test_ulam_full_tent_rows():
    for row in ulam_operator(TentMap(2.0), 4096).rows:
        assert len(row) == 2
        assert all(w == 0.5 for _, w in row)


def test_ulam_t2_constant():
    d = ulam_density(TentMap(2.0), 4096)
    assert np.max(np.abs(d.weights - 0.5)) <= 1e-8


def test_stationary_residual():
    op = ulam_operator(TentMap(1.7), 1024)
    d = stationary_density(op, tol=1e-10)
    pushed = op.push(d.masses)
    assert np.abs(pushed - d.masses).sum() <= 1e-10


def test_stationary_nonconvergence():
    op = ulam_operator(TentMap(1.3), 1024)
    with pytest.raises(ConvergenceError) as exc:
        stationary_density(op, tol=1e-14, maxiter=3)
    assert exc.value.residual > 1e-14


def test_markov_sqrt2_values():
    rho, pts = markov_piecewise_density(TentMap(SQRT2))
    assert np.allclose(pts, [-1, 1 - SQRT2, 3 - 2 * SQRT2, 1])
    assert np.allclose(rho, [RHO_LOW, RHO_LOW, RHO_HIGH], atol=1e-12)
    assert np.sum(rho * np.diff(pts)) == pytest.approx(1.0, abs=1e-12)


def test_markov_t2_uniform():
    d = markov_exact_density(TentMap(2.0), 4096)
    assert np.allclose(d.weights, 0.5, atol=1e-12)


def test_markov_vs_ulam_sqrt2(ulam_sqrt2):
    assert wasserstein1(ulam_sqrt2, markov_exact_density(TentMap(SQRT2), 4096)) <= 1e-3


def test_markov_requires_markov():
    with pytest.raises(NotMarkovError):
        markov_exact_density(TentMap(1.8))


def test_birkhoff_t2_uniform():
    d = birkhoff_histogram(TentMap(2.0), n=1_000_000, nbins=4096, seed=3)
    assert wasserstein1(d, Density.uniform(4096)) <= 5e-3


def test_birkhoff_determinism_and_count():
    a = birkhoff_histogram(TentMap(1.6), n=50_000, nbins=256, burnin=100, seed=9)
    b = birkhoff_histogram(TentMap(1.6), n=50_000, nbins=256, burnin=100, seed=9)
    assert np.array_equal(a.weights, b.weights)
    counts = a.masses * (50_000 - 100)
    assert np.allclose(counts, np.round(counts), atol=1e-6)
    with pytest.raises(ValueError):
        birkhoff_histogram(TentMap(1.6), n=10, burnin=10)


@pytest.mark.parametrize("t", [1.2, 1.5, 1.8, 1.95, 2.0, SQRT2])
def test_ulam_vs_birkhoff(t):
    tent = TentMap(t)
    w = wasserstein1(ulam_density(tent, 4096), birkhoff_histogram(tent, n=1_000_000, nbins=4096, seed=1))
    assert w <= 5e-3


def test_wasserstein_examples():
    n = 4096
    d = Density.uniform(n)
    assert wasserstein1(d, d) == 0.0
    a, b = point_mass(n, 100), point_mass(n, 3000)
    assert wasserstein1(a, b) == pytest.approx(2900 * 2 / n, abs=1e-12)
    # uniform against a point mass at 0, smeared over one bin: (1 - 1/n)/2 + O(1/n)
    centre = point_mass(n + 1, n // 2)
    assert wasserstein1(Density.uniform(n + 1), centre) == pytest.approx(0.5, abs=1.0 / n)
    with pytest.raises(ValueError):
        wasserstein1(Density.uniform(4), Density.uniform(8))


def test_l1_examples():
    n = 1024
    half = np.where(np.arange(n) < n // 2, 1.0, 0.0)
    assert l1_density_distance(Density.uniform(n), Density(half)) == pytest.approx(1.0)
    assert l1_density_distance(Density.uniform(n), Density.uniform(n)) == 0.0
    with pytest.raises(ValueError):
        l1_density_distance(Density.uniform(4), Density.uniform(8))


densities = st.lists(st.floats(0.0, 10.0), min_size=16, max_size=16).filter(lambda w: sum(w) > 1e-3)


@given(densities, densities, densities)
def test_metric_properties(a, b, c):
    da, db, dc = (Density.from_masses(np.array(x)) for x in (a, b, c))
    for dist in (wasserstein1, l1_density_distance):
        assert dist(da, dc) <= dist(da, db) + dist(db, dc) + 1e-12
        assert dist(da, db) == pytest.approx(dist(db, da), abs=1e-12)
    # diam(I)/2 = 1
    assert wasserstein1(da, db) <= l1_density_distance(da, db) + 1e-12


def test_mass_and_expect():
    d = Density.uniform(64)
    assert d.mass(IntervalSet([(-1.0, -0.5), (0.0, 0.25)])) == pytest.approx(0.375)
    assert d.expect(lambda x: x**2) == pytest.approx(1 / 3, abs=1e-12)


def test_csv_roundtrip(tmp_path):
    d = ulam_density(TentMap(1.5), 128)
    text = d.to_csv(tmp_path / "d.csv", header="a\nb")
    assert text.startswith("# a\n# b\nbin_left,bin_right,weight\n")
    back = Density.from_csv(tmp_path / "d.csv")
    assert np.array_equal(back.weights, d.weights)
