import numpy as np
import pytest

from edpconv.cell import r_eff_wiggly_energy
from edpconv.errors import DegenerateGrid, OutOfDomain
from edpconv.legendre import (SampledConvexFunction, biconjugate_check, conjugate, lower_hull,
                              subdifferential)


def brute_conjugate(x, f, xi):
    return np.max(xi[:, None] * x[None, :] - f[None, :], axis=1)


V = np.linspace(-5, 5, 10001)


def test_quadratic_dual():
    f = SampledConvexFunction(V, V * V)
    g = conjugate(f, np.array([1.0]))
    assert g.values[0] == pytest.approx(0.25, abs=1e-5)
    assert g.domain_note == "dual-forces"


def test_abs_dual_and_truncation():
    f = SampledConvexFunction(V, np.abs(V))
    g = conjugate(f, np.array([0.5, 1.5]))
    assert g.values[0] == pytest.approx(0.0, abs=1e-12)
    assert not g.truncated[0]
    assert g.truncated[1]
    assert g.values[1] == pytest.approx(0.5 * 5, abs=1e-9)


def test_matches_brute_force():
    rng = np.random.default_rng(3)
    x = np.sort(rng.uniform(-3, 3, 300))
    f = x**4 - x + np.cosh(x)
    xi = np.linspace(-40, 40, 257)
    assert np.allclose(conjugate(SampledConvexFunction(x, f), xi).values,
                       brute_conjugate(x, f, xi), rtol=0, atol=1e-12 * 40)


def test_threshold_potential_dual_vanishes():
    grid = np.linspace(-2, 2, 401)
    f = SampledConvexFunction(grid, r_eff_wiggly_energy(1.0, 1.0, grid))
    xi = np.linspace(-0.95, 0.95, 39)
    g = conjugate(f, xi)
    assert np.max(np.abs(g.values)) <= 1e-12
    assert np.allclose(g.values, brute_conjugate(grid, f.values, xi), atol=1e-14)


def test_degenerate():
    with pytest.raises(DegenerateGrid):
        conjugate(SampledConvexFunction(np.array([0.0, 1.0]), np.array([np.inf, 1.0])))


def test_default_dual_grid_spans_slopes():
    f = SampledConvexFunction(np.linspace(-1, 1, 21), np.linspace(-1, 1, 21) ** 2)
    g = conjugate(f)
    assert g.grid.size == 21
    assert g.grid[0] == pytest.approx(-1.9) and g.grid[-1] == pytest.approx(1.9)


class TestBiconjugate:
    def test_convex_inputs(self):
        x = np.linspace(-3, 3, 601)
        assert biconjugate_check(SampledConvexFunction(x, 0.5 * x * x)) <= 1e-6
        assert biconjugate_check(SampledConvexFunction(x, np.abs(x))) <= 1e-6

    def test_cosine_hull_gap(self):
        x = np.linspace(-3 * np.pi, 3 * np.pi, 1201)
        f = np.cos(x)
        dev = biconjugate_check(SampledConvexFunction(x, f))
        # brute-force lower hull: biconjugate through dense brute-force maxima
        xi = np.linspace(-2, 2, 4001)
        hull = brute_conjugate(xi, brute_conjugate(x, f, xi), x)
        assert dev == pytest.approx(2.0, abs=1e-6)
        assert dev == pytest.approx(np.max(f - hull), abs=1e-3)

    def test_lower_hull_indices(self):
        x = np.array([0.0, 1, 2, 3])
        assert list(lower_hull(x, np.array([0.0, 5, 1, 0]))) == [0, 3]


class TestSubdifferential:
    def test_quadratic(self):
        h = 0.01
        x = np.arange(-200, 201) * h
        lo, hi = subdifferential(SampledConvexFunction(x, 0.5 * x * x), 1.0)
        assert 1 - h <= lo <= 1 <= hi <= 1 + h

    def test_abs(self):
        x = np.linspace(-1, 1, 201)
        assert subdifferential(SampledConvexFunction(x, np.abs(x)), 0.0) == pytest.approx((-1, 1))

    def test_threshold_potential(self):
        x = np.linspace(-1, 1, 201)
        lo, hi = subdifferential(SampledConvexFunction(x, r_eff_wiggly_energy(1.0, 1.0, x)), 0.0)
        assert lo == pytest.approx(-1, abs=0.01) and hi == pytest.approx(1, abs=0.01)

    def test_out_of_domain(self):
        x = np.linspace(-1, 1, 5)
        with pytest.raises(OutOfDomain):
            subdifferential(SampledConvexFunction(x, x * x), 1.5)


def test_order_reversal():
    x = np.linspace(-2, 2, 401)
    xi = np.linspace(-3, 3, 61)
    f = conjugate(SampledConvexFunction(x, 0.5 * x * x), xi).values
    g = conjugate(SampledConvexFunction(x, 0.5 * x * x + 0.1 * np.abs(x)), xi).values
    assert np.all(f >= g - 1e-14)


def test_young_equality_on_quadratics():
    mu = 3.0
    x = np.linspace(-2, 2, 401)
    f = SampledConvexFunction(x, 0.5 * mu * x * x)
    v = x[::20]
    fs = conjugate(f, mu * v).values
    assert np.max(np.abs(0.5 * mu * v * v + fs - mu * v * v)) <= 1e-8 * f.scale


def test_fenchel_young_on_graph():
    x = np.linspace(-2, 2, 201)
    f = np.cosh(x)
    xi = np.linspace(-3.5, 3.5, 701)
    fs = conjugate(SampledConvexFunction(x, f), xi).values
    gap = np.min(f[:, None] + fs[None, :] - x[:, None] * xi[None, :], axis=1)
    lip = np.max(np.abs(np.sinh(x)))
    assert np.all(gap >= -1e-12)
    assert np.max(gap) <= (x[1] - x[0]) * lip
